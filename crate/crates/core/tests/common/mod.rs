//! Independent oracles shared by the integration suites. Nothing here calls
//! into the code paths it is used to check.
#![allow(dead_code)]

use chemorepel::ModelParams;

/// Spatially homogeneous reduction `u' = ru(1−u) − uv`, `v' = au − v + f`,
/// integrated with an adaptive Dormand–Prince 5(4) pair.
pub fn ode_reduction(p: &ModelParams, u0: f64, v0: f64, t_end: f64) -> (f64, f64) {
    let rhs = |y: [f64; 2]| {
        [p.r * y[0] * (1.0 - y[0]) - y[0] * y[1], p.a * y[0] - y[1] + p.f]
    };
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] =
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let tol = 1e-13;
    let mut y = [u0, v0];
    let mut t = 0.0;
    let mut h: f64 = 1e-3;
    while t < t_end {
        h = h.min(t_end - t);
        let mut k = [[0.0; 2]; 7];
        for s in 0..7 {
            let mut ys = y;
            for j in 0..s {
                ys[0] += h * A[s][j] * k[j][0];
                ys[1] += h * A[s][j] * k[j][1];
            }
            k[s] = rhs(ys);
        }
        let mut y5 = y;
        let mut err = 0.0f64;
        for c in 0..2 {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                d5 += B5[s] * k[s][c];
                d4 += B4[s] * k[s][c];
            }
            y5[c] += h * d5;
            err = err.max((h * (d5 - d4)).abs() / (tol * (1.0 + y[c].abs())));
        }
        if err <= 1.0 {
            t += h;
            y = y5;
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
    }
    (y[0], y[1])
}

/// All three complex roots of `c₃x³ + c₂x² + c₁x + c₀` as eigenvalues of the
/// companion matrix.
pub fn companion_roots(c: [f64; 4]) -> Vec<(f64, f64)> {
    let m = nalgebra::Matrix3::new(
        -c[1] / c[0], -c[2] / c[0], -c[3] / c[0],
        1.0, 0.0, 0.0,
        0.0, 1.0, 0.0,
    );
    let mut ev: Vec<(f64, f64)> = m.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect();
    ev.sort_by(|a, b| a.0.total_cmp(&b.0));
    ev
}

/// Positive real eigenvalues (|im| below `im_tol`) from [`companion_roots`].
pub fn companion_positive_real(c: [f64; 4], im_tol: f64) -> Vec<f64> {
    companion_roots(c)
        .into_iter()
        .filter(|&(re, im)| im.abs() <= im_tol && re > 0.0)
        .map(|(re, _)| re)
        .collect()
}

/// Scans `k ∈ (0, k_top]` on 10⁴ points for a weight satisfying both raw
/// positivity conditions of the coexistence quadratic forms.
pub fn scan_feasible(r: f64, p: &ModelParams) -> bool {
    let us = (r - p.f) / (r + p.a);
    let kmin = p.chi * p.chi * us / (4.0 * p.d);
    let k_top = if p.a > 0.0 {
        ((p.a + 2.0 * r) + 2.0 * (r * r + p.a * r).sqrt()) / (p.a * p.a) + 1.0
    } else {
        2.0 * kmin + 1.0
    };
    (1..=10_000).any(|i| {
        let k = k_top * i as f64 / 10_000.0;
        let det_p = r * k - (1.0 - k * p.a) * (1.0 - k * p.a) / 4.0;
        let det_s = p.d * us * k - p.chi * p.chi * us * us / 4.0;
        det_p > 0.0 && det_s > 0.0
    })
}
