//! Lyapunov functionals for both regimes and certification of their decay.
//!
//! Extinction (f > r):
//!
//! ```text
//! E₁ = ∫u + (k/2)∫(v − f)²,    F₁ = ∫u² + ∫(v − f)²
//! ```
//!
//! Coexistence (r > f), with (u*, v*) the positive homogeneous state:
//!
//! ```text
//! E₂ = ∫(u − u* − u* ln(u/u*)) + (k/2)∫(v − v*)²
//! F₂ = ∫(|∇u|/u)² + ∫|∇v|² + ∫(u − u*)² + ∫(v − v*)²
//! ```
//!
//! Along solutions `dE/dt ≤ −c F` for constants certified here.

use serde::Serialize;

use crate::equilibria;
use crate::error::{Error, Result};
use crate::grid;
use crate::model::{ModelParams, Sample, State, NEG_TOL};
use crate::thresholds::KRange;

/// Below this the logarithm in E₂ is considered undefined.
pub const U_FLOOR: f64 = 1e-30;

/// Points in the coarse k scan before golden-section refinement.
const K_SCAN_POINTS: usize = 64;

fn check_weight(k: f64) -> Result<()> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParams(format!("weight k = {k} must be positive")));
    }
    Ok(())
}

fn check_nonnegative(state: &State) -> Result<()> {
    let m = state.u.min();
    if m < -NEG_TOL {
        return Err(Error::InvalidField(format!("u has negative entry {m:e}")));
    }
    Ok(())
}

fn coexistence_point(p: &ModelParams) -> Result<(f64, f64)> {
    if p.r <= p.f {
        return Err(Error::Regime(format!(
            "coexistence functionals need r > f, got r = {}, f = {}",
            p.r, p.f
        )));
    }
    Ok(equilibria::coexistence(p))
}

fn sum_sq_dev(vals: &[f64], c: f64) -> f64 {
    vals.iter().map(|&x| (x - c) * (x - c)).sum()
}

pub fn e1(state: &State, p: &ModelParams, k: f64) -> Result<f64> {
    check_weight(k)?;
    check_nonnegative(state)?;
    let g = state.grid();
    let mass = grid::integrate_raw(g, state.u.values());
    let dev = sum_sq_dev(state.v.values(), p.f) * g.cell_volume();
    Ok(mass + 0.5 * k * dev)
}

pub fn f1(state: &State, p: &ModelParams) -> Result<f64> {
    check_nonnegative(state)?;
    let g = state.grid();
    let u2 = sum_sq_dev(state.u.values(), 0.0);
    let v2 = sum_sq_dev(state.v.values(), p.f);
    Ok((u2 + v2) * g.cell_volume())
}

fn check_floor(state: &State) -> Result<()> {
    let m = state.u.min();
    if m <= U_FLOOR {
        return Err(Error::UndefinedFunctional { min_u: m });
    }
    Ok(())
}

pub fn e2(state: &State, p: &ModelParams, k: f64) -> Result<f64> {
    check_weight(k)?;
    let (us, vs) = coexistence_point(p)?;
    check_floor(state)?;
    let g = state.grid();
    // u − u* − u* ln(u/u*) ≥ 0 pointwise; summing the nonnegative terms keeps
    // the total nonnegative up to round-off.
    let entropy: f64 = state.u.values().iter().map(|&u| u - us - us * (u / us).ln()).sum();
    let dev = sum_sq_dev(state.v.values(), vs);
    Ok((entropy + 0.5 * k * dev) * g.cell_volume())
}

pub fn f2(state: &State, p: &ModelParams) -> Result<f64> {
    let (us, vs) = coexistence_point(p)?;
    check_floor(state)?;
    let g = state.grid();
    let grad_u = grid::gradient_magnitude_sq(&state.u)?;
    let grad_v = grid::gradient_magnitude_sq(&state.v)?;
    let fisher: f64 = grad_u.values().iter().zip(state.u.values()).map(|(g2, u)| g2 / (u * u)).sum();
    let gv: f64 = grad_v.values().iter().sum();
    let du = sum_sq_dev(state.u.values(), us);
    let dv = sum_sq_dev(state.v.values(), vs);
    Ok((fisher + gv + du + dv) * g.cell_volume())
}

/// Symmetric 2×2 matrix `[[a, b], [b, c]]`.
pub type Sym2 = [[f64; 2]; 2];

/// `P = [[r, (1−ka)/2], [(1−ka)/2, k]]`, `S = [[D u*, χ u*/2], [χ u*/2, k]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticForms {
    pub p: Sym2,
    pub s: Sym2,
}

pub fn build_forms(params: &ModelParams, k: f64) -> Result<QuadraticForms> {
    check_weight(k)?;
    let (us, _) = coexistence_point(params)?;
    let off_p = 0.5 * (1.0 - k * params.a);
    let off_s = 0.5 * params.chi * us;
    Ok(QuadraticForms {
        p: [[params.r, off_p], [off_p, k]],
        s: [[params.d * us, off_s], [off_s, k]],
    })
}

/// Leading principal minors `(M₁, M₂)`.
pub fn minors(m: &Sym2) -> (f64, f64) {
    (m[0][0], m[0][0] * m[1][1] - m[0][1] * m[1][0])
}

/// Smaller eigenvalue of a symmetric 2×2 matrix, in closed form.
pub fn min_eigenvalue(m: &Sym2) -> f64 {
    let (a, b, c) = (m[0][0], m[0][1], m[1][1]);
    let mean = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let lo = mean - rad;
    // Product form for the small eigenvalue keeps relative accuracy.
    let hi = mean + rad;
    if lo.abs() < 1e-8 * hi.abs() && hi != 0.0 {
        (a * c - b * b) / hi
    } else {
        lo
    }
}

/// Sylvester's criterion on a single matrix.
pub fn sylvester(m: &Sym2) -> bool {
    let (m1, m2) = minors(m);
    m1 > 0.0 && m2 > 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefinitenessCheck {
    /// Sylvester verdict for both matrices.
    pub verdict: bool,
    /// min over P and S of the smaller eigenvalue.
    pub lambda_min: f64,
}

pub fn check_positive_definite(forms: &QuadraticForms) -> DefinitenessCheck {
    DefinitenessCheck {
        verdict: sylvester(&forms.p) && sylvester(&forms.s),
        lambda_min: min_eigenvalue(&forms.p).min(min_eigenvalue(&forms.s)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LyapunovCase {
    /// E₁/F₁ around (0, f).
    Extinction,
    /// E₂/F₂ around (u*, v*).
    Coexistence,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovConstants {
    pub case: LyapunovCase,
    pub k: f64,
    /// Young's-inequality parameter; extinction case only.
    pub eps1: Option<f64>,
    /// Certified decay constant: dE/dt ≤ −c F.
    pub c: f64,
}

/// `Q(k) = k − a²k²/(2r)`
pub fn parabola_q(k: f64, r: f64, a: f64) -> f64 {
    k - a * a * k * k / (2.0 * r)
}

/// The two coefficients of the extinction-case energy estimate,
/// `(r/2 − 1/(4ε₁), Q(k) − ε₁)`.
pub fn case1_coefficients(r: f64, a: f64, k: f64, eps1: f64) -> (f64, f64) {
    (0.5 * r - 0.25 / eps1, parabola_q(k, r, a) - eps1)
}

/// Maximizes a unimodal `g` on `[lo, hi]`.
pub fn golden_section_max(g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut g1, mut g2) = (g(x1), g(x2));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-13 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if g1 < g2 {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + INV_PHI * (b - a);
            g2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - INV_PHI * (b - a);
            g1 = g(x1);
        }
    }
    // Endpoints can win when the maximum sits on the boundary.
    [(x1, g1), (x2, g2), (lo, g(lo)), (hi, g(hi))]
        .into_iter()
        .fold((lo, f64::NEG_INFINITY), |best, cand| if cand.1 > best.1 { cand } else { best })
}

/// Extinction-case constants.
///
/// With `a > 0` the weight sits at the vertex `k = r/a²` of `Q` and `ε₁` is
/// chosen in `[1/(2r), Q(k)]` to maximize the smaller coefficient. With
/// `a = 0`, `k = 1/r` and `ε₁ = 3/(4r)`.
pub fn select_constants_case1(p: &ModelParams) -> Result<LyapunovConstants> {
    p.validate()?;
    if p.f <= p.r {
        return Err(Error::Hypothesis(format!("extinction case needs f > r (f = {}, r = {})", p.f, p.r)));
    }
    if p.r < p.a {
        return Err(Error::Hypothesis(format!("extinction case needs r >= a (r = {}, a = {})", p.r, p.a)));
    }
    let r = p.r;
    if p.a == 0.0 {
        let (k, eps1) = (1.0 / r, 0.75 / r);
        let (c_u, c_v) = case1_coefficients(r, 0.0, k, eps1);
        return Ok(LyapunovConstants { case: LyapunovCase::Extinction, k, eps1: Some(eps1), c: c_u.min(c_v) });
    }
    let k = r / (p.a * p.a);
    let lo = 0.5 / r;
    if r == p.a {
        // The feasible ε₁-interval collapses to a point where both
        // coefficients vanish.
        return Ok(LyapunovConstants { case: LyapunovCase::Extinction, k, eps1: Some(lo), c: 0.0 });
    }
    let hi = parabola_q(k, r, p.a);
    let objective = |e: f64| {
        let (c_u, c_v) = case1_coefficients(r, p.a, k, e);
        c_u.min(c_v)
    };
    let (eps1, c) = golden_section_max(objective, lo, hi);
    Ok(LyapunovConstants {
        case: LyapunovCase::Extinction,
        k,
        eps1: Some(eps1.clamp(lo, hi)),
        c: c.max(0.0),
    })
}

/// `min(λ_min(P), λ_min(S))` at weight `k`.
pub fn coexistence_margin(p: &ModelParams, k: f64) -> Result<f64> {
    Ok(check_positive_definite(&build_forms(p, k)?).lambda_min)
}

/// Coexistence-case constants: scans `k` over the admissible interval and
/// refines the best point by golden section.
pub fn select_constants_case2(p: &ModelParams, feasible: Option<KRange>) -> Result<LyapunovConstants> {
    let (us, _) = coexistence_point(p)?;
    let range = feasible.ok_or_else(|| Error::Infeasible(format!("empty k interval for {p:?}")))?;
    if !(range.lo < range.hi) {
        return Err(Error::Infeasible(format!("empty k interval ({}, {})", range.lo, range.hi)));
    }
    // Unbounded above (a = 0): both margins saturate as k grows, so a finite
    // window well past the saturation scale suffices.
    let hi = if range.is_bounded() {
        range.hi
    } else {
        range.lo + 100.0 * (1.0 + p.r + p.d * us + p.chi * us)
    };
    let lo = range.lo;
    let margin = |k: f64| coexistence_margin(p, k).unwrap_or(f64::NEG_INFINITY);
    let step = (hi - lo) / K_SCAN_POINTS as f64;
    let node = |i: usize| lo + step * (i as f64 + 0.5);
    let best = (0..K_SCAN_POINTS)
        .map(|i| (i, margin(node(i))))
        .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
    let a = if best.0 == 0 { lo + 0.25 * step } else { node(best.0 - 1) };
    let b = if best.0 + 1 == K_SCAN_POINTS { hi - 0.25 * step } else { node(best.0 + 1) };
    let (k, c) = golden_section_max(margin, a, b);
    let (k, c) = if c >= best.1 { (k, c) } else { (node(best.0), best.1) };
    Ok(LyapunovConstants { case: LyapunovCase::Coexistence, k, eps1: None, c: c.max(0.0) })
}

/// Evaluates `(E, F)` for the given case; used as a simulation probe.
pub fn evaluate(case: LyapunovCase, state: &State, p: &ModelParams, k: f64) -> Result<(f64, f64)> {
    match case {
        LyapunovCase::Extinction => Ok((e1(state, p, k)?, f1(state, p)?)),
        LyapunovCase::Coexistence => Ok((e2(state, p, k)?, f2(state, p)?)),
    }
}

/// Probe closure for [`crate::model::simulate_with`]; undefined samples
/// become gaps.
pub fn probe(case: LyapunovCase, p: ModelParams, k: f64) -> impl Fn(&State) -> Option<(f64, f64)> {
    move |s| evaluate(case, s, &p, k).ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayReport {
    pub intervals: usize,
    pub violations: usize,
    pub violation_fraction: f64,
    /// Largest `ΔE/Δt − (−c·F̄ + tol)`; ≤ 0 when no violation.
    pub worst_violation: f64,
    /// Largest `(E_{i+1} − E_i)/(1 + E_i)` over intervals.
    pub max_relative_increase: f64,
    /// Samples with no (E, F) value.
    pub excluded_samples: usize,
}

/// `tol_decay = DECAY_TOL·(1 + |E|)`
pub const DECAY_TOL: f64 = 1e-6;

/// Checks `ΔE/Δt ≤ −c·F̄ + tol` on consecutive defined samples, with `F̄` the
/// trapezoidal mean of F over the interval.
///
/// The cadence has to resolve the decay of F: rough initial data lose most of
/// their dissipation within a few steps, and a coarse sample spacing then
/// overestimates F̄ and reports spurious violations.
pub fn monitor_decay(samples: &[Sample], constants: &LyapunovConstants) -> DecayReport {
    let excluded_samples = samples.iter().filter(|s| s.lyapunov.is_none()).count();
    let mut intervals = 0;
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut max_inc = f64::NEG_INFINITY;
    for w in samples.windows(2) {
        let (Some((e0, f0)), Some((e1, f1))) = (w[0].lyapunov, w[1].lyapunov) else {
            continue;
        };
        let dt = w[1].t - w[0].t;
        if !(dt > 0.0) {
            continue;
        }
        intervals += 1;
        let rate = (e1 - e0) / dt;
        let bound = -constants.c * 0.5 * (f0 + f1) + DECAY_TOL * (1.0 + e0.abs());
        let excess = rate - bound;
        if excess > 0.0 {
            violations += 1;
        }
        worst = worst.max(excess);
        max_inc = max_inc.max((e1 - e0) / (1.0 + e0.abs()));
    }
    DecayReport {
        intervals,
        violations,
        violation_fraction: if intervals == 0 { 0.0 } else { violations as f64 / intervals as f64 },
        worst_violation: if intervals == 0 { 0.0 } else { worst },
        max_relative_increase: if intervals == 0 { 0.0 } else { max_inc },
        excluded_samples,
    }
}
