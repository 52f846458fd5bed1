//! Feasibility algebra for the Lyapunov weights.
//!
//! In the coexistence regime the weight `k` must make both quadratic-form
//! matrices positive definite:
//!
//! ```text
//! r k - (1 - k a)²/4 > 0     ⟺  k ∈ (k₁(r), k₂(r))
//! k > k_min(r) = χ²(r - f) / (4 D (r + a))
//! ```
//!
//! Where the curve `k_min` meets `k₁` or `k₂` is governed by a cubic in `r`
//! whose positive roots define the critical logistic rate `r_c`.

use serde::Serialize;

use crate::equilibria::{self, Regime};
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Roots closer than `ROOT_MERGE·(1 + |r|)` count as one double root.
pub const ROOT_MERGE: f64 = 1e-9;

/// k_min(r) = χ²(r − f)/(4D(r + a)); zero at r = f.
pub fn k_min(r: f64, p: &ModelParams) -> Result<f64> {
    if r < p.f {
        return Err(Error::Regime(format!("k_min needs r >= f, got r = {r}, f = {}", p.f)));
    }
    Ok(p.chi * p.chi * (r - p.f) / (4.0 * p.d * (r + p.a)))
}

/// Open interval `(k₁, k₂)` on which `r k − (1 − k a)²/4 > 0`.
///
/// For `a = 0` the condition is just `r k > 0` and the interval is
/// `(0, +∞)`.
pub fn k_interval(r: f64, a: f64) -> (f64, f64) {
    if a == 0.0 {
        return (0.0, f64::INFINITY);
    }
    let a2 = a * a;
    let k2 = ((a + 2.0 * r) + 2.0 * (r * r + a * r).sqrt()) / a2;
    // k₁ k₂ = 1/a²; avoids cancellation in the minus branch.
    let k1 = 1.0 / (a2 * k2);
    (k1, k2)
}

/// Coefficients `[c₃, c₂, c₁, c₀]` of the intersection cubic.
pub fn cubic_coeffs(p: &ModelParams) -> Result<[f64; 4]> {
    if p.a == 0.0 {
        return Err(Error::DegenerateCubic("a = 0 makes every coefficient vanish; r_c = 0".into()));
    }
    let (d, chi, a, f) = (p.d, p.chi, p.a, p.f);
    let (a2, a3, a4) = (a * a, a * a * a, a * a * a * a);
    let (chi2, chi4) = (chi * chi, chi * chi * chi * chi);
    let c3 = 16.0 * d * a2 * chi2;
    let c2 = 24.0 * d * a3 * chi2 - a4 * chi4 - 16.0 * f * d * a2 * chi2 - 16.0 * d * d * a2;
    let c1 = 2.0 * f * a4 * chi4 + 8.0 * d * a4 * chi2 - 24.0 * f * d * a3 * chi2
        - 32.0 * d * d * a3;
    let c0 = -(16.0 * d * d * a4 + 8.0 * d * a4 * chi2 * f + a4 * chi4 * f * f);
    Ok([c3, c2, c1, c0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RealRoot {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubicRoots {
    /// Distinct real roots, ascending.
    pub real: Vec<RealRoot>,
    /// `(re, im)` with `im > 0` of the conjugate pair, if any.
    pub complex_pair: Option<(f64, f64)>,
}

impl CubicRoots {
    /// Real roots repeated by multiplicity.
    pub fn real_with_multiplicity(&self) -> Vec<f64> {
        self.real
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.value, r.multiplicity))
            .collect()
    }
}

fn horner(m: &[f64; 3], x: f64) -> f64 {
    ((x + m[0]) * x + m[1]) * x + m[2]
}

/// Scale of the monic terms at `x`, used to decide when `p(x)` is zero.
fn magnitude(m: &[f64; 3], x: f64) -> f64 {
    let ax = x.abs();
    ax * ax * ax + m[0].abs() * ax * ax + m[1].abs() * ax + m[2].abs()
}

fn bisect(m: &[f64; 3], mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut plo = horner(m, lo);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let pm = horner(m, mid);
        if pm == 0.0 {
            return Ok(mid);
        }
        if (pm < 0.0) == (plo < 0.0) {
            lo = mid;
            plo = pm;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numerical(format!("bisection did not converge on [{lo}, {hi}]")))
}

/// All roots of `c₃x³ + c₂x² + c₁x + c₀` with `c₃ ≠ 0`.
///
/// The real line inside the Cauchy bound is split at the critical points
/// into monotone pieces; each piece with a sign change is bisected to full
/// precision. A critical point where the polynomial vanishes (to round-off)
/// is a double root.
pub fn solve_cubic(c: [f64; 4]) -> Result<CubicRoots> {
    if c[0] == 0.0 || c.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateCubic(format!("not a cubic: {c:?}")));
    }
    let m = [c[1] / c[0], c[2] / c[0], c[3] / c[0]];
    let bound = 1.0 + m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let touches = |x: f64| horner(&m, x).abs() <= 64.0 * f64::EPSILON * magnitude(&m, x);

    // p'(x)/3 = x² + (2b/3) x + c/3
    let (qb, qc) = (2.0 * m[0] / 3.0, m[1] / 3.0);
    let disc = qb * qb - 4.0 * qc;
    let mut found: Vec<RealRoot> = Vec::new();
    let mut cuts = vec![(-bound, false)];
    if disc > 1e-14 * (qb * qb + 4.0 * qc.abs()) {
        let s = disc.sqrt();
        let q = -0.5 * (qb + qb.signum() * s);
        let (x1, x2) = if q != 0.0 {
            let (a, b) = (q, qc / q);
            (a.min(b), a.max(b))
        } else {
            (-0.5 * s, 0.5 * s)
        };
        for x in [x1, x2] {
            let t = touches(x);
            if t {
                found.push(RealRoot { value: x, multiplicity: 2 });
            }
            cuts.push((x, t));
        }
    } else {
        let x0 = -m[0] / 3.0;
        if touches(x0) {
            found.push(RealRoot { value: x0, multiplicity: 3 });
            cuts.push((x0, true));
        }
    }
    cuts.push((bound, false));

    for w in cuts.windows(2) {
        let ((lo, tlo), (hi, thi)) = (w[0], w[1]);
        if tlo || thi {
            continue;
        }
        let (plo, phi) = (horner(&m, lo), horner(&m, hi));
        if plo == 0.0 {
            found.push(RealRoot { value: lo, multiplicity: 1 });
        } else if (plo < 0.0) != (phi < 0.0) && phi != 0.0 {
            found.push(RealRoot { value: bisect(&m, lo, hi)?, multiplicity: 1 });
        }
    }
    found.sort_by(|x, y| x.value.total_cmp(&y.value));

    let mut real: Vec<RealRoot> = Vec::new();
    for root in found {
        match real.last_mut() {
            Some(prev) if (root.value - prev.value).abs() < ROOT_MERGE * (1.0 + root.value.abs()) => {
                let n = prev.multiplicity + root.multiplicity;
                prev.value = (prev.value * prev.multiplicity as f64
                    + root.value * root.multiplicity as f64)
                    / n as f64;
                prev.multiplicity = n.min(3);
            }
            _ => real.push(root),
        }
    }

    let count: usize = real.iter().map(|r| r.multiplicity).sum();
    let complex_pair = match count {
        3 => None,
        1 => {
            // Deflate: p(x) = (x − ρ)(x² + βx + γ).
            let rho = real[0].value;
            let beta = m[0] + rho;
            let gamma = m[1] + rho * beta;
            let qd = beta * beta - 4.0 * gamma;
            Some((-0.5 * beta, 0.5 * (-qd).max(0.0).sqrt()))
        }
        _ => {
            return Err(Error::Numerical(format!(
                "found {count} real roots (with multiplicity) for {c:?}: {real:?}"
            )))
        }
    };
    Ok(CubicRoots { real, complex_pair })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RcBranch {
    /// a = 0: no self-production, any r > f works.
    NoSelfProduction,
    /// χ = 0: the cubic's leading coefficient vanishes, any r > f works.
    TaxisFree,
    /// One positive root r₁; r_c = r₁.
    SingleRoot,
    /// Three positive roots r₁ < r₂ ≤ r₃; r_c = r₃.
    ThreeRoots,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalRate {
    pub r_c: f64,
    pub branch: RcBranch,
    pub coeffs: Option<[f64; 4]>,
    /// Positive roots repeated by multiplicity, ascending.
    pub positive_roots: Vec<f64>,
    pub roots: Option<CubicRoots>,
}

pub fn r_critical(p: &ModelParams) -> Result<CriticalRate> {
    p.validate()?;
    if p.a == 0.0 {
        return Ok(CriticalRate {
            r_c: 0.0,
            branch: RcBranch::NoSelfProduction,
            coeffs: None,
            positive_roots: vec![],
            roots: None,
        });
    }
    let coeffs = cubic_coeffs(p)?;
    if p.chi == 0.0 {
        return Ok(CriticalRate {
            r_c: 0.0,
            branch: RcBranch::TaxisFree,
            coeffs: Some(coeffs),
            positive_roots: vec![],
            roots: None,
        });
    }
    let roots = solve_cubic(coeffs)?;
    let positive: Vec<f64> =
        roots.real_with_multiplicity().into_iter().filter(|&r| r > 0.0).collect();
    let (r_c, branch) = match positive.len() {
        1 => (positive[0], RcBranch::SingleRoot),
        2 | 3 => (*positive.last().unwrap(), RcBranch::ThreeRoots),
        n => {
            return Err(Error::Numerical(format!(
                "{n} positive roots for {coeffs:?}; expected 1 or 3 ({roots:?})"
            )))
        }
    };
    // A double root reported once must still read as r₁ < r₂ = r₃.
    let positive_roots = if branch == RcBranch::ThreeRoots && positive.len() == 2 {
        vec![positive[0], positive[1], positive[1]]
    } else {
        positive
    };
    Ok(CriticalRate { r_c, branch, coeffs: Some(coeffs), positive_roots, roots: Some(roots) })
}

/// Open interval of admissible weights `k`; `hi = +∞` when unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KRange {
    pub lo: f64,
    pub hi: f64,
}

impl KRange {
    pub fn contains(&self, k: f64) -> bool {
        k > self.lo && k < self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.hi.is_finite()
    }
}

/// `(max(k_min, k₁), k₂)`, or `None` when empty.
pub fn feasible_k(r: f64, p: &ModelParams) -> Result<Option<KRange>> {
    if r <= p.f {
        return Err(Error::Regime(format!("feasible_k needs r > f, got r = {r}, f = {}", p.f)));
    }
    let kmin = k_min(r, p)?;
    let (k1, k2) = k_interval(r, p.a);
    let lo = kmin.max(k1);
    Ok(if lo < k2 { Some(KRange { lo, hi: k2 }) } else { None })
}

/// Whether the extinction-case construction applies: `r ≥ a`, or any r when
/// `a = 0`.
pub fn case1_feasible(r: f64, a: f64) -> bool {
    a == 0.0 || r >= a
}

/// Direct test of both raw inequalities at a given `(r, k)`.
pub fn weight_admissible(r: f64, k: f64, p: &ModelParams) -> bool {
    let kmin = p.chi * p.chi * (r - p.f) / (4.0 * p.d * (r + p.a));
    let m2p = r * k - (1.0 - k * p.a).powi(2) / 4.0;
    k > 0.0 && m2p > 0.0 && k > kmin
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub params: ModelParams,
    pub regime: Regime,
    /// `None` when r < f.
    pub k_min: Option<f64>,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub cubic: Option<[f64; 4]>,
    pub complex_pair: Option<(f64, f64)>,
    pub positive_roots: Vec<f64>,
    pub r_c: f64,
    pub branch: RcBranch,
    pub taxis_free: bool,
    /// r > f and r > r_c.
    pub above_critical_rate: bool,
    /// Admissible k at the current r; `hi = None` means unbounded.
    pub feasible_interval: Option<(f64, Option<f64>)>,
    /// f > r and the extinction-case condition holds.
    pub case1_feasible: bool,
}

/// Everything above, evaluated at `p.r`.
pub fn report(p: &ModelParams) -> Result<ThresholdReport> {
    let crit = r_critical(p)?;
    let regime = equilibria::regime(p);
    let (k1, k2) = if p.a > 0.0 {
        let (k1, k2) = k_interval(p.r, p.a);
        (Some(k1), Some(k2))
    } else {
        (None, None)
    };
    let feasible_interval = if regime == Regime::Coexistence {
        feasible_k(p.r, p)?.map(|k| (k.lo, k.is_bounded().then_some(k.hi)))
    } else {
        None
    };
    Ok(ThresholdReport {
        params: *p,
        regime,
        k_min: k_min(p.r, p).ok(),
        k1,
        k2,
        cubic: crit.coeffs,
        complex_pair: crit.roots.as_ref().and_then(|r| r.complex_pair),
        positive_roots: crit.positive_roots.clone(),
        r_c: crit.r_c,
        branch: crit.branch,
        taxis_free: p.chi == 0.0,
        above_critical_rate: regime == Regime::Coexistence && p.r > crit.r_c,
        feasible_interval,
        case1_feasible: regime == Regime::Extinction && case1_feasible(p.r, p.a),
    })
}

/// Grid of `(a, χ, f)` values scanned for a three-positive-root cubic at a
/// fixed `D`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchBox {
    pub d: f64,
    pub chi: Vec<f64>,
    pub a: Vec<f64>,
    pub f: Vec<f64>,
}

impl Default for SearchBox {
    fn default() -> Self {
        Self {
            d: 1.0,
            chi: vec![2.0, 4.0, 8.0, 16.0, 32.0],
            a: vec![1.0, 0.5, 2.0],
            f: vec![0.0, 0.1, 0.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThreeRootHit {
    /// Parameters with `r` set to the geometric mean of r₂ and r₃.
    pub params: ModelParams,
    pub roots: [f64; 3],
}

/// Scans `search` (χ outermost, ascending) for the first parameter set whose
/// cubic has three positive roots. Returns the hit, if any, and one log line
/// per candidate examined.
pub fn search_three_root(search: &SearchBox) -> (Option<ThreeRootHit>, Vec<String>) {
    let mut log = Vec::new();
    for &chi in &search.chi {
        for &a in &search.a {
            for &f in &search.f {
                // r is a placeholder here; the cubic does not depend on it.
                let Ok(p) = ModelParams::new(search.d, chi, 1.0, a, f) else {
                    log.push(format!("D={} chi={chi} a={a} f={f}: invalid", search.d));
                    continue;
                };
                match r_critical(&p) {
                    Ok(rc) if rc.branch == RcBranch::ThreeRoots => {
                        let [r1, r2, r3] =
                            [rc.positive_roots[0], rc.positive_roots[1], rc.positive_roots[2]];
                        log.push(format!(
                            "D={} chi={chi} a={a} f={f}: three roots {r1:.6} {r2:.6} {r3:.6}",
                            search.d
                        ));
                        if r2 < r3 && r2 > f {
                            let params = ModelParams { r: (r2 * r3).sqrt(), ..p };
                            return (Some(ThreeRootHit { params, roots: [r1, r2, r3] }), log);
                        }
                    }
                    Ok(rc) => log.push(format!(
                        "D={} chi={chi} a={a} f={f}: {:?}, r_c = {:.6}",
                        search.d, rc.branch, rc.r_c
                    )),
                    Err(e) => log.push(format!("D={} chi={chi} a={a} f={f}: {e}", search.d)),
                }
            }
        }
    }
    (None, log)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(d: f64, chi: f64, r: f64, a: f64, f: f64) -> ModelParams {
        ModelParams::new(d, chi, r, a, f).unwrap()
    }

    #[test]
    fn k_min_values() {
        let p = params(1.0, 2.0, 3.0, 1.0, 1.0);
        assert!((k_min(3.0, &p).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(k_min(1.0, &p).unwrap(), 0.0);
        assert!(matches!(k_min(0.5, &p), Err(Error::Regime(_))));
    }

    #[test]
    fn k_min_a0_reduction() {
        // a = 0: k_min = χ²(r − f)/(4D r); D=1, χ=2, r=3, f=1 → 4·2/12.
        let p = params(1.0, 2.0, 3.0, 0.0, 1.0);
        assert!((k_min(3.0, &p).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn k_interval_values() {
        let (k1, k2) = k_interval(2.0, 1.0);
        let s6 = 6f64.sqrt();
        assert!((k1 - (5.0 - 2.0 * s6)).abs() < 1e-14);
        assert!((k2 - (5.0 + 2.0 * s6)).abs() < 1e-14);
        assert!((k1 * k2 - 1.0).abs() < 1e-10);
        assert_eq!(k_interval(2.0, 0.0), (0.0, f64::INFINITY));
    }

    #[test]
    fn cubic_coefficients_reference_case() {
        let c = cubic_coeffs(&params(1.0, 1.0, 2.0, 1.0, 0.0)).unwrap();
        assert_eq!(c, [16.0, 7.0, -24.0, -16.0]);
        let c0 = cubic_coeffs(&params(1.0, 0.0, 2.0, 1.0, 0.0)).unwrap();
        assert_eq!(c0, [0.0, -16.0, -32.0, -16.0]);
        assert!(matches!(cubic_coeffs(&params(1.0, 1.0, 2.0, 0.0, 0.0)), Err(Error::DegenerateCubic(_))));
    }

    #[test]
    fn solves_known_cubics() {
        // (x-1)(x-2)(x-3)
        let r = solve_cubic([1.0, -6.0, 11.0, -6.0]).unwrap();
        let v = r.real_with_multiplicity();
        assert_eq!(v.len(), 3);
        for (a, b) in v.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-13);
        }
        // (x-1)(x-2)²
        let r = solve_cubic([1.0, -5.0, 8.0, -4.0]).unwrap();
        assert_eq!(r.real.len(), 2);
        assert_eq!(r.real[1].multiplicity, 2);
        assert!((r.real[1].value - 2.0).abs() < 1e-7);
        // (x-1)³
        let r = solve_cubic([1.0, -3.0, 3.0, -1.0]).unwrap();
        assert_eq!(r.real.len(), 1);
        assert_eq!(r.real[0].multiplicity, 3);
        // x³ + x + 1: one real root, complex pair
        let r = solve_cubic([1.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(r.real.len(), 1);
        let (re, im) = r.complex_pair.unwrap();
        assert!(im > 0.0);
        assert!((2.0 * re + r.real[0].value).abs() < 1e-12);
    }

    #[test]
    fn critical_rate_branches() {
        assert_eq!(r_critical(&params(1.0, 1.0, 2.0, 0.0, 0.5)).unwrap().r_c, 0.0);
        let tf = r_critical(&params(1.0, 0.0, 2.0, 1.0, 0.5)).unwrap();
        assert_eq!((tf.r_c, tf.branch), (0.0, RcBranch::TaxisFree));
        let one = r_critical(&params(1.0, 1.0, 2.0, 1.0, 0.0)).unwrap();
        assert_eq!(one.branch, RcBranch::SingleRoot);
        assert!((one.r_c - 1.30).abs() < 5e-3);
        let three = r_critical(&params(1.0, 8.0, 1.0, 1.0, 0.0)).unwrap();
        assert_eq!(three.branch, RcBranch::ThreeRoots);
        assert_eq!(three.positive_roots.len(), 3);
        assert_eq!(three.r_c, three.positive_roots[2]);
    }

    #[test]
    fn feasible_interval_reference_case() {
        let p = params(1.0, 1.0, 2.0, 1.0, 0.0);
        let k = feasible_k(2.0, &p).unwrap().unwrap();
        assert!((k.lo - 1.0 / 6.0).abs() < 1e-15);
        assert!((k.hi - (5.0 + 2.0 * 6f64.sqrt())).abs() < 1e-13);
        assert!(k.contains(1.0));
        assert!(matches!(feasible_k(0.0, &p), Err(Error::Regime(_))));
        // just above f, k_min ≈ 0 < k₁
        let k = feasible_k(1e-9, &p).unwrap().unwrap();
        assert_eq!(k.lo, k_interval(1e-9, 1.0).0);
        let k = feasible_k(2.0, &params(1.0, 1.0, 2.0, 0.0, 0.0)).unwrap().unwrap();
        assert!(!k.is_bounded());
    }

    #[test]
    fn default_search_finds_three_roots() {
        let (hit, log) = search_three_root(&SearchBox::default());
        let hit = hit.unwrap();
        assert!(!log.is_empty());
        let [_, r2, r3] = hit.roots;
        assert!(r2 < hit.params.r && hit.params.r < r3);
        assert!(hit.params.r > hit.params.f);
    }

    #[test]
    fn case1_condition() {
        assert!(case1_feasible(2.0, 1.0));
        assert!(!case1_feasible(0.5, 1.0));
        assert!(case1_feasible(0.01, 0.0));
    }
}
