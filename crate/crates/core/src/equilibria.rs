//! Spatially homogeneous steady states and their local stability labels.

use serde::Serialize;

use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SteadyKind {
    Trivial,
    Coexistence,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyState {
    pub u_val: f64,
    pub v_val: f64,
    pub kind: SteadyKind,
    /// Both components nonnegative.
    pub admissible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// r < f
    Extinction,
    /// r > f
    Coexistence,
    /// r = f
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    NotClassified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub trivial: Stability,
    /// `None` when the coexistence state is not biologically meaningful.
    pub coexistence: Option<Stability>,
}

/// `(u*, v*) = ((r - f)/(r + a), r(f + a)/(r + a))`, whatever its sign.
pub fn coexistence(p: &ModelParams) -> (f64, f64) {
    let s = p.r + p.a;
    ((p.r - p.f) / s, p.r * (p.f + p.a) / s)
}

pub fn homogeneous_steady_states(p: &ModelParams) -> Vec<SteadyState> {
    let (u_val, v_val) = coexistence(p);
    vec![
        SteadyState { u_val: 0.0, v_val: p.f, kind: SteadyKind::Trivial, admissible: true },
        SteadyState {
            u_val,
            v_val,
            kind: SteadyKind::Coexistence,
            admissible: p.r >= p.f,
        },
    ]
}

pub fn regime(p: &ModelParams) -> Regime {
    if p.r < p.f {
        Regime::Extinction
    } else if p.r > p.f {
        Regime::Coexistence
    } else {
        Regime::Degenerate
    }
}

pub fn classify_local_stability(p: &ModelParams) -> RegimeReport {
    match regime(p) {
        Regime::Extinction => RegimeReport {
            regime: Regime::Extinction,
            trivial: Stability::Stable,
            coexistence: None,
        },
        Regime::Coexistence => RegimeReport {
            regime: Regime::Coexistence,
            trivial: Stability::Unstable,
            coexistence: Some(Stability::Stable),
        },
        Regime::Degenerate => RegimeReport {
            regime: Regime::Degenerate,
            trivial: Stability::NotClassified,
            coexistence: Some(Stability::NotClassified),
        },
    }
}

/// The state solutions are expected to approach: `(u*, v*)` when r > f,
/// otherwise `(0, f)`.
pub fn target_state(p: &ModelParams) -> (f64, f64) {
    match regime(p) {
        Regime::Coexistence => coexistence(p),
        Regime::Extinction | Regime::Degenerate => (0.0, p.f),
    }
}
