//! Running one configuration end to end.

use std::path::Path;
use std::time::Instant;

use chemorepel::equilibria::{self, Regime, RegimeReport};
use chemorepel::lyapunov::{self, DecayReport, LyapunovConstants};
use chemorepel::model::{simulate_with, Termination};
use chemorepel::thresholds::{self, RcBranch};
use chemorepel::{ModelParams, State};
use serde::Serialize;

use crate::config::{RunConfig, Scenario};
use crate::output::{self, Snapshot};
use crate::Result;

/// Max-norm distance below which a final state counts as converged.
pub const CONVERGENCE_TOL: f64 = 1e-4;

/// Spatial variance of u above which a steady final state counts as patterned.
pub const PATTERN_VARIANCE: f64 = 1e-4;

/// Decay constants for the regime of `p`, with notes on whatever prevents
/// certification.
pub fn select_constants(p: &ModelParams) -> (Option<LyapunovConstants>, Vec<String>) {
    let mut notes = Vec::new();
    let constants = match equilibria::regime(p) {
        Regime::Extinction => match lyapunov::select_constants_case1(p) {
            Ok(c) => Some(c),
            Err(e) => {
                notes.push(format!("extinction constants unavailable: {e}"));
                None
            }
        },
        Regime::Coexistence => {
            match thresholds::feasible_k(p.r, p).and_then(|k| lyapunov::select_constants_case2(p, k)) {
                Ok(c) => Some(c),
                Err(e) => {
                    notes.push(format!("coexistence constants unavailable: {e}"));
                    None
                }
            }
        }
        Regime::Degenerate => {
            notes.push("r = f: no Lyapunov functional applies".into());
            None
        }
    };
    (constants, notes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergedTo {
    Trivial,
    Coexistence,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub scenario: Scenario,
    pub params: ModelParams,
    pub regime: RegimeReport,
    pub target: (f64, f64),
    pub r_c: Option<f64>,
    pub rc_branch: Option<RcBranch>,
    pub above_critical_rate: Option<bool>,
    pub case1_feasible: Option<bool>,
    pub constants: Option<LyapunovConstants>,
    pub decay: Option<DecayReport>,
    pub notes: Vec<String>,
    pub termination: Termination,
    pub failure: Option<String>,
    pub t_final: f64,
    pub steps: usize,
    pub samples: usize,
    pub final_linf_u_dev: f64,
    pub final_linf_v_dev: f64,
    pub final_l2_u_dev: f64,
    pub final_l2_v_dev: f64,
    pub converged_to: Option<ConvergedTo>,
    pub u_variance: f64,
    /// Pattern scenario only.
    pub patterned: Option<bool>,
    pub v_negative_samples: usize,
    pub wall_clock_s: f64,
}

fn converged_to(state: &State, p: &ModelParams) -> Option<ConvergedTo> {
    let dist = |u: f64, v: f64| state.u.linf_dev(u).max(state.v.linf_dev(v));
    if dist(0.0, p.f) < CONVERGENCE_TOL {
        return Some(ConvergedTo::Trivial);
    }
    let (us, vs) = equilibria::coexistence(p);
    (p.r > p.f && dist(us, vs) < CONVERGENCE_TOL).then_some(ConvergedTo::Coexistence)
}

fn scenario_notes(scenario: Scenario, p: &ModelParams, notes: &mut Vec<String>) {
    let regime = equilibria::regime(p);
    match scenario {
        Scenario::Extinction if regime != Regime::Extinction => {
            notes.push(format!("extinction scenario run with r = {} >= f = {}", p.r, p.f))
        }
        Scenario::Persistence | Scenario::Pattern if regime != Regime::Coexistence => {
            notes.push(format!("{} scenario run with r = {} <= f = {}", scenario.name(), p.r, p.f))
        }
        Scenario::TaxisFree if p.chi != 0.0 => {
            notes.push(format!("taxis-free scenario run with chi = {}", p.chi))
        }
        _ => {}
    }
}

/// Runs `cfg`; when `out` is given writes `config.json`, `trajectory.csv`,
/// `summary.json` and, if enabled, `snapshots.jsonl` there.
///
/// Regime and hypothesis mismatches end up in [`RunSummary::notes`] rather
/// than failing the run.
pub fn run_scenario(cfg: &RunConfig, out: Option<&Path>) -> Result<RunSummary> {
    let started = Instant::now();
    let p = cfg.sim.params;
    let mut notes = Vec::new();
    scenario_notes(cfg.scenario, &p, &mut notes);

    let report = thresholds::report(&p);
    if let Ok(rep) = &report {
        if rep.regime == Regime::Coexistence && !rep.above_critical_rate {
            notes.push(format!("r = {} does not exceed r_c = {}", p.r, rep.r_c));
        }
    }
    let (constants, more) = select_constants(&p);
    notes.extend(more);
    let constants = constants.filter(|_| cfg.lyapunov_enabled);

    let mut eval = constants.map(|c| lyapunov::probe(c.case, p, c.k));
    let mut snaps = Vec::new();
    let mut calls = 0usize;
    let keep_snaps = cfg.snapshot_every > 0 && out.is_some();
    let tr = simulate_with(&cfg.sim, |s: &State| {
        if keep_snaps && calls.is_multiple_of(cfg.snapshot_every) {
            snaps.push(Snapshot { t: s.t, u: s.u.values().to_vec(), v: s.v.values().to_vec() });
        }
        calls += 1;
        eval.as_mut().and_then(|f| f(s))
    })?;

    let decay = constants.map(|c| lyapunov::monitor_decay(&tr.samples, &c));
    let fs = &tr.final_state;
    let u_variance = fs.u.variance();
    let summary = RunSummary {
        scenario: cfg.scenario,
        params: p,
        regime: equilibria::classify_local_stability(&p),
        target: tr.target,
        r_c: report.as_ref().ok().map(|r| r.r_c),
        rc_branch: report.as_ref().ok().map(|r| r.branch),
        above_critical_rate: report.as_ref().ok().map(|r| r.above_critical_rate),
        case1_feasible: report.as_ref().ok().map(|r| r.case1_feasible),
        constants,
        decay,
        notes,
        termination: tr.termination,
        failure: tr.failure.as_ref().map(|e| e.to_string()),
        t_final: fs.t,
        steps: tr.steps,
        samples: tr.samples.len(),
        final_linf_u_dev: fs.u.linf_dev(tr.target.0),
        final_linf_v_dev: fs.v.linf_dev(tr.target.1),
        final_l2_u_dev: fs.u.l2_dev(tr.target.0),
        final_l2_v_dev: fs.v.l2_dev(tr.target.1),
        converged_to: converged_to(fs, &p),
        u_variance,
        patterned: (cfg.scenario == Scenario::Pattern)
            .then_some(u_variance > PATTERN_VARIANCE && tr.termination == Termination::Steady),
        v_negative_samples: tr.v_negative_samples,
        wall_clock_s: started.elapsed().as_secs_f64(),
    };

    if let Some(dir) = out {
        output::ensure_dir(dir)?;
        output::write_json(&dir.join("config.json"), cfg)?;
        output::write_text(&dir.join("trajectory.csv"), &output::trajectory_csv(&tr.samples))?;
        if keep_snaps {
            output::write_text(&dir.join("snapshots.jsonl"), &output::snapshots_jsonl(&snaps)?)?;
        }
        output::write_json(&dir.join("summary.json"), &summary)?;
    }
    Ok(summary)
}

