//! Re-evaluating the Lyapunov functionals on the snapshots of a finished run.

use std::path::Path;

use chemorepel::equilibria;
use chemorepel::lyapunov::{self, DecayReport, LyapunovConstants};
use chemorepel::model::Sample;
use chemorepel::{grid, Field, State};
use serde::Serialize;

use crate::config::{self, RunConfig};
use crate::output;
use crate::scenario::select_constants;
use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub t: f64,
    pub e: Option<f64>,
    pub f: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub constants: Option<LyapunovConstants>,
    pub notes: Vec<String>,
    pub snapshots: usize,
    pub decay: Option<DecayReport>,
    pub rows: Vec<CheckRow>,
}

/// Reads `config.json` and `snapshots.jsonl` from `run_dir`.
pub fn lyapunov_check(run_dir: &Path) -> Result<CheckReport> {
    let cfg: RunConfig = config::run_config(config::read_json(&run_dir.join("config.json"))?)?;
    let snaps = output::read_snapshots(&run_dir.join("snapshots.jsonl"))?;
    let grid = cfg.sim.grid.build()?;
    let p = cfg.sim.params;
    let target = equilibria::target_state(&p);
    let (constants, notes) = select_constants(&p);

    let mut samples = Vec::with_capacity(snaps.len());
    for s in snaps {
        let u = Field::new(grid, s.u)?;
        let v = Field::new(grid, s.v)?;
        let state = State::new(u, v, s.t)
            .map_err(|e| CliError::Config(format!("snapshot at t = {}: {e}", s.t)))?;
        samples.push(Sample {
            t: state.t,
            linf_u_dev: state.u.linf_dev(target.0),
            linf_v_dev: state.v.linf_dev(target.1),
            l2_u_dev: state.u.l2_dev(target.0),
            l2_v_dev: state.v.l2_dev(target.1),
            mass_u: grid::integrate(&state.u)?,
            min_u: state.u.min(),
            lyapunov: constants.and_then(|c| lyapunov::evaluate(c.case, &state, &p, c.k).ok()),
        });
    }
    let decay = constants.map(|c| lyapunov::monitor_decay(&samples, &c));
    let rows = samples
        .iter()
        .map(|s| CheckRow { t: s.t, e: s.lyapunov.map(|l| l.0), f: s.lyapunov.map(|l| l.1) })
        .collect();
    Ok(CheckReport { constants, notes, snapshots: samples.len(), decay, rows })
}
