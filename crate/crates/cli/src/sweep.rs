//! One-parameter sweeps, run in parallel with results kept in input order.

use chemorepel::equilibria;
use chemorepel::thresholds;
use rayon::prelude::*;
use serde_json::Value;

use crate::config::{self, RunConfig};
use crate::output::num;
use crate::scenario::{self, RunSummary};
use crate::{CliError, Result};

pub const SWEEP_HEADER: &str = "index,param,value,D,chi,r,a,f,regime,r_c,branch,above_critical_rate,\
k_lo,k_hi,case1_feasible,termination,converged_to,final_linf_u_dev,final_linf_v_dev,\
decay_c,decay_violations,u_variance,error";

/// Worker count from `CHEMO_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var("CHEMO_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

fn label<T: serde::Serialize>(x: &T) -> String {
    match serde_json::to_value(x) {
        Ok(Value::String(s)) => s,
        Ok(v) => v.to_string(),
        Err(_) => String::new(),
    }
}

fn point_config(base: &RunConfig, param: &str, value: f64) -> Result<RunConfig> {
    let mut v = serde_json::to_value(base)?;
    config::set_path(&mut v, param, Value::from(value))?;
    config::run_config(v)
}

fn row(index: usize, param: &str, value: f64, base: &RunConfig, simulate: bool) -> String {
    let mut cells = vec![index.to_string(), param.to_string(), num(Some(value))];
    let cfg = match point_config(base, param, value) {
        Ok(c) => c,
        Err(e) => {
            cells.extend(std::iter::repeat_n(String::new(), 19));
            cells.push(csv_text(&e.to_string()));
            return cells.join(",");
        }
    };
    let p = cfg.sim.params;
    cells.extend([p.d, p.chi, p.r, p.a, p.f].map(|x| num(Some(x))));
    cells.push(label(&equilibria::regime(&p)));
    let mut error = String::new();
    match thresholds::report(&p) {
        Ok(rep) => {
            let (lo, hi) = match rep.feasible_interval {
                Some((lo, hi)) => (Some(lo), Some(hi.unwrap_or(f64::INFINITY))),
                None => (None, None),
            };
            cells.extend([
                num(Some(rep.r_c)),
                label(&rep.branch),
                rep.above_critical_rate.to_string(),
                num(lo),
                num(hi),
                rep.case1_feasible.to_string(),
            ]);
        }
        Err(e) => {
            cells.extend(std::iter::repeat_n(String::new(), 6));
            error = e.to_string();
        }
    }
    let summary: Option<RunSummary> = if simulate {
        match scenario::run_scenario(&cfg, None) {
            Ok(s) => Some(s),
            Err(e) => {
                error = e.to_string();
                None
            }
        }
    } else {
        None
    };
    match &summary {
        Some(s) => cells.extend([
            label(&s.termination),
            s.converged_to.as_ref().map(label).unwrap_or_default(),
            num(Some(s.final_linf_u_dev)),
            num(Some(s.final_linf_v_dev)),
            num(s.constants.map(|c| c.c)),
            s.decay.map(|d| d.violations.to_string()).unwrap_or_default(),
            num(Some(s.u_variance)),
        ]),
        None => cells.extend(std::iter::repeat_n(String::new(), 7)),
    }
    if error.is_empty() {
        if let Some(f) = summary.as_ref().and_then(|s| s.failure.clone()) {
            error = f;
        }
    }
    cells.push(csv_text(&error));
    cells.join(",")
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Runs the sweep in `cfg.sweep` and returns the CSV text. The output does not
/// depend on `threads`.
pub fn run_sweep(cfg: &RunConfig, threads: Option<usize>) -> Result<String> {
    let spec = cfg.sweep.as_ref().ok_or_else(|| CliError::Config("no `sweep` section".into()))?;
    let points = spec.points()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let rows: Vec<String> = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(i, &v)| row(i, &spec.param, v, cfg, spec.simulate))
            .collect()
    });
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    Ok(out)
}
