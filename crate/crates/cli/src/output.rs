//! File formats: trajectory CSV, JSON documents and state snapshots.

use std::fmt::Write as _;
use std::path::Path;

use chemorepel::model::Sample;
use serde::{Deserialize, Serialize};

use crate::{io_err, Result};

pub const TRAJECTORY_HEADER: &str =
    "t,linf_u_dev,linf_v_dev,l2_u_dev,l2_v_dev,mass_u,min_u,E,F,dE_dt_estimate";

/// Shortest round-trip representation, or an empty cell.
pub fn num(x: Option<f64>) -> String {
    match x {
        Some(x) => format!("{x:e}"),
        None => String::new(),
    }
}

/// Forward differences of E, backward at the last sample.
fn de_dt(samples: &[Sample]) -> Vec<Option<f64>> {
    let e = |i: usize| samples[i].lyapunov.map(|l| l.0);
    let n = samples.len();
    (0..n)
        .map(|i| {
            let (a, b) = if i + 1 < n { (i, i + 1) } else if i > 0 { (i - 1, i) } else { return None };
            let dt = samples[b].t - samples[a].t;
            match (e(a), e(b)) {
                (Some(ea), Some(eb)) if dt > 0.0 => Some((eb - ea) / dt),
                _ => None,
            }
        })
        .collect()
}

pub fn trajectory_csv(samples: &[Sample]) -> String {
    let mut out = String::with_capacity(64 * (samples.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for (s, d) in samples.iter().zip(de_dt(samples)) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            num(Some(s.t)),
            num(Some(s.linf_u_dev)),
            num(Some(s.linf_v_dev)),
            num(Some(s.l2_u_dev)),
            num(Some(s.l2_v_dev)),
            num(Some(s.mass_u)),
            num(Some(s.min_u)),
            num(s.lyapunov.map(|l| l.0)),
            num(s.lyapunov.map(|l| l.1)),
            num(d),
        );
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(io_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))
}

/// One line of `snapshots.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

pub fn snapshots_jsonl(snaps: &[Snapshot]) -> Result<String> {
    let mut out = String::new();
    for s in snaps {
        out.push_str(&serde_json::to_string(s)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn read_snapshots(path: &Path) -> Result<Vec<Snapshot>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(t: f64, e: Option<f64>) -> Sample {
        Sample {
            t,
            linf_u_dev: 0.0,
            linf_v_dev: 0.0,
            l2_u_dev: 0.0,
            l2_v_dev: 0.0,
            mass_u: 1.0,
            min_u: 0.5,
            lyapunov: e.map(|e| (e, 1.0)),
        }
    }

    #[test]
    fn csv_layout_and_differences() {
        let csv = trajectory_csv(&[sample(0.0, Some(2.0)), sample(0.5, Some(1.0)), sample(1.0, None)]);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], TRAJECTORY_HEADER);
        assert_eq!(lines.len(), 4);
        assert!(lines[1].ends_with(",2e0,1e0,-2e0"));
        assert!(lines[2].ends_with(",1e0,1e0,"));
        assert!(lines[3].ends_with(",,,"));
    }
}
