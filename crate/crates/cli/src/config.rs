//! Run configuration: built-in scenario presets, JSON config files and
//! `--set key=value` overrides, merged in that order.

use std::path::Path;

use chemorepel::model::{GridSpec, InitialCondition, Level, NamedLevel, Profile, SimConfig};
use chemorepel::thresholds::{search_three_root, SearchBox};
use chemorepel::ModelParams;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::{io_err, CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// f > r: cells die out.
    Extinction,
    /// r > f with r above the critical rate.
    Persistence,
    /// χ = 0.
    TaxisFree,
    /// Three-root parameters with a random perturbation of (u*, v*).
    Pattern,
    /// Everything supplied by the user.
    #[default]
    Custom,
}

impl Scenario {
    pub const ALL: [Scenario; 4] =
        [Scenario::Extinction, Scenario::Persistence, Scenario::TaxisFree, Scenario::Pattern];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Extinction => "extinction",
            Scenario::Persistence => "persistence",
            Scenario::TaxisFree => "taxis_free",
            Scenario::Pattern => "pattern",
            Scenario::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        serde_json::from_value(Value::String(norm))
            .map_err(|_| CliError::Config(format!("unknown scenario '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Parameter name (`D`, `chi`, `r`, `a`, `f`) or any dotted config path.
    pub param: String,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
    #[serde(default)]
    pub count: Option<usize>,
    /// Run the PDE at every point, not only the threshold analysis.
    #[serde(default = "yes")]
    pub simulate: bool,
}

impl SweepSpec {
    pub fn points(&self) -> Result<Vec<f64>> {
        if let Some(v) = &self.values {
            return Ok(v.clone());
        }
        match (self.min, self.max, self.count) {
            (Some(lo), Some(hi), Some(n)) if n >= 2 => {
                Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
            }
            (Some(lo), _, Some(1)) => Ok(vec![lo]),
            _ => Err(CliError::Config("sweep needs `values` or `min`, `max` and `count`".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub scenario: Scenario,
    #[serde(flatten)]
    pub sim: SimConfig,
    #[serde(default = "yes")]
    pub lyapunov_enabled: bool,
    /// Write the full state every this many monitor samples (0 disables).
    #[serde(default)]
    pub snapshot_every: usize,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

fn yes() -> bool {
    true
}

fn base_sim(params: ModelParams, grid: GridSpec, initial: InitialCondition, t_end: f64) -> SimConfig {
    SimConfig {
        params,
        grid,
        initial,
        dt_init: 1e-4,
        t_end,
        cfl_safety: 0.9,
        steady_tol: 1e-9,
        monitor_every: 100,
        seed: 0,
    }
}

fn named(l: NamedLevel) -> Level {
    Level::Named(l)
}

/// The built-in configuration for `scenario`; `Custom` has none.
pub fn preset(scenario: Scenario) -> Result<Option<RunConfig>> {
    let line = GridSpec::line(128, 1.0);
    let sim = match scenario {
        Scenario::Custom => return Ok(None),
        Scenario::Extinction => base_sim(
            ModelParams::new(1.0, 1.0, 1.0, 0.5, 2.0)?,
            line,
            InitialCondition {
                u: Profile::CosinePerturbation {
                    base: Level::Value(0.5),
                    amplitude: 0.1,
                    relative: false,
                    m: 2,
                    p: 0,
                },
                v: Profile::Constant { value: named(NamedLevel::Supply) },
            },
            50.0,
        ),
        Scenario::Persistence => base_sim(
            ModelParams::new(1.0, 1.0, 2.0, 1.0, 0.0)?,
            line,
            InitialCondition {
                u: Profile::CosinePerturbation {
                    base: named(NamedLevel::UStar),
                    amplitude: 0.1,
                    relative: true,
                    m: 1,
                    p: 0,
                },
                v: Profile::Constant { value: named(NamedLevel::VStar) },
            },
            100.0,
        ),
        Scenario::TaxisFree => base_sim(
            ModelParams::new(1.0, 0.0, 2.0, 1.0, 0.5)?,
            line,
            InitialCondition {
                u: Profile::CosinePerturbation {
                    base: named(NamedLevel::UStar),
                    amplitude: 0.1,
                    relative: true,
                    m: 1,
                    p: 0,
                },
                v: Profile::Constant { value: named(NamedLevel::VStar) },
            },
            50.0,
        ),
        Scenario::Pattern => {
            let (hit, _) = search_three_root(&SearchBox::default());
            let hit = hit.ok_or_else(|| {
                CliError::Config("no three-root parameters in the default search box".into())
            })?;
            let mut sim = base_sim(
                hit.params,
                line,
                InitialCondition {
                    u: Profile::RandomPerturbation {
                        base: named(NamedLevel::UStar),
                        amplitude: 0.1,
                        relative: true,
                        seed: None,
                    },
                    v: Profile::RandomPerturbation {
                        base: named(NamedLevel::VStar),
                        amplitude: 0.1,
                        relative: true,
                        seed: None,
                    },
                },
                200.0,
            );
            sim.seed = 7;
            sim
        }
    };
    Ok(Some(RunConfig { scenario, sim, lyapunov_enabled: true, snapshot_every: 0, sweep: None }))
}

/// Short names accepted by `--set` for the model parameters.
fn expand_key(key: &str) -> String {
    match key {
        "D" | "chi" | "r" | "a" | "f" => format!("params.{key}"),
        _ => key.to_string(),
    }
}

/// Sets a dotted path inside `root`, creating objects as needed.
pub fn set_path(root: &mut Value, key: &str, value: Value) -> Result<()> {
    let key = expand_key(key);
    let mut cur = root;
    let mut parts = key.split('.').peekable();
    while let Some(part) = parts.next() {
        if part.is_empty() {
            return Err(CliError::Config(format!("bad key '{key}'")));
        }
        let obj = match cur {
            Value::Object(m) => m,
            other => {
                *other = Value::Object(Map::new());
                other.as_object_mut().expect("just replaced")
            }
        };
        if parts.peek().is_none() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    Ok(())
}

/// Parses `key=value`; the value is read as JSON and falls back to a string.
pub fn parse_assignment(s: &str) -> Result<(String, Value)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("expected key=value, got '{s}'")))?;
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.trim().to_string(), value))
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

/// Command-line inputs that shape a configuration.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub scenario: Option<String>,
    pub config: Option<std::path::PathBuf>,
    pub set: Vec<String>,
    pub seed: Option<u64>,
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Ok(serde_json::from_str(&text)?)
}

/// Merges preset, file and overrides into a raw JSON value.
pub fn resolve_value(o: &Overrides) -> Result<Value> {
    let file = o.config.as_deref().map(read_json).transpose()?;
    let scenario = match (&o.scenario, file.as_ref().and_then(|f| f.get("scenario"))) {
        (Some(s), _) => Scenario::parse(s)?,
        (None, Some(Value::String(s))) => Scenario::parse(s)?,
        (None, Some(other)) => return Err(CliError::Config(format!("bad scenario {other}"))),
        (None, None) => Scenario::Custom,
    };
    let mut value = match preset(scenario)? {
        Some(cfg) => serde_json::to_value(cfg)?,
        None => Value::Object(Map::new()),
    };
    if let Some(f) = file {
        merge(&mut value, f);
    }
    for s in &o.set {
        let (k, v) = parse_assignment(s)?;
        set_path(&mut value, &k, v)?;
    }
    if let Some(seed) = o.seed {
        set_path(&mut value, "seed", Value::from(seed))?;
    }
    set_path(&mut value, "scenario", Value::String(scenario.name().into()))?;
    Ok(value)
}

pub fn run_config(value: Value) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_value(value)
        .map_err(|e| CliError::Config(format!("incomplete or invalid configuration: {e}")))?;
    cfg.sim.validate()?;
    Ok(cfg)
}

/// Model parameters only, for commands that do not simulate.
pub fn params(value: &Value) -> Result<ModelParams> {
    let p = value
        .get("params")
        .ok_or_else(|| CliError::Config("missing params (use --set D=.. --set chi=.. ...)".into()))?;
    let p: ModelParams = serde_json::from_value(p.clone())
        .map_err(|e| CliError::Config(format!("invalid params: {e}")))?;
    p.validate()?;
    Ok(p)
}
