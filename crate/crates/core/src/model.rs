//! The PDE system with constant supply, its explicit time integrator and the
//! simulation driver.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::equilibria;
use crate::error::{Error, Result};
use crate::grid::{self, Field, Grid};

/// Entries of u in `[-NEG_TOL, 0)` are rounding noise and get clamped to zero.
pub const NEG_TOL: f64 = 1e-12;

/// Any |u| or |v| above this is treated as blow-up.
pub const BLOW_UP_LIMIT: f64 = 1e12;

const CFL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Cell diffusion coefficient.
    #[serde(rename = "D")]
    pub d: f64,
    /// Chemorepulsive sensitivity.
    pub chi: f64,
    /// Logistic growth rate.
    pub r: f64,
    /// Self-production rate of the chemical.
    pub a: f64,
    /// Constant external supply.
    pub f: f64,
}

impl ModelParams {
    pub fn new(d: f64, chi: f64, r: f64, a: f64, f: f64) -> Result<Self> {
        let p = Self { d, chi, r, a, f };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.d, self.chi, self.r, self.a, self.f];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams(format!("non-finite parameter in {self:?}")));
        }
        if self.d <= 0.0 || self.r <= 0.0 {
            return Err(Error::InvalidParams(format!("D and r must be positive: {self:?}")));
        }
        if self.chi < 0.0 || self.a < 0.0 || self.f < 0.0 {
            return Err(Error::InvalidParams(format!("chi, a, f must be nonnegative: {self:?}")));
        }
        Ok(())
    }
}

/// Discrete (u, v) at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: Field,
    pub v: Field,
    pub t: f64,
}

impl State {
    /// Clamps u entries in `[-NEG_TOL, 0)` to zero; anything more negative is
    /// rejected.
    pub fn new(u: Field, v: Field, t: f64) -> Result<Self> {
        if u.grid() != v.grid() {
            return Err(Error::Shape("u and v live on different grids".into()));
        }
        let grid = *u.grid();
        let min_u = u.min();
        if min_u < -NEG_TOL {
            return Err(Error::Negativity { t, min_u });
        }
        let u = if min_u < 0.0 {
            Field::from_raw(grid, u.into_values().into_iter().map(|x| x.max(0.0)).collect())
        } else {
            u
        };
        Ok(Self { u, v, t })
    }

    pub fn constant(grid: Grid, u: f64, v: f64) -> Result<Self> {
        Self::new(Field::constant(grid, u), Field::constant(grid, v), 0.0)
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }
}

/// Right-hand side of the system evaluated on `state`.
pub fn rhs(state: &State, params: &ModelParams) -> Result<(Field, Field)> {
    let g = *state.grid();
    let mut du = vec![0.0; g.len()];
    let mut dv = vec![0.0; g.len()];
    let mut scratch = vec![0.0; g.len()];
    rhs_into(&g, params, state.u.values(), state.v.values(), &mut du, &mut dv, &mut scratch);
    if du.iter().chain(dv.iter()).any(|x| !x.is_finite()) {
        return Err(Error::BlowUp { t: state.t });
    }
    Ok((Field::from_raw(g, du), Field::from_raw(g, dv)))
}

fn rhs_into(
    g: &Grid,
    p: &ModelParams,
    u: &[f64],
    v: &[f64],
    du: &mut [f64],
    dv: &mut [f64],
    scratch: &mut [f64],
) {
    grid::laplacian_into(g, u, du);
    grid::chemotaxis_into(g, u, v, p.chi, scratch);
    for i in 0..u.len() {
        du[i] = p.d * du[i] + scratch[i] + p.r * u[i] * (1.0 - u[i]) - u[i] * v[i];
    }
    grid::laplacian_into(g, v, dv);
    for i in 0..u.len() {
        dv[i] += p.a * u[i] - v[i] + p.f;
    }
}

/// Largest admissible explicit step: `cfl_safety · h_min² / (2·dim·max(D, 1))`.
pub fn cfl_bound(grid: &Grid, params: &ModelParams, cfl_safety: f64) -> f64 {
    let h = grid.h_min();
    cfl_safety * h * h / (2.0 * grid.dim() as f64 * params.d.max(1.0) + CFL_EPS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Rk4,
    /// Single-stage explicit Euler; kept for hand-checkable tests.
    ForwardEuler,
}

/// Explicit integrator with preallocated stage buffers.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: Grid,
    params: ModelParams,
    scheme: Scheme,
    cfl_safety: f64,
    k: [Vec<f64>; 8],
    tmp_u: Vec<f64>,
    tmp_v: Vec<f64>,
    scratch: Vec<f64>,
}

impl Stepper {
    pub fn new(grid: Grid, params: ModelParams, scheme: Scheme, cfl_safety: f64) -> Result<Self> {
        params.validate()?;
        if !(cfl_safety > 0.0 && cfl_safety < 1.0) {
            return Err(Error::Config(format!("cfl_safety = {cfl_safety} not in (0, 1)")));
        }
        let n = grid.len();
        Ok(Self {
            grid,
            params,
            scheme,
            cfl_safety,
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp_u: vec![0.0; n],
            tmp_v: vec![0.0; n],
            scratch: vec![0.0; n],
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn dt_max(&self) -> f64 {
        cfl_bound(&self.grid, &self.params, self.cfl_safety)
    }

    pub fn step(&mut self, state: &State, dt: f64) -> Result<State> {
        self.step_reporting(state, dt).map(|(s, _)| s)
    }

    /// Advances by `dt` and also returns `max(‖du‖∞, ‖dv‖∞)` at the
    /// starting state, which the first stage computes anyway.
    pub fn step_reporting(&mut self, state: &State, dt: f64) -> Result<(State, f64)> {
        if state.grid() != &self.grid {
            return Err(Error::Shape("state grid differs from stepper grid".into()));
        }
        let bound = self.dt_max();
        if !(dt > 0.0) || dt > bound * (1.0 + 1e-12) {
            return Err(Error::Cfl { dt, bound });
        }
        let n = self.grid.len();
        let u0 = state.u.values();
        let v0 = state.v.values();
        let g = self.grid;
        let p = self.params;
        let [k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v] = &mut self.k;

        rhs_into(&g, &p, u0, v0, k1u, k1v, &mut self.scratch);
        let residual = linf(k1u).max(linf(k1v));

        let mut u1 = vec![0.0; n];
        let mut v1 = vec![0.0; n];
        match self.scheme {
            Scheme::ForwardEuler => {
                for i in 0..n {
                    u1[i] = u0[i] + dt * k1u[i];
                    v1[i] = v0[i] + dt * k1v[i];
                }
            }
            Scheme::Rk4 => {
                let (tu, tv) = (&mut self.tmp_u, &mut self.tmp_v);
                for i in 0..n {
                    tu[i] = u0[i] + 0.5 * dt * k1u[i];
                    tv[i] = v0[i] + 0.5 * dt * k1v[i];
                }
                rhs_into(&g, &p, tu, tv, k2u, k2v, &mut self.scratch);
                for i in 0..n {
                    tu[i] = u0[i] + 0.5 * dt * k2u[i];
                    tv[i] = v0[i] + 0.5 * dt * k2v[i];
                }
                rhs_into(&g, &p, tu, tv, k3u, k3v, &mut self.scratch);
                for i in 0..n {
                    tu[i] = u0[i] + dt * k3u[i];
                    tv[i] = v0[i] + dt * k3v[i];
                }
                rhs_into(&g, &p, tu, tv, k4u, k4v, &mut self.scratch);
                let w = dt / 6.0;
                for i in 0..n {
                    u1[i] = u0[i] + w * (k1u[i] + 2.0 * (k2u[i] + k3u[i]) + k4u[i]);
                    v1[i] = v0[i] + w * (k1v[i] + 2.0 * (k2v[i] + k3v[i]) + k4v[i]);
                }
            }
        }

        let t1 = state.t + dt;
        let too_big = |x: &f64| !x.is_finite() || x.abs() > BLOW_UP_LIMIT;
        if !residual.is_finite() || u1.iter().any(too_big) || v1.iter().any(too_big) {
            return Err(Error::BlowUp { t: t1 });
        }
        let next = State::new(Field::from_raw(g, u1), Field::from_raw(g, v1), t1)?;
        Ok((next, residual))
    }

    /// Fixed steps of `dt_max` (last one shortened) until `t_target`.
    pub fn advance_to(&mut self, state: &State, t_target: f64) -> Result<State> {
        let dt_max = self.dt_max();
        let mut s = state.clone();
        while s.t < t_target {
            let remaining = t_target - s.t;
            let dt = if remaining <= dt_max * (1.0 + 1e-9) { remaining } else { dt_max };
            let dt = dt.min(dt_max);
            s = self.step(&s, dt)?;
            if t_target - s.t < 1e-12 * t_target.max(1.0) {
                s.t = t_target;
            }
        }
        Ok(s)
    }
}

fn linf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, &y| m.max(y.abs()))
}

/// A profile level, either a number or the value of a named homogeneous
/// quantity resolved from the parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Level {
    Value(f64),
    Named(NamedLevel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedLevel {
    /// Coexistence density (r - f)/(r + a).
    UStar,
    /// Coexistence concentration r (f + a)/(r + a).
    VStar,
    /// The supply level f.
    Supply,
}

impl Level {
    pub fn resolve(&self, params: &ModelParams) -> f64 {
        match self {
            Level::Value(x) => *x,
            Level::Named(NamedLevel::UStar) => equilibria::coexistence(params).0,
            Level::Named(NamedLevel::VStar) => equilibria::coexistence(params).1,
            Level::Named(NamedLevel::Supply) => params.f,
        }
    }
}

/// Initial profile of one component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant {
        value: Level,
    },
    /// `base + amplitude·cos(mπx/L_x)·cos(pπy/L_y)`; satisfies zero flux exactly.
    CosinePerturbation {
        base: Level,
        amplitude: f64,
        /// Amplitude is a fraction of `base`.
        #[serde(default)]
        relative: bool,
        m: u32,
        #[serde(default)]
        p: u32,
    },
    /// `base + U(-amplitude, amplitude)` per cell.
    RandomPerturbation {
        base: Level,
        amplitude: f64,
        #[serde(default)]
        relative: bool,
        /// Overrides the run seed when set.
        #[serde(default)]
        seed: Option<u64>,
    },
}

impl Profile {
    pub fn sample(&self, grid: &Grid, params: &ModelParams, seed: u64) -> Result<Field> {
        match *self {
            Profile::Constant { value } => Ok(Field::constant(*grid, value.resolve(params))),
            Profile::CosinePerturbation { base, amplitude, relative, m, p } => {
                let b = base.resolve(params);
                let amp = if relative { amplitude * b } else { amplitude };
                let (lx, ly) = (grid.l_x(), grid.l_y());
                let two_d = grid.dim() == 2;
                Field::from_fn(*grid, |x, y| {
                    let cy = if two_d { (p as f64 * PI * y / ly).cos() } else { 1.0 };
                    b + amp * (m as f64 * PI * x / lx).cos() * cy
                })
            }
            Profile::RandomPerturbation { base, amplitude, relative, seed: own } => {
                let b = base.resolve(params);
                let amp = if relative { amplitude * b } else { amplitude };
                let mut rng = ChaCha8Rng::seed_from_u64(own.unwrap_or(seed));
                let values = (0..grid.len())
                    .map(|_| if amp > 0.0 { b + rng.random_range(-amp..amp) } else { b })
                    .collect();
                Field::new(*grid, values)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    pub u: Profile,
    pub v: Profile,
}

/// Seed offset for the v stream so that u and v perturbations differ.
const V_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

impl InitialCondition {
    pub fn build(&self, grid: &Grid, params: &ModelParams, seed: u64) -> Result<State> {
        let u = self.u.sample(grid, params, seed)?;
        let v = self.v.sample(grid, params, seed ^ V_STREAM)?;
        State::new(u, v, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub n_x: usize,
    #[serde(default = "one_cell")]
    pub n_y: usize,
    pub l_x: f64,
    #[serde(default = "unit")]
    pub l_y: f64,
}

fn one_cell() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

impl GridSpec {
    pub fn line(n_x: usize, l_x: f64) -> Self {
        Self { dim: 1, n_x, n_y: 1, l_x, l_y: 1.0 }
    }

    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.dim, self.n_x, self.n_y, self.l_x, self.l_y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: ModelParams,
    pub grid: GridSpec,
    pub initial: InitialCondition,
    pub dt_init: f64,
    pub t_end: f64,
    pub cfl_safety: f64,
    pub steady_tol: f64,
    /// Steps between monitor samples.
    pub monitor_every: usize,
    #[serde(default)]
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.grid.build()?;
        if !(self.t_end > 0.0) {
            return Err(Error::Config(format!("t_end = {} must be positive", self.t_end)));
        }
        if !(self.steady_tol > 0.0) {
            return Err(Error::Config(format!("steady_tol = {} must be positive", self.steady_tol)));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety < 1.0) {
            return Err(Error::Config(format!("cfl_safety = {} not in (0, 1)", self.cfl_safety)));
        }
        if !(self.dt_init > 0.0) {
            return Err(Error::Config(format!("dt_init = {} must be positive", self.dt_init)));
        }
        if self.monitor_every == 0 {
            return Err(Error::Config("monitor_every must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Steady,
    TEnd,
    BlowUp,
    Negativity,
}

/// One monitor record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub linf_u_dev: f64,
    pub linf_v_dev: f64,
    pub l2_u_dev: f64,
    pub l2_v_dev: f64,
    pub mass_u: f64,
    pub min_u: f64,
    /// (E, F) from the probe; `None` when disabled or undefined.
    pub lyapunov: Option<(f64, f64)>,
}

impl Sample {
    fn take(state: &State, target: (f64, f64), lyapunov: Option<(f64, f64)>) -> Self {
        Self {
            t: state.t,
            linf_u_dev: state.u.linf_dev(target.0),
            linf_v_dev: state.v.linf_dev(target.1),
            l2_u_dev: state.u.l2_dev(target.0),
            l2_v_dev: state.v.l2_dev(target.1),
            mass_u: grid::integrate_raw(state.grid(), state.u.values()),
            min_u: state.u.min(),
            lyapunov,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub termination: Termination,
    /// The error that ended the run, for blow-up and negativity.
    pub failure: Option<Error>,
    pub final_state: State,
    /// Homogeneous state the deviation monitors are measured against.
    pub target: (f64, f64),
    pub steps: usize,
    /// Samples at which min v < 0 (warning only).
    pub v_negative_samples: usize,
}

/// Runs without Lyapunov probing.
pub fn simulate(config: &SimConfig) -> Result<Trajectory> {
    simulate_with(config, |_| None)
}

/// Runs the simulation; `probe` is evaluated at every monitor sample.
///
/// Only configuration problems are returned as `Err`. Failures during the run
/// end it early and are reported through [`Trajectory::termination`] and
/// [`Trajectory::failure`] together with everything sampled so far.
pub fn simulate_with<P>(config: &SimConfig, mut probe: P) -> Result<Trajectory>
where
    P: FnMut(&State) -> Option<(f64, f64)>,
{
    config.validate()?;
    let grid = config.grid.build()?;
    let params = config.params;
    let target = equilibria::target_state(&params);
    let mut stepper = Stepper::new(grid, params, Scheme::Rk4, config.cfl_safety)?;
    let dt_max = stepper.dt_max();
    let dt_floor = dt_max * 1e-6;

    let mut state = config.initial.build(&grid, &params, config.seed)?;
    let mut samples = Vec::new();
    let mut v_negative_samples = 0;
    let mut record = |s: &State, samples: &mut Vec<Sample>| {
        if s.v.min() < 0.0 {
            v_negative_samples += 1;
        }
        samples.push(Sample::take(s, target, probe(s)));
    };
    record(&state, &mut samples);

    let mut dt = config.dt_init.min(dt_max);
    let mut steps = 0usize;
    let mut failure = None;
    let termination = loop {
        if state.t >= config.t_end {
            break Termination::TEnd;
        }
        let remaining = config.t_end - state.t;
        let this_dt = dt.min(remaining);
        match stepper.step_reporting(&state, this_dt) {
            Ok((_, residual)) if residual < config.steady_tol => break Termination::Steady,
            Ok((next, _)) => {
                state = next;
                if config.t_end - state.t <= 1e-12 * config.t_end {
                    state.t = config.t_end;
                }
                steps += 1;
                dt = (dt * 1.1).min(dt_max);
                if steps.is_multiple_of(config.monitor_every) {
                    record(&state, &mut samples);
                }
            }
            Err(Error::Negativity { .. }) if this_dt * 0.5 >= dt_floor => {
                dt = this_dt * 0.5;
            }
            Err(e @ Error::Negativity { .. }) => {
                failure = Some(e);
                break Termination::Negativity;
            }
            Err(e) => {
                failure = Some(e);
                break Termination::BlowUp;
            }
        }
    };
    if samples.last().is_none_or(|s| s.t < state.t) {
        record(&state, &mut samples);
    }

    Ok(Trajectory {
        samples,
        termination,
        failure,
        final_state: state,
        target,
        steps,
        v_negative_samples,
    })
}
