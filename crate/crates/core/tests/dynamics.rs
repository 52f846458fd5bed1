mod common;

use chemorepel::equilibria;
use chemorepel::model::{
    simulate, GridSpec, InitialCondition, Level, Profile, Scheme, SimConfig, State, Stepper,
    Termination,
};
use chemorepel::{Grid, ModelParams};

fn a1_params() -> ModelParams {
    ModelParams::new(1.0, 1.0, 1.0, 0.5, 2.0).unwrap()
}

fn a2_params() -> ModelParams {
    ModelParams::new(1.0, 1.0, 2.0, 1.0, 0.0).unwrap()
}

fn constant(x: f64) -> Profile {
    Profile::Constant { value: Level::Value(x) }
}

#[test]
fn homogeneous_data_tracks_the_ode_reduction() {
    for p in [a1_params(), a2_params()] {
        let g = Grid::new_1d(16, 1.0).unwrap();
        let mut st = Stepper::new(g, p, Scheme::Rk4, 0.9).unwrap();
        let mut s = State::constant(g, 0.7, 0.3).unwrap();
        for t in [0.5, 1.0, 2.5, 5.0, 7.5, 10.0] {
            s = st.advance_to(&s, t).unwrap();
            assert_eq!(s.t, t);
            assert!(s.u.max() - s.u.min() < 1e-10);
            assert!(s.v.max() - s.v.min() < 1e-10);
            let (uo, vo) = common::ode_reduction(&p, 0.7, 0.3, t);
            assert!((s.u.mean() - uo).abs() < 1e-6, "{p:?} t={t}: {} vs {uo}", s.u.mean());
            assert!((s.v.mean() - vo).abs() < 1e-6, "{p:?} t={t}: {} vs {vo}", s.v.mean());
        }
    }
}

#[test]
fn ode_oracle_matches_closed_form_logistic() {
    // a = 0, f = 0, v0 = 0: v stays 0 and u is logistic.
    let p = ModelParams::new(1.0, 0.0, 1.5, 0.0, 0.0).unwrap();
    let (u, v) = common::ode_reduction(&p, 0.1, 0.0, 3.0);
    let exact = 1.0 / (1.0 + 9.0 * (-1.5f64 * 3.0).exp());
    assert!((u - exact).abs() < 1e-12 && v == 0.0);
}

#[test]
fn starting_at_trivial_state_is_steady_immediately() {
    let p = a1_params();
    let cfg = SimConfig {
        params: p,
        grid: GridSpec::line(32, 1.0),
        initial: InitialCondition { u: constant(0.0), v: constant(p.f) },
        dt_init: 1e-3,
        t_end: 10.0,
        cfl_safety: 0.9,
        steady_tol: 1e-10,
        monitor_every: 10,
        seed: 0,
    };
    let tr = simulate(&cfg).unwrap();
    assert_eq!(tr.termination, Termination::Steady);
    assert_eq!(tr.steps, 0);
    assert_eq!(tr.samples.len(), 1);
}

#[test]
fn short_run_hits_t_end_with_increasing_sample_times() {
    let p = a2_params();
    let cfg = SimConfig {
        params: p,
        grid: GridSpec { dim: 2, n_x: 12, n_y: 10, l_x: 1.0, l_y: 1.0 },
        initial: InitialCondition {
            u: Profile::RandomPerturbation {
                base: Level::Value(0.5),
                amplitude: 0.1,
                relative: false,
                seed: None,
            },
            v: constant(0.5),
        },
        dt_init: 1.0,
        t_end: 0.3,
        cfl_safety: 0.9,
        steady_tol: 1e-12,
        monitor_every: 7,
        seed: 11,
    };
    let tr = simulate(&cfg).unwrap();
    assert_eq!(tr.termination, Termination::TEnd);
    assert_eq!(tr.final_state.t, 0.3);
    assert!(tr.samples.windows(2).all(|w| w[0].t < w[1].t));
    assert!(tr.samples.iter().all(|s| s.min_u >= -1e-12));
    assert_eq!(tr.target, equilibria::coexistence(&p));
    assert_eq!(tr.samples.last().unwrap().t, 0.3);
}

#[test]
fn bad_config_is_rejected() {
    let p = a2_params();
    let mut cfg = SimConfig {
        params: p,
        grid: GridSpec::line(16, 1.0),
        initial: InitialCondition { u: constant(0.5), v: constant(0.5) },
        dt_init: 1e-3,
        t_end: 1.0,
        cfl_safety: 0.9,
        steady_tol: 1e-8,
        monitor_every: 1,
        seed: 0,
    };
    cfg.cfl_safety = 1.0;
    assert!(simulate(&cfg).is_err());
    cfg.cfl_safety = 0.5;
    cfg.t_end = 0.0;
    assert!(simulate(&cfg).is_err());
    cfg.t_end = 1.0;
    cfg.initial.u = constant(-0.1);
    assert!(simulate(&cfg).is_err());
}

/// Final-time L∞ monitors on the extinction scenario converge at second
/// order under refinement.
#[test]
fn refinement_order_on_extinction_scenario() {
    let p = a1_params();
    let t_final = 1.0;
    let monitors: Vec<(f64, f64)> = [32usize, 64, 128, 256]
        .iter()
        .map(|&n| {
            let g = Grid::new_1d(n, 1.0).unwrap();
            let ic = InitialCondition {
                u: Profile::CosinePerturbation {
                    base: Level::Value(0.5),
                    amplitude: 0.1,
                    relative: false,
                    m: 2,
                    p: 0,
                },
                v: constant(p.f),
            };
            let s0 = ic.build(&g, &p, 0).unwrap();
            let mut st = Stepper::new(g, p, Scheme::Rk4, 0.9).unwrap();
            let s = st.advance_to(&s0, t_final).unwrap();
            (s.u.linf_dev(0.0), s.v.linf_dev(p.f))
        })
        .collect();
    for comp in 0..2 {
        let m: Vec<f64> = monitors.iter().map(|x| if comp == 0 { x.0 } else { x.1 }).collect();
        let d1 = (m[0] - m[1]).abs();
        let d2 = (m[1] - m[2]).abs();
        let d3 = (m[2] - m[3]).abs();
        let o1 = (d1 / d2).log2();
        let o2 = (d2 / d3).log2();
        for o in [o1, o2] {
            assert!((1.5..=2.5).contains(&o), "component {comp}: orders {o1}, {o2}; monitors {m:?}");
        }
    }
}
