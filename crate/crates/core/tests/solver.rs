use std::sync::Arc;

use tfch_core::caputo::L2Kernels;
use tfch_core::diagnostics::{energy_series, EnergyForm};
use tfch_core::mesh::TemporalMesh;
use tfch_core::solver::{
    scheme_residual, solve, step_fixed_point, Initial, Nonlinearity, SolverConfig,
};
use tfch_core::spatial::norm_inf;

fn graded(n: usize) -> TemporalMesh {
    TemporalMesh::graded_cubic(n, 1.0).unwrap()
}

#[test]
fn modified_energy_never_increases() {
    for alpha in [0.2, 0.4, 0.6, 0.8] {
        let cfg = SolverConfig::new(alpha, 60, graded(200));
        let run = solve(&cfg).unwrap();
        let e = energy_series(&cfg, &run, EnergyForm::NegHForm).unwrap();
        assert!(
            e.max_modified_increase() <= 1e-12,
            "alpha={alpha}: {:e}",
            e.max_modified_increase()
        );
        assert!(e.free_energy[1] <= e.free_energy[0]);
    }
}

#[test]
fn converged_states_satisfy_the_step_equation() {
    let cfg = SolverConfig::new(0.5, 40, graded(30));
    let run = solve(&cfg).unwrap();
    let h = cfg.h();
    let ker = L2Kernels::new(&cfg.mesh, cfg.alpha).unwrap();
    for n in 1..=30 {
        let b0 = ker.b_row(n).unwrap()[0];
        let r = scheme_residual(&cfg, &run, n).unwrap();
        let scale = b0 + cfg.kappa / (h * h) + cfg.kappa * cfg.epsilon.powi(2) / h.powi(4);
        assert!(r <= 100.0 * cfg.iteration_tol * scale, "n={n}: {r:e}");
    }
}

#[test]
fn step_fixed_point_reproduces_solve() {
    let cfg = SolverConfig::new(0.7, 24, graded(12));
    let run = solve(&cfg).unwrap();
    let (u, out) = step_fixed_point(7, &run.states[..7], &cfg).unwrap();
    assert_eq!(u, run.states[7]);
    assert_eq!(out.iterations, run.iterations[6]);
}

#[test]
fn symmetric_data_gives_symmetric_states() {
    let cfg = SolverConfig::new(0.4, 32, graded(20));
    let run = solve(&cfg).unwrap();
    for u in &run.states {
        let v = u.values();
        for i in 0..=32 {
            assert!((v[i] - v[32 - i]).abs() <= cfg.iteration_tol * norm_inf(u).max(1.0));
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let cfg = SolverConfig::new(0.3, 30, graded(25));
    assert_eq!(solve(&cfg).unwrap().states, solve(&cfg).unwrap().states);
}

#[test]
fn linear_nonlinearity_takes_one_iteration_per_step() {
    let cfg = SolverConfig {
        nonlinearity: Nonlinearity::Linear,
        ..SolverConfig::new(0.5, 20, graded(10))
    };
    let run = solve(&cfg).unwrap();
    assert!(run.iterations.iter().all(|&i| i == 1));
}

#[test]
fn larger_data_needs_more_iterations_but_converges() {
    let cfg = SolverConfig {
        initial: Initial::Custom(Arc::new(|x: f64| 0.8 * (std::f64::consts::PI * x).sin())),
        ..SolverConfig::new(0.5, 32, graded(40))
    };
    let run = solve(&cfg).unwrap();
    assert!(run.iterations.iter().max().unwrap() > &2);
    assert!(run.residuals.iter().all(|&r| r <= cfg.iteration_tol));
    let e = energy_series(&cfg, &run, EnergyForm::NegHForm).unwrap();
    assert!(e.max_modified_increase() <= 1e-12);
}

#[test]
fn graded_mesh_meets_the_ratio_condition_for_all_orders() {
    for alpha in [0.1, 0.5, 0.9] {
        let cfg = SolverConfig::new(alpha, 20, graded(50));
        assert!(solve(&cfg).unwrap().ratio_bound_ok);
    }
}
