//! Convergence tables and the manufactured-solution comparison.
//!
//! Independent cells run on the rayon pool; results come back in input order.

use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::caputo::solve_caputo_ivp;
use crate::diagnostics::{convergence_order, OrderMode};
use crate::error::{invalid, Result};
use crate::mesh::TemporalMesh;
use crate::solver::{manufactured_solution, reference_solution, solve, SolverConfig};
use crate::spatial::{norm_inf, GridFunction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableCell {
    pub alpha: f64,
    pub n: usize,
    pub error: f64,
    /// Order against the previous row of the same `alpha`.
    pub order: Option<f64>,
}

fn order_mode(ns: &[usize]) -> OrderMode {
    if ns.windows(2).all(|w| w[1] == 2 * w[0]) {
        OrderMode::Halving
    } else {
        OrderMode::General
    }
}

fn with_orders(alphas: &[f64], ns: &[usize], errors: Vec<f64>) -> Result<Vec<TableCell>> {
    let mode = order_mode(ns);
    let mut out = Vec::with_capacity(errors.len());
    for (ai, &alpha) in alphas.iter().enumerate() {
        let errs = &errors[ai * ns.len()..(ai + 1) * ns.len()];
        let pairs: Vec<(usize, f64)> = ns.iter().cloned().zip(errs.iter().cloned()).collect();
        let orders = if pairs.len() >= 2 && errs.iter().all(|&e| e > 0.0) {
            convergence_order(&pairs, mode)?
        } else {
            Vec::new()
        };
        for (i, &(n, error)) in pairs.iter().enumerate() {
            let order = if i == 0 {
                None
            } else {
                orders.get(i - 1).cloned()
            };
            out.push(TableCell {
                alpha,
                n,
                error,
                order,
            });
        }
    }
    Ok(out)
}

fn cells(alphas: &[f64], ns: &[usize]) -> Vec<(f64, usize)> {
    alphas
        .iter()
        .flat_map(|&a| ns.iter().map(move |&n| (a, n)))
        .collect()
}

/// Max nodal error of the discrete problem `D_N^alpha w = Gamma(4+alpha)/Gamma(4) t^3`,
/// `w(0) = 0`, against `w(t) = t^{3+alpha}` on the graded cubic mesh over `[0, 1]`.
pub fn caputo_ivp_error(alpha: f64, n: usize) -> Result<f64> {
    let mesh = TemporalMesh::graded_cubic(n, 1.0)?;
    let g = gamma(4.0 + alpha) / 6.0;
    let w = solve_caputo_ivp(&mesh, alpha, 0.0, |t| g * t * t * t)?;
    Ok(w.iter()
        .enumerate()
        .map(|(k, v)| (mesh.t(k).powf(3.0 + alpha) - v).abs())
        .fold(0.0, f64::max))
}

pub fn caputo_convergence(alphas: &[f64], ns: &[usize]) -> Result<Vec<TableCell>> {
    let errors = cells(alphas, ns)
        .par_iter()
        .map(|&(a, n)| caputo_ivp_error(a, n))
        .collect::<Result<Vec<f64>>>()?;
    with_orders(alphas, ns, errors)
}

/// Max-norm distance of the terminal state on `N` graded steps from the
/// reference run with `n0` steps. `template` supplies everything but the
/// order and the mesh.
pub fn tfch_convergence(
    template: &SolverConfig,
    alphas: &[f64],
    ns: &[usize],
    n0: usize,
) -> Result<Vec<TableCell>> {
    if ns.iter().any(|&n| n >= n0) {
        return invalid(format!("reference step count {n0} must exceed every N"));
    }
    let horizon = template.mesh.horizon();
    let refs = alphas
        .par_iter()
        .map(|&alpha| {
            reference_solution(
                &SolverConfig {
                    alpha,
                    ..template.clone()
                },
                n0,
            )
        })
        .collect::<Result<Vec<GridFunction>>>()?;
    let errors = cells(alphas, ns)
        .par_iter()
        .enumerate()
        .map(|(i, &(alpha, n))| {
            let mesh = TemporalMesh::graded_cubic(n, horizon)?;
            let run = solve(&SolverConfig {
                alpha,
                mesh,
                ..template.clone()
            })?;
            let diff = run.terminal().sub(&refs[i / ns.len()])?;
            Ok(norm_inf(&diff))
        })
        .collect::<Result<Vec<f64>>>()?;
    with_orders(alphas, ns, errors)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedResult {
    pub alpha: f64,
    /// `(x, exact, numeric)` at every node at the final time.
    pub profile: Vec<(f64, f64, f64)>,
    pub max_error: f64,
}

/// Runs the manufactured problem and compares the terminal state with the exact solution.
pub fn manufactured(template: &SolverConfig) -> Result<ManufacturedResult> {
    let run = solve(template)?;
    let t = template.mesh.horizon();
    let u = run.terminal();
    let profile: Vec<(f64, f64, f64)> = (0..=u.m())
        .map(|i| {
            let x = u.x(i);
            (
                x,
                manufactured_solution(x, t, template.alpha),
                u.values()[i],
            )
        })
        .collect();
    let max_error = profile
        .iter()
        .map(|(_, e, v)| (e - v).abs())
        .fold(0.0, f64::max);
    Ok(ManufacturedResult {
        alpha: template.alpha,
        profile,
        max_error,
    })
}

pub fn manufactured_sweep(
    template: &SolverConfig,
    alphas: &[f64],
) -> Result<Vec<ManufacturedResult>> {
    alphas
        .par_iter()
        .map(|&alpha| {
            manufactured(&SolverConfig {
                alpha,
                ..template.clone()
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_attach_to_following_rows() {
        let t = with_orders(&[0.5], &[10, 20, 40], vec![8.0, 1.0, 0.125]).unwrap();
        assert_eq!(t[0].order, None);
        assert!((t[1].order.unwrap() - 3.0).abs() < 1e-12);
        assert!((t[2].order.unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn reference_must_be_finer() {
        let cfg = SolverConfig::new(0.5, 8, TemporalMesh::graded_cubic(4, 1.0).unwrap());
        assert!(tfch_convergence(&cfg, &[0.5], &[10, 20], 20).is_err());
    }
}
