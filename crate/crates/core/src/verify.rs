//! Seeded property suite over meshes, kernels and spatial operators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

use crate::caputo::{
    apply_caputo, apply_caputo_split, kernel_row_split, q, q3, rho_star, L2Kernels,
};
use crate::diagnostics::{
    dgs_identity_check, energy_inequality_slack, kernel_property_check, KERNEL_PROPERTY_TOL,
};
use crate::error::Result;
use crate::mesh::{validate_ratio_bound, TemporalMesh};
use crate::spatial::{
    apply_a, apply_a_inv, apply_dxx, apply_h, apply_neg_h_inv, inner, inner_neg_h, norm_dx_a_sq,
    norm_dx_sq, norm_l2, GridFunction,
};

pub const ORDERS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Largest ratio drawn for random admissible meshes (below the smallest `rho*`).
pub const RANDOM_RATIO_CAP: f64 = 4.7;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Reported but not counted as a failure (inputs outside the theory).
    pub warning: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            warning: false,
            detail,
        }
    }
}

/// Mesh on `[0, 1]` with `levels` steps whose ratios are uniform on `[1, cap]`.
pub fn random_admissible_mesh(rng: &mut impl Rng, levels: usize, cap: f64) -> Result<TemporalMesh> {
    let mut steps = Vec::with_capacity(levels);
    steps.push(1.0f64);
    for _ in 1..levels {
        let r = rng.gen_range(1.0..=cap);
        steps.push(steps[steps.len() - 1] * r);
    }
    let total: f64 = steps.iter().sum();
    steps.iter_mut().for_each(|s| *s /= total);
    TemporalMesh::custom(&steps)
}

fn random_grid(rng: &mut impl Rng, m: usize) -> Result<GridFunction> {
    let mut v: Vec<f64> = (0..=m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    v[0] = 0.0;
    v[m] = 0.0;
    GridFunction::from_values(v, 0.0, 1.0)
}

fn compensated_sum(xs: &[f64]) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for &x in xs {
        let t = sum + x;
        c += if sum.abs() >= x.abs() {
            (sum - t) + x
        } else {
            (x - t) + sum
        };
        sum = t;
    }
    sum + c
}

fn check_telescoping(rng: &mut ChaCha8Rng) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    let mut meshes = Vec::new();
    for n in [1, 2, 7, 64, 500, 4000] {
        meshes.push(TemporalMesh::graded_cubic(n, 1.0)?);
        meshes.push(TemporalMesh::uniform(n, 2.5)?);
    }
    for _ in 0..20 {
        let steps: Vec<f64> = (0..rng.gen_range(1..200))
            .map(|_| rng.gen_range(1e-3..1.0))
            .collect();
        meshes.push(TemporalMesh::custom(&steps)?);
    }
    for m in &meshes {
        let s = compensated_sum(m.steps());
        worst = worst.max((s - m.t(m.len())).abs() / m.t(m.len()));
    }
    Ok(CheckOutcome::new(
        "mesh telescoping",
        worst <= 1e-14,
        format!("max relative gap {worst:.3e}"),
    ))
}

fn check_graded_ratios() -> Result<CheckOutcome> {
    let cap = (5.0f64 / 3.0).powi(3);
    let mut ok = true;
    for n in [2, 10, 200, 4000] {
        let m = TemporalMesh::graded_cubic(n, 1.0)?;
        for k in 2..=n {
            ok &= m.rho(k) > 1.0 && m.rho(k) <= cap * (1.0 + 1e-14);
            if k > 2 {
                ok &= m.rho(k) < m.rho(k - 1);
            }
        }
    }
    Ok(CheckOutcome::new(
        "graded ratios in (1, (5/3)^3], decreasing",
        ok,
        String::new(),
    ))
}

fn check_split(rng: &mut ChaCha8Rng) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for _ in 0..30 {
        let mesh = random_admissible_mesh(rng, 40, RANDOM_RATIO_CAP)?;
        let w: Vec<f64> = (0..=40).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for &alpha in &ORDERS {
            let ker = L2Kernels::new(&mesh, alpha)?;
            for n in 1..=40 {
                let b = ker.b_row(n)?;
                let scale: f64 = (1..=n).map(|k| (b[n - k] * (w[k] - w[k - 1])).abs()).sum();
                let x = apply_caputo(&w[..=n], &mesh, alpha)?;
                let y = apply_caputo_split(&w[..=n], &mesh, alpha)?;
                worst = worst.max((x - y).abs() / scale);
            }
        }
    }
    Ok(CheckOutcome::new(
        "split form equals B form",
        worst <= 1e-13,
        format!("max relative gap {worst:.3e}"),
    ))
}

fn check_quadratic_exactness(rng: &mut ChaCha8Rng) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mesh = random_admissible_mesh(rng, 20, RANDOM_RATIO_CAP)?;
        let w: Vec<f64> = mesh.nodes().iter().map(|t| t * t).collect();
        for &alpha in &ORDERS {
            for n in 2..=20 {
                let exact = 2.0 * mesh.t(n).powf(2.0 - alpha) / gamma(3.0 - alpha);
                let v = apply_caputo(&w[..=n], &mesh, alpha)?;
                worst = worst.max((v - exact).abs() / exact);
            }
        }
    }
    Ok(CheckOutcome::new(
        "L2 formula exact on t^2",
        worst <= 1e-12,
        format!("max relative error {worst:.3e}"),
    ))
}

fn check_dgs(rng: &mut ChaCha8Rng) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    let mut definite = true;
    for _ in 0..100 {
        let mesh = random_admissible_mesh(rng, 32, RANDOM_RATIO_CAP)?;
        let alpha = ORDERS[rng.gen_range(0..ORDERS.len())];
        let chi = (1..=32)
            .map(|n| kernel_row_split(n, &mesh, alpha).map(|s| s.c_tilde))
            .collect::<Result<Vec<_>>>()?;
        let phi: Vec<f64> = (0..32).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = dgs_identity_check(&chi, 0.0, &phi)?;
        worst = worst.max(r.relative_residual());
        definite &= r.preconditions_ok;
        // 2 sum_k phi_k sum_j chi phi_j >= Y[phi_n]
        let mut lhs = 0.0;
        for k in 1..=32 {
            lhs += 2.0 * phi[k - 1] * (1..=k).map(|j| chi[k - 1][k - j] * phi[j - 1]).sum::<f64>();
        }
        let a = {
            let mut a = chi[31].clone();
            a[0] *= 2.0;
            a
        };
        let mut tail = 0.0;
        let mut y = 0.0;
        for j in (1..32).rev() {
            tail += phi[j];
            y += (a[32 - j - 1] - a[32 - j]) * tail * tail;
        }
        tail += phi[0];
        y += a[31] * tail * tail;
        definite &= y >= 0.0 && lhs >= y - 1e-12 * lhs.abs().max(y.abs());
    }
    Ok(CheckOutcome::new(
        "discrete gradient structure identity",
        worst <= 1e-12 && definite,
        format!("max relative residual {worst:.3e}, positive definiteness {definite}"),
    ))
}

fn check_kernels(rng: &mut ChaCha8Rng) -> Result<CheckOutcome> {
    let mut worst = [f64::INFINITY; 3];
    let mut meshes = vec![
        TemporalMesh::graded_cubic(64, 1.0)?,
        TemporalMesh::uniform(64, 1.0)?,
    ];
    for _ in 0..100 {
        meshes.push(random_admissible_mesh(rng, 64, RANDOM_RATIO_CAP)?);
    }
    for (i, mesh) in meshes.iter().enumerate() {
        let orders: &[f64] = if i < 2 {
            &ORDERS
        } else {
            &[ORDERS[i % ORDERS.len()]]
        };
        for &alpha in orders {
            let r = kernel_property_check(mesh, alpha, 64)?;
            worst[0] = worst[0].min(r.monotonicity.worst_relative);
            worst[1] = worst[1].min(r.convexity.worst_relative);
            worst[2] = worst[2].min(r.dominance.worst_relative);
        }
    }
    let ok = worst.iter().all(|&w| w >= -KERNEL_PROPERTY_TOL);
    Ok(CheckOutcome::new(
        "J kernels: monotonicity, convexity, dominance",
        ok,
        format!(
            "worst relative margins {:.3e}, {:.3e}, {:.3e} on 102 meshes, n <= 64",
            worst[0], worst[1], worst[2]
        ),
    ))
}

fn check_out_of_theory() -> Result<CheckOutcome> {
    let steps: Vec<f64> = (0..12).map(|k| 10f64.powi(k)).collect();
    let mesh = TemporalMesh::custom(&steps)?;
    let ratios = validate_ratio_bound(&mesh, 0.5)?;
    let r = kernel_property_check(&mesh, 0.5, 12)?;
    Ok(CheckOutcome {
        name: "inadmissible mesh (rho = 10)",
        passed: true,
        warning: !ratios.passed(),
        detail: format!(
            "out-of-theory input: {} of {} ratios exceed rho* = {:.4}; kernel properties {} (dominance margin {:.3e})",
            ratios.offending.len(),
            mesh.len() - 1,
            ratios.rho_star,
            if r.all_hold(KERNEL_PROPERTY_TOL) { "still hold" } else { "violated" },
            r.dominance.worst_relative
        ),
    })
}

fn check_sandwich(rng: &mut ChaCha8Rng) -> Result<CheckOutcome> {
    let mut ok = true;
    for _ in 0..1000 {
        let m = rng.gen_range(4..=64);
        let u = random_grid(rng, m)?;
        let dx = norm_dx_sq(&u);
        let dxa = norm_dx_a_sq(&u);
        let l2 = norm_l2(&u).powi(2);
        let al2 = norm_l2(&apply_a(&u)).powi(2);
        let tol = 1e-12;
        ok &= 2.0 / 3.0 * dx <= dxa * (1.0 + tol) && dxa <= dx * (1.0 + tol);
        ok &= l2 / 3.0 <= al2 * (1.0 + tol) && al2 <= l2 * (1.0 + tol);
    }
    Ok(CheckOutcome::new(
        "norm equivalences of A and dxx",
        ok,
        "1000 random grid functions".into(),
    ))
}

fn check_h_structure(rng: &mut ChaCha8Rng) -> Result<CheckOutcome> {
    let mut sym: f64 = 0.0;
    let mut sym_neg: f64 = 0.0;
    let mut neg = true;
    let mut zero_bc = true;
    for _ in 0..1000 {
        let m = rng.gen_range(4..=64);
        let u = random_grid(rng, m)?;
        let v = random_grid(rng, m)?;
        let huv = inner(&apply_h(&u), &v)?;
        let uhv = inner(&u, &apply_h(&v))?;
        sym = sym.max((huv - uhv).abs() / (norm_l2(&apply_h(&u)) * norm_l2(&v)));
        let a = inner_neg_h(&u, &v)?;
        let b = inner_neg_h(&v, &u)?;
        sym_neg = sym_neg.max((a - b).abs() / (norm_l2(&apply_neg_h_inv(&u)) * norm_l2(&v)));
        neg &= inner(&apply_h(&u), &u)? <= 0.0;
        for w in [
            apply_a(&u),
            apply_a_inv(&u),
            apply_dxx(&u),
            apply_h(&u),
            apply_neg_h_inv(&u),
        ] {
            zero_bc &= w.has_zero_boundary();
        }
    }
    Ok(CheckOutcome::new(
        "H symmetric and negative semidefinite",
        sym <= 1e-12 && sym_neg <= 1e-12 && neg && zero_bc,
        format!("symmetry gap {sym:.3e}, (-H)^-1 symmetry gap {sym_neg:.3e}, (Hu,u) <= 0: {neg}, zero boundary kept: {zero_bc}"),
    ))
}

fn check_a_inverse_bound(rng: &mut ChaCha8Rng) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let m = rng.gen_range(4..=128);
        let u = random_grid(rng, m)?;
        worst = worst.max(norm_l2(&apply_a_inv(&u)) / norm_l2(&u));
    }
    Ok(CheckOutcome::new(
        "||A^-1 u|| <= 1.5 ||u||",
        worst <= 1.5,
        format!("largest ratio {worst:.6}"),
    ))
}

fn check_q_positive() -> Result<CheckOutcome> {
    let mut worst = f64::INFINITY;
    for &alpha in &ORDERS {
        let rs = rho_star(alpha)?;
        for i in 0..50 {
            for j in 0..50 {
                let z = 1.0 + (rs - 1.0) * i as f64 / 50.0;
                let y = 1.0 + (rs - 1.0) * j as f64 / 50.0;
                worst = worst.min(q(z, y, alpha));
            }
        }
    }
    Ok(CheckOutcome::new(
        "q > 0 on [1, rho*)^2",
        worst > 0.0,
        format!("minimum {worst:.6e}"),
    ))
}

fn check_q3_monotone() -> CheckOutcome {
    let mut worst = f64::INFINITY;
    for i in 1..=100 {
        let alpha = i as f64 / 100.0;
        let mut prev = q3(1.0, alpha);
        for j in 1..=1900 {
            let v = q3(1.0 + j as f64 * 0.01, alpha);
            worst = worst.min(v - prev);
            prev = v;
        }
    }
    CheckOutcome::new(
        "q3 increasing in rho on [1, 20]",
        worst > 0.0,
        format!("smallest increment {worst:.3e}"),
    )
}

fn check_young_bound(rng: &mut ChaCha8Rng) -> Result<CheckOutcome> {
    let mut worst = f64::INFINITY;
    for _ in 0..200 {
        let mesh = random_admissible_mesh(rng, 16, RANDOM_RATIO_CAP)?;
        let alpha = ORDERS[rng.gen_range(0..ORDERS.len())];
        let g3 = gamma(3.0 - alpha);
        let w: Vec<f64> = (0..=16).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let carry = |n: usize| {
            let r = mesh.rho_or_one(n + 1);
            alpha * r.powf(2.0 - alpha / 2.0) / (2.0 * (1.0 + r) * mesh.tau(n).powf(alpha) * g3)
        };
        for n in 2..=16 {
            let s = kernel_row_split(n, &mesh, alpha)?;
            let (a, b) = (w[n] - w[n - 1], w[n - 1] - w[n - 2]);
            let lhs = (s.leading * a - s.lagged * b) * a;
            let qt = q(mesh.rho(n), mesh.rho_or_one(n + 1), alpha) * a * a
                / (2.0 * mesh.tau(n).powf(alpha) * g3);
            let rhs = carry(n) * a * a - carry(n - 1) * b * b + qt;
            let scale =
                lhs.abs() + (carry(n) * a * a).abs() + (carry(n - 1) * b * b).abs() + qt.abs();
            worst = worst.min((lhs - rhs) / scale);
        }
    }
    Ok(CheckOutcome::new(
        "leading-term lower bound",
        worst >= -1e-12,
        format!("minimum relative slack {worst:.3e}"),
    ))
}

fn check_energy_inequality(rng: &mut ChaCha8Rng) -> Result<CheckOutcome> {
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let levels = rng.gen_range(2..=20);
        let mesh = random_admissible_mesh(rng, levels, RANDOM_RATIO_CAP)?;
        let alpha = ORDERS[rng.gen_range(0..ORDERS.len())];
        let w: Vec<f64> = (0..=levels).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = rng.gen_range(2..=levels);
        let (slack, scale) = energy_inequality_slack(&w, &mesh, alpha, n)?;
        worst = worst.min(slack / scale);
    }
    Ok(CheckOutcome::new(
        "discrete energy inequality for the L2 formula",
        worst >= -1e-12,
        format!("minimum relative slack {worst:.3e} over 1000 histories"),
    ))
}

fn check_fourth_order() -> Result<CheckOutcome> {
    let pi = std::f64::consts::PI;
    let err = |m: usize| -> Result<f64> {
        let u = GridFunction::sample(m, 0.0, 1.0, |x| (pi * x).sin())?;
        let hu = apply_h(&u);
        Ok((1..m)
            .map(|i| (hu.values()[i] + pi * pi * (pi * u.x(i)).sin()).abs())
            .fold(0.0, f64::max))
    };
    let e = [err(16)?, err(32)?, err(64)?, err(128)?];
    let ratios: Vec<f64> = e.windows(2).map(|w| w[0] / w[1]).collect();
    let ok = ratios.iter().all(|r| (14.0..=18.0).contains(r));
    Ok(CheckOutcome::new(
        "fourth-order compact consistency",
        ok,
        format!("error ratios {ratios:.3?}"),
    ))
}

/// Runs every property check with the given seed.
pub fn run_property_suite(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(vec![
        check_telescoping(&mut rng)?,
        check_graded_ratios()?,
        check_split(&mut rng)?,
        check_quadratic_exactness(&mut rng)?,
        check_dgs(&mut rng)?,
        check_kernels(&mut rng)?,
        check_out_of_theory()?,
        check_sandwich(&mut rng)?,
        check_h_structure(&mut rng)?,
        check_a_inverse_bound(&mut rng)?,
        check_q_positive()?,
        check_q3_monotone(),
        check_young_bound(&mut rng)?,
        check_energy_inequality(&mut rng)?,
        check_fourth_order()?,
    ])
}
