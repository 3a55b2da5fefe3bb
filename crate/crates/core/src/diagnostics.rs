//! Mass, free energy, the history functional `G`, the modified energy and
//! structural checks on the discrete convolution kernels.

use statrs::function::gamma::gamma;

use crate::caputo::{q, L2Kernels};
use crate::error::{check_alpha, invalid, Result};
use crate::mesh::TemporalMesh;
use crate::solver::{RunHistory, SolverConfig};
use crate::spatial::{apply_neg_h_inv, inner_unchecked, norm_grad_h_sq, GridFunction};

/// Composite trapezoidal rule over all nodes.
pub fn mass(u: &GridFunction) -> f64 {
    let v = u.values();
    let m = u.m();
    u.h() * (0.5 * (v[0] + v[m]) + v[1..m].iter().sum::<f64>())
}

/// `(eps^2 / 2) (-H u, u) + (1/4) ||u^2 - 1||^2`.
pub fn free_energy(u: &GridFunction, epsilon: f64) -> f64 {
    let well = u.h()
        * u.interior()
            .iter()
            .map(|x| (x * x - 1.0).powi(2))
            .sum::<f64>();
    0.5 * epsilon * epsilon * norm_grad_h_sq(u) + 0.25 * well
}

fn check_level(n: usize, len: usize, mesh: &TemporalMesh) -> Result<()> {
    if n == 0 || n > mesh.len() || len < n + 1 {
        return invalid(format!(
            "level {n} needs {} history entries on a mesh with {} steps, got {len}",
            n + 1,
            mesh.len()
        ));
    }
    Ok(())
}

/// Weights of `G` at level `n`: the coefficient of `(w^n - w^{n-1})^2` and,
/// for `j = 0..n-1`, the coefficient of `(w^n - w^j)^2`.
fn g_weights(ker: &L2Kernels, n: usize) -> Result<(f64, Vec<f64>)> {
    let mesh = ker.mesh();
    let alpha = ker.alpha();
    let r = mesh.rho_or_one(n + 1);
    let carry = alpha * r.powf(2.0 - alpha / 2.0)
        / (2.0 * (1.0 + r) * mesh.tau(n).powf(alpha) * ker.gamma_3());
    let jr = ker.j_row(n)?;
    let mut w = vec![0.0; n];
    w[0] = 0.5 * jr[n - 1];
    for j in 1..n {
        w[j] = 0.5 * (jr[n - j - 1] - jr[n - j]);
    }
    Ok((carry, w))
}

/// Scalar history functional `G` at level `n`; `rho_{N+1}` is taken as 1.
pub fn g_functional(history: &[f64], mesh: &TemporalMesh, alpha: f64, n: usize) -> Result<f64> {
    check_level(n, history.len(), mesh)?;
    let ker = L2Kernels::new(mesh, alpha)?;
    let (carry, w) = g_weights(&ker, n)?;
    let wn = history[n];
    let mut g = carry * (wn - history[n - 1]).powi(2);
    for (j, wj) in w.iter().enumerate() {
        g += wj * (wn - history[j]).powi(2);
    }
    Ok(g)
}

/// `G` applied nodewise to a history of grid functions.
pub fn g_functional_pointwise(
    history: &[GridFunction],
    mesh: &TemporalMesh,
    alpha: f64,
    n: usize,
) -> Result<GridFunction> {
    check_level(n, history.len(), mesh)?;
    let ker = L2Kernels::new(mesh, alpha)?;
    let (carry, w) = g_weights(&ker, n)?;
    let un = &history[n];
    let mut out = un.zeros_like();
    let mut add = |s: f64, other: &GridFunction| -> Result<()> {
        un.check_same_grid(other)?;
        for ((o, x), y) in out
            .values_mut()
            .iter_mut()
            .zip(un.values())
            .zip(other.values())
        {
            *o += s * (x - y).powi(2);
        }
        Ok(())
    };
    add(carry, &history[n - 1])?;
    for (j, &wj) in w.iter().enumerate() {
        add(wj, &history[j])?;
    }
    Ok(out)
}

/// `G` with every square replaced by the `(-H)^{-1}` quadratic form
/// `||v||_{-H}^2 = (v, (-H)^{-1} v)`.
pub fn g_functional_neg_h(
    history: &[GridFunction],
    mesh: &TemporalMesh,
    alpha: f64,
    n: usize,
) -> Result<f64> {
    check_level(n, history.len(), mesh)?;
    let ker = L2Kernels::new(mesh, alpha)?;
    let (carry, w) = g_weights(&ker, n)?;
    let un = &history[n];
    let form = |other: &GridFunction| -> Result<f64> {
        let v = un.sub(other)?.with_zero_boundary();
        Ok(inner_unchecked(&v, &apply_neg_h_inv(&v)))
    };
    let mut g = carry * form(&history[n - 1])?;
    for (j, &wj) in w.iter().enumerate() {
        if wj != 0.0 {
            g += wj * form(&history[j])?;
        }
    }
    Ok(g)
}

/// How the history functional enters the modified energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyForm {
    /// Squares measured in the `(-H)^{-1}` quadratic form.
    NegHForm,
    /// Nodewise `G` paired with the interior constant one in the `(-H)^{-1}` product.
    Pointwise,
}

/// Modified energy `E^n + (1/kappa) * correction(G)` at level `n >= 1`.
pub fn modified_energy(
    history: &[GridFunction],
    mesh: &TemporalMesh,
    alpha: f64,
    kappa: f64,
    epsilon: f64,
    n: usize,
    form: EnergyForm,
) -> Result<f64> {
    check_alpha(alpha)?;
    check_level(n, history.len(), mesh)?;
    let e = free_energy(&history[n], epsilon);
    let corr = match form {
        EnergyForm::NegHForm => g_functional_neg_h(history, mesh, alpha, n)?,
        EnergyForm::Pointwise => {
            let g = g_functional_pointwise(history, mesh, alpha, n)?;
            let mut one = g.zeros_like();
            one.interior_mut().iter_mut().for_each(|v| *v = 1.0);
            inner_unchecked(&g, &apply_neg_h_inv(&one))
        }
    };
    Ok(e + corr / kappa)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergySeries {
    pub levels: Vec<usize>,
    pub times: Vec<f64>,
    pub free_energy: Vec<f64>,
    /// Absent at level 0.
    pub modified_energy: Vec<Option<f64>>,
    pub mass: Vec<f64>,
}

impl EnergySeries {
    /// Largest relative increase `(E^n - E^{n-1}) / max(1, |E^{n-1}|)` of the modified energy, `n >= 2`.
    pub fn max_modified_increase(&self) -> f64 {
        let m: Vec<f64> = self.modified_energy.iter().flatten().cloned().collect();
        m.windows(2)
            .map(|w| (w[1] - w[0]) / w[0].abs().max(1.0))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_mass_drift(&self) -> f64 {
        self.mass
            .iter()
            .map(|m| (m - self.mass[0]).abs())
            .fold(0.0, f64::max)
    }
}

pub fn energy_series(
    cfg: &SolverConfig,
    run: &RunHistory,
    form: EnergyForm,
) -> Result<EnergySeries> {
    let mesh = &cfg.mesh;
    let n_max = run.states.len() - 1;
    let mut out = EnergySeries {
        levels: (0..=n_max).collect(),
        times: (0..=n_max).map(|n| mesh.t(n)).collect(),
        free_energy: run
            .states
            .iter()
            .map(|u| free_energy(u, cfg.epsilon))
            .collect(),
        modified_energy: vec![None],
        mass: run.states.iter().map(mass).collect(),
    };
    for n in 1..=n_max {
        out.modified_energy.push(Some(modified_energy(
            &run.states,
            mesh,
            cfg.alpha,
            cfg.kappa,
            cfg.epsilon,
            n,
            form,
        )?));
    }
    Ok(out)
}

/// Slack of the energy inequality at level `n >= 2`:
/// `(sum B dw) dw^n - [G_n - G_{n-1} + q(rho_n, rho_{n+1}) (dw^n)^2 / (2 tau_n^alpha Gamma(3-alpha))]`,
/// returned with the sum of magnitudes of the terms for relative comparison.
pub fn energy_inequality_slack(
    history: &[f64],
    mesh: &TemporalMesh,
    alpha: f64,
    n: usize,
) -> Result<(f64, f64)> {
    check_level(n, history.len(), mesh)?;
    if n < 2 {
        return invalid("the energy inequality starts at level 2");
    }
    let lhs =
        crate::caputo::apply_caputo(&history[..=n], mesh, alpha)? * (history[n] - history[n - 1]);
    let gn = g_functional(history, mesh, alpha, n)?;
    let gp = g_functional(history, mesh, alpha, n - 1)?;
    let dw = history[n] - history[n - 1];
    let qt = q(mesh.rho(n), mesh.rho_or_one(n + 1), alpha) * dw * dw
        / (2.0 * mesh.tau(n).powf(alpha) * gamma(3.0 - alpha));
    let slack = lhs - (gn - gp + qt);
    Ok((slack, lhs.abs() + gn.abs() + gp.abs() + qt.abs()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DgsReport {
    pub max_residual: f64,
    /// Largest magnitude among the terms of the identity.
    pub scale: f64,
    /// Whether the kernel hypotheses (positivity, monotonicity, convexity) held.
    pub preconditions_ok: bool,
    /// Smallest value of `Y_R` encountered.
    pub min_remainder: f64,
}

impl DgsReport {
    pub fn relative_residual(&self) -> f64 {
        if self.scale == 0.0 {
            self.max_residual
        } else {
            self.max_residual / self.scale
        }
    }
}

/// Checks `2 phi_m sum_j chi_{m-j}^{(m)} phi_j = Y_m - Y_{m-1} + sigma chi_0^{(m)} phi_m^2 + Y_R,m`
/// for `m = 1..n`, where `chi[m-1]` is the row of level `m` indexed by lag.
pub fn dgs_identity_check(chi: &[Vec<f64>], sigma_min: f64, phi: &[f64]) -> Result<DgsReport> {
    let n = phi.len();
    if chi.len() < n || (0..n).any(|m| chi[m].len() != m + 1) {
        return invalid("kernel rows must have lengths 1, 2, ..., n");
    }
    if !(0.0..2.0).contains(&sigma_min) {
        return invalid("sigma_min must lie in [0, 2)");
    }
    let a_row = |m: usize| -> Vec<f64> {
        let mut a = chi[m - 1].clone();
        a[0] *= 2.0 - sigma_min;
        a
    };
    // tails[j] = sum_{l=j+1}^{m} phi_l for the current m (1-based phi)
    let y = |m: usize, a: &[f64]| -> f64 {
        if m == 0 {
            return 0.0;
        }
        let mut total = 0.0;
        let mut tail = 0.0;
        let mut acc = 0.0;
        for j in (1..m).rev() {
            tail += phi[j];
            acc += (a[m - j - 1] - a[m - j]) * tail * tail;
        }
        tail += phi[0];
        total += acc + a[m - 1] * tail * tail;
        total
    };
    let mut ok = true;
    let mut max_res: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let mut min_rem = f64::INFINITY;
    let mut prev_a: Vec<f64> = Vec::new();
    let mut prev_y = 0.0;
    for m in 1..=n {
        let a = a_row(m);
        if a.iter().any(|&v| v <= 0.0) || a.windows(2).any(|w| w[0] < w[1]) {
            ok = false;
        }
        let lhs: f64 =
            2.0 * phi[m - 1] * (1..=m).map(|j| chi[m - 1][m - j] * phi[j - 1]).sum::<f64>();
        let ym = y(m, &a);
        let yr = if m >= 2 {
            let p = &prev_a;
            if (1..m - 1).any(|j| p[m - j - 2] - p[m - j - 1] < a[m - j - 1] - a[m - j])
                || p[m - 2] < a[m - 1]
            {
                ok = false;
            }
            let mut tail = 0.0;
            let mut acc = 0.0;
            for j in (1..m - 1).rev() {
                tail += phi[j];
                acc += (p[m - j - 2] - p[m - j - 1] - a[m - j - 1] + a[m - j]) * tail * tail;
            }
            tail += phi[0];
            acc + (p[m - 2] - a[m - 1]) * tail * tail
        } else {
            0.0
        };
        min_rem = min_rem.min(yr);
        let rhs = ym - prev_y + sigma_min * chi[m - 1][0] * phi[m - 1].powi(2) + yr;
        max_res = max_res.max((lhs - rhs).abs());
        scale = scale
            .max(lhs.abs())
            .max(ym.abs())
            .max(prev_y.abs())
            .max(yr.abs());
        prev_y = ym;
        prev_a = a;
    }
    Ok(DgsReport {
        max_residual: max_res,
        scale,
        preconditions_ok: ok,
        min_remainder: min_rem,
    })
}

/// Worst margin of one kernel property, absolute and relative to the operands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margin {
    pub worst_relative: f64,
    pub worst_absolute: f64,
    /// `(n, j)` at which the worst relative margin occurs.
    pub at: Option<(usize, usize)>,
}

impl Margin {
    fn new() -> Self {
        Self {
            worst_relative: f64::INFINITY,
            worst_absolute: f64::INFINITY,
            at: None,
        }
    }

    fn record(&mut self, n: usize, j: usize, margin: f64, scale: f64) {
        let rel = if scale > 0.0 { margin / scale } else { margin };
        if rel < self.worst_relative {
            self.worst_relative = rel;
            self.at = Some((n, j));
        }
        self.worst_absolute = self.worst_absolute.min(margin);
    }

    /// Holds up to rounding: relative margin at least `-tol`.
    pub fn holds(&self, tol: f64) -> bool {
        self.worst_relative >= -tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelPropertyReport {
    pub n_max: usize,
    pub monotonicity: Margin,
    pub convexity: Margin,
    pub dominance: Margin,
}

impl KernelPropertyReport {
    pub fn all_hold(&self, tol: f64) -> bool {
        self.monotonicity.holds(tol) && self.convexity.holds(tol) && self.dominance.holds(tol)
    }
}

/// Default relative tolerance for [`KernelPropertyReport::all_hold`].
pub const KERNEL_PROPERTY_TOL: f64 = 1e-12;

/// Monotonicity, convexity and dominance of the auxiliary kernels `J` for
/// all levels up to `n_max`.
pub fn kernel_property_check(
    mesh: &TemporalMesh,
    alpha: f64,
    n_max: usize,
) -> Result<KernelPropertyReport> {
    let n_max = n_max.min(mesh.len());
    let ker = L2Kernels::new(mesh, alpha)?;
    let mut mono = Margin::new();
    let mut conv = Margin::new();
    let mut dom = Margin::new();
    let mut prev = ker.j_row(1)?;
    for n in 2..=n_max {
        let cur = ker.j_row(n)?;
        for j in 1..n {
            let (x, y) = (cur[j - 1], cur[j]);
            mono.record(n, j, x - y, x.abs().max(y.abs()));
            let (p, c) = (prev[j - 1], cur[j]);
            dom.record(n, j, p - c, p.abs().max(c.abs()));
            if j >= 2 {
                let ops = [prev[j - 2], prev[j - 1], cur[j - 1], cur[j]];
                let s = ops.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
                conv.record(n, j, (ops[0] - ops[1]) - (ops[2] - ops[3]), s);
            }
        }
        prev = cur;
    }
    Ok(KernelPropertyReport {
        n_max,
        monotonicity: mono,
        convexity: conv,
        dominance: dom,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderMode {
    /// `log2(e(N) / e(2N))` between consecutive entries.
    Halving,
    /// `log(e(N1) / e(N2)) / log(N2 / N1)` between consecutive entries.
    General,
}

pub fn convergence_order(errors: &[(usize, f64)], mode: OrderMode) -> Result<Vec<f64>> {
    if errors.len() < 2 {
        return invalid("need at least two (N, error) pairs");
    }
    if let Some((n, e)) = errors.iter().find(|(n, e)| !(*e > 0.0) || *n == 0) {
        return invalid(format!("error must be positive, got e({n}) = {e}"));
    }
    Ok(errors
        .windows(2)
        .map(|w| {
            let (n1, e1) = w[0];
            let (n2, e2) = w[1];
            match mode {
                OrderMode::Halving => (e1 / e2).log2(),
                OrderMode::General => (e1 / e2).ln() / (n2 as f64 / n1 as f64).ln(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mass_and_energy_of_simple_states() {
        let u = GridFunction::sample_interior(4, 0.0, 1.0, |_| 2.0).unwrap();
        assert!((mass(&u) - 1.5).abs() < 1e-15);
        let z = GridFunction::zeros(4, 0.0, 1.0).unwrap();
        assert_eq!(mass(&z), 0.0);
        assert!((free_energy(&z, 0.1) - 0.1875).abs() < 1e-15);
    }

    #[test]
    fn orders_from_tables() {
        let o = convergence_order(&[(250, 3.19e-4), (500, 7.58e-5)], OrderMode::Halving).unwrap();
        assert!((o[0] - 2.07).abs() < 5e-3);
        // the tabulated errors carry three digits, which moves the order by about 0.012
        let o = convergence_order(&[(15, 1.77e-6), (18, 1.12e-6)], OrderMode::General).unwrap();
        assert!((o[0] - 2.522).abs() < 0.015);
        let p = 2.37;
        let data: Vec<(usize, f64)> = [10, 20, 40, 80]
            .iter()
            .map(|&n| (n, 3.0 * (n as f64).powf(-p)))
            .collect();
        for o in convergence_order(&data, OrderMode::Halving).unwrap() {
            assert!((o - p).abs() < 1e-12);
        }
        assert!(convergence_order(&[(10, 0.0), (20, 1.0)], OrderMode::General).is_err());
        assert!(convergence_order(&[(10, 1.0)], OrderMode::General).is_err());
    }

    #[test]
    fn constant_history_has_zero_g() {
        let mesh = TemporalMesh::graded_cubic(6, 1.0).unwrap();
        assert_eq!(g_functional(&[1.5; 7], &mesh, 0.4, 6).unwrap(), 0.0);
    }

    #[test]
    fn dgs_single_term() {
        let chi = vec![vec![3.0]];
        let r = dgs_identity_check(&chi, 0.5, &[0.7]).unwrap();
        assert!(r.max_residual < 1e-15);
    }

    #[test]
    fn kernel_properties_on_graded_mesh() {
        let mesh = TemporalMesh::graded_cubic(64, 1.0).unwrap();
        let r = kernel_property_check(&mesh, 0.5, 64).unwrap();
        assert!(r.all_hold(KERNEL_PROPERTY_TOL), "{r:?}");
        let u = TemporalMesh::uniform(64, 1.0).unwrap();
        assert!(kernel_property_check(&u, 0.5, 64)
            .unwrap()
            .all_hold(KERNEL_PROPERTY_TOL));
    }
}
