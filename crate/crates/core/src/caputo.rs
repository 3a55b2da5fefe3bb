//! Variable-step L2 discretization of the Caputo derivative.
//!
//! Rows of coefficients at level `n` are stored by lag: entry `j` of a row is
//! the coefficient with subscript `n - k = j`, i.e. the weight attached to the
//! increment `w^k - w^{k-1}` with `k = n - j`. Entry 0 therefore belongs to the
//! most recent interval.

use crate::error::{check_alpha, check_alpha_closed, invalid, Error, Result};
use crate::mesh::TemporalMesh;
use crate::spatial::GridFunction;
use statrs::function::gamma::gamma;

/// Step-ratio constant used inside `theta`, fixed to seven decimals.
pub const RHO_BAR: f64 = 4.7476114;

#[derive(Debug, Clone, Copy)]
struct Gammas {
    /// Gamma(1 - alpha)
    g1: f64,
    /// Gamma(2 - alpha)
    g2: f64,
    /// Gamma(3 - alpha)
    g3: f64,
}

impl Gammas {
    fn new(alpha: f64) -> Self {
        let g2 = gamma(2.0 - alpha);
        Self {
            g1: g2 / (1.0 - alpha),
            g2,
            g3: gamma(3.0 - alpha),
        }
    }
}

/// All kernels of one time level, indexed by lag `j = n - k`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelRow {
    pub level: usize,
    pub theta: f64,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub b: Vec<f64>,
    pub c_tilde: Vec<f64>,
    pub j: Vec<f64>,
}

/// Representation `leading * dw^n - lagged * dw^{n-1} + sum_k c_tilde_{n-k} dw^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSplit {
    pub leading: f64,
    pub lagged: f64,
    pub c_tilde: Vec<f64>,
}

fn check_level(n: usize, mesh: &TemporalMesh) -> Result<()> {
    if n == 0 || n > mesh.len() {
        return invalid(format!("level {n} outside 1..={}", mesh.len()));
    }
    Ok(())
}

/// `c` and `d` for one interval of length `tau` whose right end lies `a`
/// before the evaluation time.
///
/// Distant intervals (`tau < a / 2`) go through the binomial expansion of
/// `(1 + tau/a)^{p}` so that the differences of nearly equal powers never
/// have to be formed.
fn cd_pair(a: f64, tau: f64, alpha: f64, g: &Gammas) -> (f64, f64) {
    if a == 0.0 {
        let s = tau.powf(-alpha);
        return (s / g.g2, alpha * s / g.g3);
    }
    let x = tau / a;
    if x >= 0.5 {
        let big = a + tau;
        let p1 = big.powf(1.0 - alpha);
        let q1 = a.powf(1.0 - alpha);
        let p2 = big.powf(2.0 - alpha);
        let q2 = a.powf(2.0 - alpha);
        let c = (p1 - q1) / (tau * g.g2);
        let d = 2.0 * (p2 - q2) / (tau * tau * g.g3) - (p1 + q1) / (tau * g.g2);
        return (c, d);
    }
    let mut b = 1.0;
    let mut sc = 1.0;
    let mut sd = 0.0;
    let mut m = 0.0;
    loop {
        m += 1.0;
        b *= (-alpha - m + 1.0) / m * x;
        let tc = b / (m + 1.0);
        let td = -b * m / ((m + 1.0) * (m + 2.0));
        sc += tc;
        sd += td;
        if tc.abs() < 1e-18 * sc.abs() && td.abs() < 1e-18 * sd.abs() {
            break;
        }
    }
    let s = a.powf(-alpha) / g.g1;
    (s * sc, s * sd)
}

fn cd_unchecked(n: usize, mesh: &TemporalMesh, g: &Gammas, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    let tn = mesh.t(n);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for k in 1..=n {
        let a = if k == n { 0.0 } else { tn - mesh.t(k) };
        let (ck, dk) = cd_pair(a, mesh.tau(k), alpha, g);
        c[n - k] = ck;
        d[n - k] = dk;
    }
    (c, d)
}

/// Coefficients `c_{n-k}^{(n)}` and `d_{n-k}^{(n)}`, `k = 1..n`.
pub fn coeffs_cd(n: usize, mesh: &TemporalMesh, alpha: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_alpha(alpha)?;
    check_level(n, mesh)?;
    Ok(cd_unchecked(n, mesh, &Gammas::new(alpha), alpha))
}

pub fn theta(alpha: f64) -> Result<f64> {
    check_alpha_closed(alpha)?;
    Ok(theta_unchecked(alpha))
}

fn theta_unchecked(alpha: f64) -> f64 {
    let a2 = alpha * alpha;
    1.0 / (2.0 - alpha)
        + (2f64.powf(1.0 - alpha) * a2 + alpha - 2.0 * a2) / (2.0 * (2.0 - alpha) * (1.0 + RHO_BAR))
}

fn b_from_cd(n: usize, mesh: &TemporalMesh, c: &[f64], d: &[f64]) -> Vec<f64> {
    if n == 1 {
        return vec![c[0]];
    }
    let mut b = vec![0.0; n];
    let rn = mesh.rho(n);
    for k in 1..=n {
        let j = n - k;
        let mut v = c[j];
        if k >= 2 {
            let r = mesh.rho(k);
            v += d[j + 1] / (r * (1.0 + r));
        }
        if k < n {
            v -= d[j] / (1.0 + mesh.rho(k + 1));
        }
        if k == n {
            v += rn * d[0] / (1.0 + rn);
        }
        if k == n - 1 {
            v -= rn * rn * d[0] / (1.0 + rn);
        }
        b[j] = v;
    }
    b
}

fn split_from_cd(n: usize, mesh: &TemporalMesh, c: &[f64], d: &[f64], th: f64) -> ThetaSplit {
    if n == 1 {
        return ThetaSplit {
            leading: th * c[0],
            lagged: 0.0,
            c_tilde: vec![(1.0 - th) * c[0]],
        };
    }
    let rn = mesh.rho(n);
    let leading = th * c[0] + rn * d[0] / (1.0 + rn);
    let lagged = rn * rn * d[0] / (1.0 + rn);
    let mut ct = vec![0.0; n];
    for k in 1..=n {
        let j = n - k;
        ct[j] = if k == 1 {
            c[n - 1] - d[n - 1] / (1.0 + mesh.rho(2))
        } else if k == n {
            (1.0 - th) * c[0] + d[1] / (rn * (1.0 + rn))
        } else {
            let r = mesh.rho(k);
            c[j] + d[j + 1] / (r * (1.0 + r)) - d[j] / (1.0 + mesh.rho(k + 1))
        };
    }
    ThetaSplit {
        leading,
        lagged,
        c_tilde: ct,
    }
}

fn j_from_c_tilde(ct: &[f64]) -> Vec<f64> {
    let mut j = ct.to_vec();
    j[0] *= 2.0;
    j
}

/// Kernels `B_{n-k}^{(n)}` of the L2 formula.
pub fn kernel_row_b(n: usize, mesh: &TemporalMesh, alpha: f64) -> Result<Vec<f64>> {
    let (c, d) = coeffs_cd(n, mesh, alpha)?;
    Ok(b_from_cd(n, mesh, &c, &d))
}

pub fn kernel_row_split(n: usize, mesh: &TemporalMesh, alpha: f64) -> Result<ThetaSplit> {
    let (c, d) = coeffs_cd(n, mesh, alpha)?;
    Ok(split_from_cd(n, mesh, &c, &d, theta_unchecked(alpha)))
}

pub fn kernel_row_j(n: usize, mesh: &TemporalMesh, alpha: f64) -> Result<Vec<f64>> {
    Ok(j_from_c_tilde(&kernel_row_split(n, mesh, alpha)?.c_tilde))
}

pub fn kernel_row(n: usize, mesh: &TemporalMesh, alpha: f64) -> Result<KernelRow> {
    let (c, d) = coeffs_cd(n, mesh, alpha)?;
    let th = theta_unchecked(alpha);
    let b = b_from_cd(n, mesh, &c, &d);
    let split = split_from_cd(n, mesh, &c, &d, th);
    let j = j_from_c_tilde(&split.c_tilde);
    Ok(KernelRow {
        level: n,
        theta: th,
        c,
        d,
        b,
        c_tilde: split.c_tilde,
        j,
    })
}

/// Reusable evaluator holding the gamma constants of one order.
#[derive(Debug, Clone)]
pub struct L2Kernels<'a> {
    mesh: &'a TemporalMesh,
    alpha: f64,
    gammas: Gammas,
}

impl<'a> L2Kernels<'a> {
    pub fn new(mesh: &'a TemporalMesh, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            mesh,
            alpha,
            gammas: Gammas::new(alpha),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mesh(&self) -> &TemporalMesh {
        self.mesh
    }

    pub fn gamma_2(&self) -> f64 {
        self.gammas.g2
    }

    pub fn gamma_3(&self) -> f64 {
        self.gammas.g3
    }

    pub fn b_row(&self, n: usize) -> Result<Vec<f64>> {
        check_level(n, self.mesh)?;
        let (c, d) = cd_unchecked(n, self.mesh, &self.gammas, self.alpha);
        Ok(b_from_cd(n, self.mesh, &c, &d))
    }

    pub fn j_row(&self, n: usize) -> Result<Vec<f64>> {
        check_level(n, self.mesh)?;
        let (c, d) = cd_unchecked(n, self.mesh, &self.gammas, self.alpha);
        let split = split_from_cd(n, self.mesh, &c, &d, theta_unchecked(self.alpha));
        Ok(j_from_c_tilde(&split.c_tilde))
    }
}

fn check_history(len: usize, mesh: &TemporalMesh) -> Result<usize> {
    if len < 2 || len > mesh.len() + 1 {
        return invalid(format!(
            "history of length {len} does not fit a mesh with {} steps",
            mesh.len()
        ));
    }
    Ok(len - 1)
}

/// `sum_k B_{n-k}^{(n)} (w^k - w^{k-1})` with `n = history.len() - 1`.
pub fn apply_caputo(history: &[f64], mesh: &TemporalMesh, alpha: f64) -> Result<f64> {
    let n = check_history(history.len(), mesh)?;
    let b = kernel_row_b(n, mesh, alpha)?;
    Ok((1..=n)
        .map(|k| b[n - k] * (history[k] - history[k - 1]))
        .sum())
}

/// Same value assembled from the theta-split representation.
pub fn apply_caputo_split(history: &[f64], mesh: &TemporalMesh, alpha: f64) -> Result<f64> {
    let n = check_history(history.len(), mesh)?;
    let s = kernel_row_split(n, mesh, alpha)?;
    let dw = |k: usize| history[k] - history[k - 1];
    let mut acc = s.leading * dw(n);
    if n >= 2 {
        acc -= s.lagged * dw(n - 1);
    }
    acc += (1..=n).map(|k| s.c_tilde[n - k] * dw(k)).sum::<f64>();
    Ok(acc)
}

/// Elementwise discrete Caputo derivative of a history of grid functions.
pub fn apply_caputo_grid(
    history: &[GridFunction],
    mesh: &TemporalMesh,
    alpha: f64,
) -> Result<GridFunction> {
    let n = check_history(history.len(), mesh)?;
    let b = kernel_row_b(n, mesh, alpha)?;
    let mut out = history[0].zeros_like();
    for k in 1..=n {
        history[k].check_same_grid(&history[k - 1])?;
        let w = b[n - k];
        for ((o, x), y) in out
            .values_mut()
            .iter_mut()
            .zip(history[k].values())
            .zip(history[k - 1].values())
        {
            *o += w * (x - y);
        }
    }
    Ok(out)
}

/// Marches `sum_k B_{n-k}^{(n)} (w^k - w^{k-1}) = f(t_n)` for `n = 1..N`.
pub fn solve_caputo_ivp(
    mesh: &TemporalMesh,
    alpha: f64,
    w0: f64,
    f: impl Fn(f64) -> f64,
) -> Result<Vec<f64>> {
    let ker = L2Kernels::new(mesh, alpha)?;
    let n_max = mesh.len();
    let mut w = Vec::with_capacity(n_max + 1);
    w.push(w0);
    let mut dw: Vec<f64> = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let b = ker.b_row(n)?;
        let hist: f64 = (1..n).map(|k| b[n - k] * dw[k - 1]).sum();
        let step = (f(mesh.t(n)) - hist) / b[0];
        if !step.is_finite() {
            return Err(Error::Numeric(format!("non-finite increment at level {n}")));
        }
        dw.push(step);
        w.push(w[n - 1] + step);
    }
    Ok(w)
}

/// The ratio function `q(z, y, alpha)` governing the energy estimate.
pub fn q(z: f64, y: f64, alpha: f64) -> f64 {
    let e = 2.0 - alpha / 2.0;
    2.0 * theta_unchecked(alpha) * (2.0 - alpha) + (2.0 * alpha * z - alpha * z.powf(e)) / (1.0 + z)
        - alpha * y.powf(e) / (1.0 + y)
}

pub fn q2(rho: f64, alpha: f64) -> f64 {
    let p = 2f64.powf(-alpha);
    (1.0 + rho) / alpha + rho - rho.powf(2.0 - alpha / 2.0) + p * alpha + 0.5 - alpha
}

pub fn q3(rho: f64, alpha: f64) -> f64 {
    let p = 2f64.powf(-alpha);
    let a2 = alpha * alpha;
    let num = 1.0 + rho - p * a2 + p * a2 * alpha * std::f64::consts::LN_2 + a2;
    let den = 1.0 + rho + alpha * rho + p * a2 + alpha / 2.0 - a2;
    alpha * rho.ln() - 2.0 * num / den
}

/// Bisection until the bracket cannot be split further in double precision.
fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(Error::Numeric(format!(
            "no sign change on [{lo}, {hi}]: f = {flo:e}, {fhi:e}"
        )));
    }
    let mut best = if flo.abs() <= fhi.abs() {
        (lo, flo)
    } else {
        (hi, fhi)
    };
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm.abs() < best.1.abs() {
            best = (mid, fm);
        }
        if fm == 0.0 {
            break;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(best.0)
}

/// Largest admissible step ratio: the root of `q2(., alpha)` above `1 + 1/alpha`.
pub fn rho_star(alpha: f64) -> Result<f64> {
    check_alpha_closed(alpha)?;
    bisect(1.0 + 1.0 / alpha, 10.0 + 20.0 / alpha, |r| q2(r, alpha))
}

/// The minimum of `rho_star` over the order, returned as `(rho, alpha)`.
///
/// Along the root curve of `q2`, `q3` vanishes exactly where the curve is
/// stationary, so the minimizer is found by bisecting `q3(rho*(alpha), alpha)`.
pub fn rho_bar() -> Result<(f64, f64)> {
    let h = |a: f64| match rho_star(a) {
        Ok(r) => q3(r, a),
        Err(_) => f64::NAN,
    };
    let a = bisect(0.5, 0.99, h)?;
    Ok((rho_star(a)?, a))
}

/// Bound on the local truncation error of the L2 formula at level `n`.
pub fn truncation_bound(
    n: usize,
    mesh: &TemporalMesh,
    alpha: f64,
    m2: f64,
    m3: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    check_level(n, mesh)?;
    if m2 < 0.0 || m3 < 0.0 {
        return invalid("derivative bounds must be nonnegative");
    }
    if n == 1 {
        Ok(alpha * m2 * mesh.tau(1).powf(2.0 - alpha) / (2.0 * gamma(3.0 - alpha)))
    } else {
        Ok((3.0 * alpha + 1.0) * m3 * mesh.tau_max().powf(3.0 - alpha)
            / (12.0 * gamma(2.0 - alpha)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_cd(n: usize, mesh: &TemporalMesh, alpha: f64) -> (Vec<f64>, Vec<f64>) {
        let g2 = gamma(2.0 - alpha);
        let g3 = gamma(3.0 - alpha);
        let tn = mesh.t(n);
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for k in 1..=n {
            let (p, q) = (tn - mesh.t(k - 1), tn - mesh.t(k));
            let tau = mesh.tau(k);
            c[n - k] = (p.powf(1.0 - alpha) - q.powf(1.0 - alpha)) / (tau * g2);
            d[n - k] = 2.0 * (p.powf(2.0 - alpha) - q.powf(2.0 - alpha)) / (tau * tau * g3)
                - (p.powf(1.0 - alpha) + q.powf(1.0 - alpha)) / (tau * g2);
        }
        (c, d)
    }

    #[test]
    fn first_level_coefficient() {
        let m = TemporalMesh::uniform(3, 3.0).unwrap();
        let (c, _) = coeffs_cd(1, &m, 0.5).unwrap();
        assert!((c[0] - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-14);
        let b = kernel_row_b(1, &m, 0.5).unwrap();
        assert_eq!(b, c);
    }

    #[test]
    fn most_recent_interval_closed_form() {
        let m = TemporalMesh::graded_cubic(20, 1.0).unwrap();
        for n in [1, 5, 20] {
            let (c, _) = coeffs_cd(n, &m, 0.3).unwrap();
            let want = m.tau(n).powf(-0.3) / gamma(1.7);
            assert!((c[0] - want).abs() < 1e-13 * want);
        }
    }

    #[test]
    fn series_agrees_with_direct_on_moderate_mesh() {
        let m = TemporalMesh::uniform(40, 1.0).unwrap();
        for alpha in [0.1, 0.5, 0.9] {
            let (c, d) = coeffs_cd(40, &m, alpha).unwrap();
            let (cd0, dd0) = direct_cd(40, &m, alpha);
            for j in 0..40 {
                assert!((c[j] - cd0[j]).abs() <= 1e-11 * cd0[j].abs(), "c j={j}");
                assert!(
                    (d[j] - dd0[j]).abs() <= 1e-9 * dd0[j].abs().max(1e-3),
                    "d j={j}"
                );
            }
        }
    }

    #[test]
    fn uniform_second_level_b0() {
        let m = TemporalMesh::uniform(4, 1.0).unwrap();
        let (c, d) = coeffs_cd(2, &m, 0.4).unwrap();
        let b = kernel_row_b(2, &m, 0.4).unwrap();
        assert!((b[0] - (c[0] + d[1] / 2.0 + d[0] / 2.0)).abs() < 1e-14);
    }

    #[test]
    fn linear_function_is_reproduced() {
        let m = TemporalMesh::graded_cubic(30, 1.0).unwrap();
        let alpha = 0.6;
        let w: Vec<f64> = m.nodes().to_vec();
        for n in 2..=30 {
            let v = apply_caputo(&w[..=n], &m, alpha).unwrap();
            let exact = m.t(n).powf(1.0 - alpha) / gamma(2.0 - alpha);
            assert!((v - exact).abs() < 1e-11 * exact, "n={n}");
        }
    }

    #[test]
    fn quadratic_exact_for_n_ge_2() {
        let m = TemporalMesh::custom(&[0.1, 0.15, 0.4, 0.5, 0.9, 2.0]).unwrap();
        let alpha = 0.35;
        let w: Vec<f64> = m.nodes().iter().map(|t| t * t).collect();
        for n in 2..=m.len() {
            let v = apply_caputo(&w[..=n], &m, alpha).unwrap();
            let exact = 2.0 * m.t(n).powf(2.0 - alpha) / gamma(3.0 - alpha);
            assert!((v - exact).abs() < 1e-12 * exact, "n={n}");
        }
    }

    #[test]
    fn split_matches_first_level_shape() {
        let m = TemporalMesh::graded_cubic(5, 1.0).unwrap();
        let s = kernel_row_split(1, &m, 0.5).unwrap();
        let (c, d) = coeffs_cd(1, &m, 0.5).unwrap();
        let th = theta(0.5).unwrap();
        assert_eq!(s.lagged, 0.0);
        assert!((s.leading - th * c[0]).abs() < 1e-15 * c[0]);
        assert!((s.c_tilde[0] - (1.0 - th) * c[0]).abs() < 1e-15 * c[0]);
        let s2 = kernel_row_split(2, &m, 0.5).unwrap();
        let (c, d2) = coeffs_cd(2, &m, 0.5).unwrap();
        let r = m.rho(2);
        let want = (1.0 - th) * c[0] + d2[1] / (r * (1.0 + r));
        assert!((s2.c_tilde[0] - want).abs() < 1e-14 * want.abs());
        let _ = d;
        let j = kernel_row_j(1, &m, 0.5).unwrap();
        assert!((j[0] - 2.0 * (1.0 - th) * c_first(&m)).abs() < 1e-14);
    }

    fn c_first(m: &TemporalMesh) -> f64 {
        coeffs_cd(1, m, 0.5).unwrap().0[0]
    }

    #[test]
    fn theta_limits() {
        assert!((theta(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((theta(1e-9).unwrap() - 0.5).abs() < 1e-8);
        assert!(theta(0.0).is_err());
        let a: f64 = 0.5;
        let want = 1.0 / 1.5 + (2f64.sqrt() * 0.25 + 0.5 - 0.5) / (3.0 * 5.7476114);
        assert!((theta(a).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn q_at_unit_ratios() {
        assert!((q(1.0, 1.0, 1.0) - 2.0).abs() < 1e-14);
        for a in [0.1, 0.5, 0.9] {
            let want = 2.0 / a + 2f64.powf(-a) * a + 0.5 - a;
            assert!((q2(1.0, a) - want).abs() < 1e-13);
        }
    }

    #[test]
    fn rho_star_values() {
        let r1 = rho_star(1.0).unwrap();
        assert!((r1 - 4.864).abs() < 5e-3);
        assert!(q2(4.864, 1.0).abs() < 5e-3);
        assert!((rho_star(0.82265).unwrap() - 4.7476114).abs() < 1e-6);
        assert!(rho_star(0.1).unwrap() > 10.0);
        for a in [0.05, 0.3, 0.7, 1.0] {
            let r = rho_star(a).unwrap();
            assert!(q2(r, a).abs() <= 1e-12);
            // q(z, z) differs from the rescaled q2(z) only through the frozen constant in theta.
            let num = 2f64.powf(1.0 - a) * a * a + a - 2.0 * a * a;
            let want =
                2.0 * a / (1.0 + r) * q2(r, a) + num * (1.0 / (1.0 + RHO_BAR) - 1.0 / (1.0 + r));
            assert!((q(r, r, a) - want).abs() < 1e-12);
            assert!(q(r, r, a) >= -1e-12);
        }
        assert!(rho_star(0.0).is_err());
        assert!(rho_star(1.5).is_err());
    }

    #[test]
    fn rho_bar_pair() {
        let (r, a) = rho_bar().unwrap();
        assert!((r - 4.7476114).abs() < 1e-4);
        assert!((a - 0.82265).abs() < 1e-4);
        assert!(q2(r, a).abs() < 1e-8);
        assert!(rho_star(a - 0.05).unwrap() > r);
        assert!(rho_star(a + 0.05).unwrap() > r);
        assert!(q(r, r, a).abs() < 1e-7);
        let v = q2(RHO_BAR, 0.82265);
        assert!(v > 0.0 && v < 1e-6);
        assert!((v - 9.3942e-8).abs() < 1e-11);
    }

    #[test]
    fn truncation_bound_scaling() {
        let m = TemporalMesh::uniform(4, 1.0).unwrap();
        assert_eq!(truncation_bound(1, &m, 0.5, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(truncation_bound(3, &m, 0.5, 0.0, 0.0).unwrap(), 0.0);
        let half = TemporalMesh::uniform(8, 1.0).unwrap();
        let r = truncation_bound(1, &m, 0.4, 1.0, 0.0).unwrap()
            / truncation_bound(1, &half, 0.4, 1.0, 0.0).unwrap();
        assert!((r - 2f64.powf(1.6)).abs() < 1e-12);
    }

    #[test]
    fn truncation_bound_dominates_uniform_error() {
        let alpha = 0.5;
        let m = TemporalMesh::uniform(100, 1.0).unwrap();
        let w: Vec<f64> = m.nodes().iter().map(|t| t.powf(3.0 + alpha)).collect();
        let m2 = (3.0 + alpha) * (2.0 + alpha);
        let m3 = (3.0 + alpha) * (2.0 + alpha) * (1.0 + alpha);
        let g = gamma(4.0 + alpha) / 6.0;
        for n in 1..=100 {
            let err = (apply_caputo(&w[..=n], &m, alpha).unwrap() - g * m.t(n).powi(3)).abs();
            assert!(
                err <= truncation_bound(n, &m, alpha, m2, m3).unwrap(),
                "n={n}"
            );
        }
    }

    #[test]
    fn constant_history_gives_zero() {
        let m = TemporalMesh::graded_cubic(10, 1.0).unwrap();
        assert_eq!(apply_caputo(&[3.0; 11], &m, 0.7).unwrap(), 0.0);
        assert!(apply_caputo(&[1.0; 12], &m, 0.7).is_err());
        assert!(apply_caputo(&[1.0], &m, 0.7).is_err());
    }
}
