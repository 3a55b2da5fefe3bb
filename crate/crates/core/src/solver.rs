//! Time marching of the compact L2 scheme for
//! `d_t^alpha u = kappa * Lap(u^3 - u) - kappa * eps^2 * Lap^2 u + g`
//! with homogeneous Dirichlet data for `u` and `Lap u`.
//!
//! Each step solves the nonlinear system by a simple iteration that lags the
//! cubic term only:
//!
//! ```text
//! [B_0 A + kappa dxx + kappa eps^2 dxx A^{-1} dxx] u^{(s+1)}
//!     = kappa dxx (u^{(s)})^3 + A (B_0 u^{n-1} - sum_{k<n} B_{n-k} (u^k - u^{k-1})) + A g(., t_n)
//! ```

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, LU};
use statrs::function::gamma::gamma;

use crate::caputo::{q, L2Kernels};
use crate::error::{check_alpha, invalid, Error, Result};
use crate::mesh::{validate_ratio_bound, TemporalMesh};
use crate::spatial::{apply_a, apply_dxx, GridFunction};

pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type SpaceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Source {
    None,
    /// Forcing that makes `x^4 (1-x)^4 t^{3+alpha}` an exact solution on (0,1).
    Manufactured,
    Custom(SpaceTimeFn),
}

#[derive(Clone)]
pub enum Initial {
    Zero,
    /// `s^4 (1-s)^4` with `s` the position rescaled to (0,1).
    Bump,
    Custom(SpaceFn),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nonlinearity {
    /// `f(u) = u^3 - u`.
    DoubleWell,
    /// `f(u) = -u`; the step becomes a single linear solve.
    Linear,
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::None => write!(f, "none"),
            Source::Manufactured => write!(f, "manufactured"),
            Source::Custom(_) => write!(f, "custom"),
        }
    }
}

impl fmt::Debug for Initial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Initial::Zero => write!(f, "zero"),
            Initial::Bump => write!(f, "bump"),
            Initial::Custom(_) => write!(f, "custom"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub alpha: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub domain: (f64, f64),
    pub m: usize,
    pub mesh: TemporalMesh,
    pub iteration_tol: f64,
    pub max_iterations: usize,
    pub source: Source,
    pub initial: Initial,
    pub nonlinearity: Nonlinearity,
}

impl SolverConfig {
    /// Unit domain, `kappa = 0.01`, `eps = 0.1`, bump initial data, no source.
    pub fn new(alpha: f64, m: usize, mesh: TemporalMesh) -> Self {
        Self {
            alpha,
            kappa: 0.01,
            epsilon: 0.1,
            domain: (0.0, 1.0),
            m,
            mesh,
            iteration_tol: 1e-10,
            max_iterations: 500,
            source: Source::None,
            initial: Initial::Bump,
            nonlinearity: Nonlinearity::DoubleWell,
        }
    }

    /// Zero initial data and the manufactured forcing.
    pub fn manufactured(alpha: f64, m: usize, mesh: TemporalMesh) -> Self {
        Self {
            source: Source::Manufactured,
            initial: Initial::Zero,
            ..Self::new(alpha, m, mesh)
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if !(self.kappa > 0.0 && self.epsilon > 0.0) {
            return invalid("kappa and epsilon must be positive");
        }
        if !(self.domain.1 > self.domain.0) {
            return invalid("domain must satisfy a < b");
        }
        if self.m < 4 {
            return invalid(format!("M must be at least 4, got {}", self.m));
        }
        if !(self.iteration_tol > 0.0) || self.max_iterations == 0 {
            return invalid("iteration tolerance and cap must be positive");
        }
        if matches!(self.source, Source::Manufactured) && self.domain != (0.0, 1.0) {
            return invalid("the manufactured source is defined on (0,1) only");
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        (self.domain.1 - self.domain.0) / self.m as f64
    }

    /// Sampled initial state with zero boundary entries.
    pub fn initial_state(&self) -> Result<GridFunction> {
        let (a, b) = self.domain;
        match &self.initial {
            Initial::Zero => GridFunction::zeros(self.m, a, b),
            Initial::Bump => GridFunction::sample_interior(self.m, a, b, |x| {
                let s = (x - a) / (b - a);
                (s * (1.0 - s)).powi(4)
            }),
            Initial::Custom(f) => GridFunction::sample_interior(self.m, a, b, |x| f(x)),
        }
    }

    /// Source sampled on every node at time `t` (boundary values included).
    pub fn source_at(&self, t: f64) -> Result<Option<GridFunction>> {
        let (a, b) = self.domain;
        let (alpha, kappa, eps) = (self.alpha, self.kappa, self.epsilon);
        Ok(match &self.source {
            Source::None => None,
            Source::Manufactured => Some(GridFunction::sample(self.m, a, b, |x| {
                manufactured_source(x, t, alpha, kappa, eps)
            })?),
            Source::Custom(g) => Some(GridFunction::sample(self.m, a, b, |x| g(x, t))?),
        })
    }
}

/// Exact solution paired with [`manufactured_source`].
pub fn manufactured_solution(x: f64, t: f64, alpha: f64) -> f64 {
    (x * (1.0 - x)).powi(4) * t.powf(3.0 + alpha)
}

/// Forcing for the exact solution `x^4 (1-x)^4 t^{3+alpha}`.
pub fn manufactured_source(x: f64, t: f64, alpha: f64, kappa: f64, epsilon: f64) -> f64 {
    let y = 1.0 - x;
    let p = |b: f64, e: i32| b.powi(e);
    let frac = gamma(4.0 + alpha) / 6.0 * p(x, 4) * p(y, 4) * t.powi(3);
    let cubic =
        132.0 * p(x, 10) * p(y, 12) - 288.0 * p(x, 11) * p(y, 11) + 132.0 * p(x, 12) * p(y, 10);
    let biharm = 24.0 * p(y, 4) - 384.0 * x * p(y, 3) + 864.0 * p(x, 2) * p(y, 2)
        - 384.0 * p(x, 3) * y
        + 24.0 * p(x, 4);
    let lap = 12.0 * p(x, 2) * p(y, 4) - 32.0 * p(x, 3) * p(y, 3) + 12.0 * p(x, 4) * p(y, 2);
    let s = t.powf(3.0 + alpha);
    frac - kappa * cubic * t.powf(9.0 + 3.0 * alpha)
        + kappa * epsilon * epsilon * biharm * s
        + kappa * lap * s
}

/// Largest step allowed by the unique-solvability condition.
pub fn solvability_step_bound(alpha: f64, h: f64, kappa: f64, rho_n: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(h > 0.0 && kappa > 0.0 && rho_n >= 0.0) {
        return invalid("h, kappa must be positive and rho nonnegative");
    }
    let v =
        (2.0 - alpha + 2.0 * rho_n) * h * h / (12.0 * kappa * (1.0 + rho_n) * gamma(3.0 - alpha));
    Ok(v.powf(1.0 / alpha))
}

/// Largest `tau_n` for which the modified energy cannot increase at step `n >= 2`.
pub fn energy_step_bound(
    alpha: f64,
    kappa: f64,
    epsilon: f64,
    rho_n: f64,
    rho_next: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    if !(kappa > 0.0 && epsilon > 0.0) {
        return invalid("kappa and epsilon must be positive");
    }
    let qv = q(rho_n, rho_next, alpha);
    if !(qv > 0.0) {
        return invalid(format!(
            "inadmissible ratios ({rho_n}, {rho_next}): q = {qv}"
        ));
    }
    Ok((4.0 * epsilon * epsilon * qv / (kappa * gamma(3.0 - alpha))).powf(1.0 / alpha))
}

/// Largest `tau_1` for which `E^1 <= E^0`.
pub fn first_step_energy_bound(alpha: f64, kappa: f64, epsilon: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(kappa > 0.0 && epsilon > 0.0) {
        return invalid("kappa and epsilon must be positive");
    }
    Ok((8.0 * epsilon * epsilon / (kappa * gamma(2.0 - alpha))).powf(1.0 / alpha))
}

/// Largest step for the error estimate with a Lipschitz constant `l` of `f`.
pub fn lipschitz_step_bound(alpha: f64, kappa: f64, epsilon: f64, l: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(kappa > 0.0 && epsilon > 0.0 && l > 0.0) {
        return invalid("kappa, epsilon and L must be positive");
    }
    Ok((2.0 * epsilon * epsilon / (kappa * l * l * gamma(2.0 - alpha))).powf(1.0 / alpha))
}

/// Step-size admissibility of one step; each flag is `true` when the bound holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepFlags {
    pub solvability: bool,
    pub energy: bool,
    pub lipschitz: bool,
    /// `max |f'(u)|` over the new state, used as the local Lipschitz constant.
    pub lipschitz_constant: f64,
}

#[derive(Debug, Clone)]
pub struct RunHistory {
    pub states: Vec<GridFunction>,
    pub iterations: Vec<usize>,
    pub residuals: Vec<f64>,
    pub validator_flags: Vec<StepFlags>,
    /// Whether the mesh satisfies `1 <= rho_k <= rho*(alpha)`.
    pub ratio_bound_ok: bool,
}

impl RunHistory {
    pub fn terminal(&self) -> &GridFunction {
        self.states
            .last()
            .expect("history holds at least the initial state")
    }

    /// `v^n = -A^{-1} dxx u^n`.
    pub fn chemical_part(&self, n: usize) -> GridFunction {
        crate::spatial::apply_h(&self.states[n]).scale(-1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub iterations: usize,
    pub residual: f64,
}

fn tridiag(n: usize, lo: f64, di: f64, up: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            di
        } else if i + 1 == j {
            up
        } else if j + 1 == i {
            lo
        } else {
            0.0
        }
    })
}

/// Operators of one configuration on the `M - 1` interior unknowns.
struct Operators {
    a: DMatrix<f64>,
    /// `kappa dxx + kappa eps^2 dxx A^{-1} dxx`
    k: DMatrix<f64>,
}

impl Operators {
    fn new(cfg: &SolverConfig) -> Result<Self> {
        let n = cfg.m - 1;
        let h2 = cfg.h() * cfg.h();
        let a = tridiag(n, 1.0 / 12.0, 10.0 / 12.0, 1.0 / 12.0);
        let d = tridiag(n, 1.0 / h2, -2.0 / h2, 1.0 / h2);
        let a_inv_d = a
            .clone()
            .lu()
            .solve(&d)
            .ok_or_else(|| Error::Numeric("averaging operator is singular".into()))?;
        let bih = &d * a_inv_d;
        let k = d * cfg.kappa + bih * (cfg.kappa * cfg.epsilon * cfg.epsilon);
        Ok(Self { a, k })
    }

    fn factor(&self, b0: f64) -> LU<f64, nalgebra::Dyn, nalgebra::Dyn> {
        (&self.a * b0 + &self.k).lu()
    }
}

fn cubic_rhs(u: &GridFunction, kappa: f64, nl: Nonlinearity) -> GridFunction {
    match nl {
        Nonlinearity::DoubleWell => {
            let cube = crate::spatial::hadamard_pow(u, 3);
            apply_dxx(&cube).scale(kappa)
        }
        Nonlinearity::Linear => u.zeros_like(),
    }
}

/// Iterates one step from `u^{(0)} = u^{n-1}` given the fixed right-hand part.
fn iterate(
    lu: &LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    fixed: &GridFunction,
    start: &GridFunction,
    cfg: &SolverConfig,
    n: usize,
) -> Result<(GridFunction, StepOutcome)> {
    let mut u = start.clone();
    let mut last = f64::INFINITY;
    for s in 1..=cfg.max_iterations {
        let lag = cubic_rhs(&u, cfg.kappa, cfg.nonlinearity);
        let rhs = DVector::from_iterator(
            cfg.m - 1,
            lag.interior()
                .iter()
                .zip(fixed.interior())
                .map(|(x, y)| x + y),
        );
        let sol = lu
            .solve(&rhs)
            .ok_or_else(|| Error::Numeric(format!("singular step operator at level {n}")))?;
        let mut next = u.zeros_like();
        next.interior_mut().copy_from_slice(sol.as_slice());
        let change = next
            .interior()
            .iter()
            .zip(u.interior())
            .fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()));
        if !change.is_finite() {
            return Err(Error::Numeric(format!("iteration diverged at level {n}")));
        }
        u = next;
        last = change;
        if change <= cfg.iteration_tol || cfg.nonlinearity == Nonlinearity::Linear {
            return Ok((
                u,
                StepOutcome {
                    iterations: s,
                    residual: change,
                },
            ));
        }
    }
    Err(Error::NonConvergence {
        step: n,
        residual: last,
    })
}

/// `A (B_0 u^{n-1} - sum_{k<n} B_{n-k} (u^k - u^{k-1})) + A g(., t_n)` on the interior.
fn fixed_part(
    b: &[f64],
    history: &[GridFunction],
    increments: &[GridFunction],
    cfg: &SolverConfig,
    n: usize,
) -> Result<GridFunction> {
    let mut acc = history[n - 1].scale(b[0]);
    for k in 1..n {
        let w = b[n - k];
        for (o, x) in acc
            .interior_mut()
            .iter_mut()
            .zip(increments[k - 1].interior())
        {
            *o -= w * x;
        }
    }
    let mut out = apply_a(&acc);
    if let Some(g) = cfg.source_at(cfg.mesh.t(n))? {
        let v = g.values();
        for (i, o) in out.interior_mut().iter_mut().enumerate() {
            *o += (v[i] + 10.0 * v[i + 1] + v[i + 2]) / 12.0;
        }
    }
    Ok(out)
}

fn flags_for_step(cfg: &SolverConfig, n: usize, u: &GridFunction) -> Result<StepFlags> {
    let mesh = &cfg.mesh;
    let tau = mesh.tau(n);
    let rho_n = mesh.rho(n);
    let solvability =
        mesh.tau_max() <= solvability_step_bound(cfg.alpha, cfg.h(), cfg.kappa, rho_n)?;
    let energy = if n == 1 {
        tau <= first_step_energy_bound(cfg.alpha, cfg.kappa, cfg.epsilon)?
    } else {
        match energy_step_bound(
            cfg.alpha,
            cfg.kappa,
            cfg.epsilon,
            rho_n,
            mesh.rho_or_one(n + 1),
        ) {
            Ok(bound) => tau <= bound,
            Err(_) => false,
        }
    };
    let l = u
        .interior()
        .iter()
        .fold(0.0, |m: f64, x| m.max((3.0 * x * x - 1.0).abs()));
    let lipschitz = match lipschitz_step_bound(cfg.alpha, cfg.kappa, cfg.epsilon, l) {
        Ok(bound) => mesh.tau_max() <= bound,
        Err(_) => true,
    };
    Ok(StepFlags {
        solvability,
        energy,
        lipschitz,
        lipschitz_constant: l,
    })
}

/// Advances one level: computes `u^n` from `history = [u^0, ..., u^{n-1}]`.
pub fn step_fixed_point(
    n: usize,
    history: &[GridFunction],
    cfg: &SolverConfig,
) -> Result<(GridFunction, StepOutcome)> {
    cfg.validate()?;
    if n == 0 || n > cfg.mesh.len() || history.len() != n {
        return invalid(format!(
            "level {n} needs exactly {n} prior states, got {}",
            history.len()
        ));
    }
    let ops = Operators::new(cfg)?;
    let ker = L2Kernels::new(&cfg.mesh, cfg.alpha)?;
    let b = ker.b_row(n)?;
    let increments: Vec<GridFunction> = history
        .windows(2)
        .map(|w| w[1].sub(&w[0]))
        .collect::<Result<_>>()?;
    let fixed = fixed_part(&b, history, &increments, cfg, n)?;
    iterate(&ops.factor(b[0]), &fixed, &history[n - 1], cfg, n)
}

/// Runs the scheme over the whole mesh.
pub fn solve(cfg: &SolverConfig) -> Result<RunHistory> {
    cfg.validate()?;
    let ratio_bound_ok = validate_ratio_bound(&cfg.mesh, cfg.alpha)?.passed();
    let ops = Operators::new(cfg)?;
    let ker = L2Kernels::new(&cfg.mesh, cfg.alpha)?;
    let n_max = cfg.mesh.len();
    let mut states = Vec::with_capacity(n_max + 1);
    states.push(cfg.initial_state()?);
    let mut increments: Vec<GridFunction> = Vec::with_capacity(n_max);
    let mut iterations = Vec::with_capacity(n_max);
    let mut residuals = Vec::with_capacity(n_max);
    let mut validator_flags = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let b = ker.b_row(n)?;
        let fixed = fixed_part(&b, &states, &increments, cfg, n)?;
        let (u, out) = iterate(&ops.factor(b[0]), &fixed, &states[n - 1], cfg, n)?;
        validator_flags.push(flags_for_step(cfg, n, &u)?);
        increments.push(u.sub(&states[n - 1])?);
        states.push(u);
        iterations.push(out.iterations);
        residuals.push(out.residual);
    }
    Ok(RunHistory {
        states,
        iterations,
        residuals,
        validator_flags,
        ratio_bound_ok,
    })
}

/// Max-norm defect of the converged state `u^n` in the step equation.
pub fn scheme_residual(cfg: &SolverConfig, run: &RunHistory, n: usize) -> Result<f64> {
    if n == 0 || n >= run.states.len() {
        return invalid(format!("level {n} outside the run"));
    }
    let ops = Operators::new(cfg)?;
    let ker = L2Kernels::new(&cfg.mesh, cfg.alpha)?;
    let b = ker.b_row(n)?;
    let increments: Vec<GridFunction> = run.states[..n]
        .windows(2)
        .map(|w| w[1].sub(&w[0]))
        .collect::<Result<_>>()?;
    let fixed = fixed_part(&b, &run.states, &increments, cfg, n)?;
    let u = &run.states[n];
    let lag = cubic_rhs(u, cfg.kappa, cfg.nonlinearity);
    let x = DVector::from_column_slice(u.interior());
    let lhs = (&ops.a * b[0] + &ops.k) * x;
    Ok(lhs
        .iter()
        .zip(lag.interior().iter().zip(fixed.interior()))
        .fold(0.0, |m: f64, (l, (g, f))| m.max((l - g - f).abs())))
}

/// Terminal state of a run on the graded cubic mesh with `n0` steps.
pub fn reference_solution(cfg: &SolverConfig, n0: usize) -> Result<GridFunction> {
    let mesh = TemporalMesh::graded_cubic(n0, cfg.mesh.horizon())?;
    let run = solve(&SolverConfig {
        mesh,
        ..cfg.clone()
    })?;
    Ok(run.terminal().clone())
}
