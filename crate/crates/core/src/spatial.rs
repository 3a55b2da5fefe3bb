//! Fourth-order compact operators on a uniform grid with homogeneous
//! Dirichlet boundary.
//!
//! A [`GridFunction`] carries all `M + 1` nodal values; operators act on the
//! interior nodes `1..M-1` and return zero boundary entries.

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
    a: f64,
    b: f64,
}

impl GridFunction {
    /// Zero function on `M` intervals of `(a, b)`.
    pub fn zeros(m: usize, a: f64, b: f64) -> Result<Self> {
        if m < 2 {
            return invalid(format!("need at least 2 intervals, got {m}"));
        }
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return invalid(format!("empty domain ({a}, {b})"));
        }
        Ok(Self {
            values: vec![0.0; m + 1],
            a,
            b,
        })
    }

    /// Builds a function from all `M + 1` nodal values.
    pub fn from_values(values: Vec<f64>, a: f64, b: f64) -> Result<Self> {
        let mut g = Self::zeros(values.len().saturating_sub(1), a, b)?;
        g.values = values;
        Ok(g)
    }

    /// Samples `f` at the interior nodes; the boundary entries are set to 0.
    pub fn sample_interior(m: usize, a: f64, b: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut g = Self::zeros(m, a, b)?;
        for i in 1..m {
            let x = g.x(i);
            g.values[i] = f(x);
        }
        Ok(g)
    }

    /// Samples `f` at every node including the boundary.
    pub fn sample(m: usize, a: f64, b: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut g = Self::zeros(m, a, b)?;
        for i in 0..=m {
            let x = g.x(i);
            g.values[i] = f(x);
        }
        Ok(g)
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            values: vec![0.0; self.values.len()],
            a: self.a,
            b: self.b,
        }
    }

    pub fn m(&self) -> usize {
        self.values.len() - 1
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.m() as f64
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.m() {
            self.b
        } else {
            self.a + i as f64 * self.h()
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn interior(&self) -> &[f64] {
        &self.values[1..self.m()]
    }

    pub fn interior_mut(&mut self) -> &mut [f64] {
        let m = self.m();
        &mut self.values[1..m]
    }

    pub fn has_zero_boundary(&self) -> bool {
        self.values[0] == 0.0 && self.values[self.m()] == 0.0
    }

    /// Copy with the boundary entries cleared.
    pub fn with_zero_boundary(&self) -> Self {
        let mut g = self.clone();
        let m = g.m();
        g.values[0] = 0.0;
        g.values[m] = 0.0;
        g
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.values.len() != other.values.len() || self.a != other.a || self.b != other.b {
            return invalid(format!(
                "grid mismatch: M={} on ({}, {}) vs M={} on ({}, {})",
                self.m(),
                self.a,
                self.b,
                other.m(),
                other.a,
                other.b
            ));
        }
        Ok(())
    }

    fn with_interior(&self, interior: Vec<f64>) -> Self {
        let mut values = Vec::with_capacity(interior.len() + 2);
        values.push(0.0);
        values.extend(interior);
        values.push(0.0);
        Self {
            values,
            a: self.a,
            b: self.b,
        }
    }

    fn map_interior(&self, f: impl Fn(usize, &[f64]) -> f64) -> Self {
        let m = self.m();
        let mut out = self.zeros_like();
        for i in 1..m {
            out.values[i] = f(i, &self.values);
        }
        out
    }

    /// `self - other` at every node.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| x - y)
            .collect();
        Ok(Self {
            values,
            a: self.a,
            b: self.b,
        })
    }

    /// `self + s * other` at every node.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| x + s * y)
            .collect();
        Ok(Self {
            values,
            a: self.a,
            b: self.b,
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            values: self.values.iter().map(|x| s * x).collect(),
            a: self.a,
            b: self.b,
        }
    }
}

/// Solves a constant-coefficient tridiagonal system `lo*x_{i-1} + di*x_i + up*x_{i+1} = r_i`
/// with the forward-elimination / back-substitution recurrence.
pub fn solve_tridiagonal(lo: f64, di: f64, up: f64, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    if n == 0 {
        return Vec::new();
    }
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = up / di;
    dp[0] = rhs[0] / di;
    for i in 1..n {
        let den = di - lo * cp[i - 1];
        cp[i] = up / den;
        dp[i] = (rhs[i] - lo * dp[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

/// Averaging operator `(u_{i-1} + 10 u_i + u_{i+1}) / 12` on interior nodes.
pub fn apply_a(u: &GridFunction) -> GridFunction {
    u.map_interior(|i, v| (v[i - 1] + 10.0 * v[i] + v[i + 1]) / 12.0)
}

/// Inverse of [`apply_a`] on the zero-boundary space.
pub fn apply_a_inv(u: &GridFunction) -> GridFunction {
    let w = solve_tridiagonal(1.0 / 12.0, 10.0 / 12.0, 1.0 / 12.0, u.interior());
    u.with_interior(w)
}

/// Second difference `(u_{i-1} - 2u_i + u_{i+1}) / h^2`.
pub fn apply_dxx(u: &GridFunction) -> GridFunction {
    let h2 = u.h() * u.h();
    u.map_interior(|i, v| (v[i - 1] - 2.0 * v[i] + v[i + 1]) / h2)
}

/// `H = A^{-1} dxx`.
pub fn apply_h(u: &GridFunction) -> GridFunction {
    apply_a_inv(&apply_dxx(&u.with_zero_boundary()))
}

/// `(-H)^{-1} u`, the solution `w` of `dxx w = -A u`.
pub fn apply_neg_h_inv(u: &GridFunction) -> GridFunction {
    let h2 = u.h() * u.h();
    let rhs: Vec<f64> = apply_a(&u.with_zero_boundary())
        .interior()
        .iter()
        .map(|x| -x)
        .collect();
    let w = solve_tridiagonal(1.0 / h2, -2.0 / h2, 1.0 / h2, &rhs);
    u.with_interior(w)
}

/// Discrete inner product `h * sum_{i=1}^{M-1} u_i v_i`.
pub fn inner(u: &GridFunction, v: &GridFunction) -> Result<f64> {
    u.check_same_grid(v)?;
    Ok(inner_unchecked(u, v))
}

pub(crate) fn inner_unchecked(u: &GridFunction, v: &GridFunction) -> f64 {
    u.h()
        * u.interior()
            .iter()
            .zip(v.interior())
            .map(|(x, y)| x * y)
            .sum::<f64>()
}

pub fn norm_l2(u: &GridFunction) -> f64 {
    inner_unchecked(u, u).sqrt()
}

pub fn norm_inf(u: &GridFunction) -> f64 {
    u.interior().iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Square root of `(-H u, u)`.
pub fn norm_grad_h(u: &GridFunction) -> f64 {
    norm_grad_h_sq(u).max(0.0).sqrt()
}

pub fn norm_grad_h_sq(u: &GridFunction) -> f64 {
    -inner_unchecked(&apply_h(u), u)
}

/// `(u, (-H)^{-1} v)`.
pub fn inner_neg_h(u: &GridFunction, v: &GridFunction) -> Result<f64> {
    u.check_same_grid(v)?;
    Ok(inner_unchecked(u, &apply_neg_h_inv(v)))
}

/// Elementwise power at every node.
pub fn hadamard_pow(u: &GridFunction, p: u32) -> GridFunction {
    let mut out = u.clone();
    for x in out.values_mut() {
        *x = x.powi(p as i32);
    }
    out
}

/// Difference-quotient norm `(1/h) sum_{i=1}^{M} (u_i - u_{i-1})^2`.
pub fn norm_dx_sq(u: &GridFunction) -> f64 {
    let v = u.values();
    v.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / u.h()
}

/// `(A u, -dxx u)`.
pub fn norm_dx_a_sq(u: &GridFunction) -> f64 {
    -inner_unchecked(&apply_a(u), &apply_dxx(u))
}
