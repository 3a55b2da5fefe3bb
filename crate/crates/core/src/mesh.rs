//! Nonuniform temporal meshes.
//!
//! Indexing follows the usual convention: nodes `t_0..t_N`, steps
//! `tau_k = t_k - t_{k-1}` for `k = 1..N` and ratios `rho_k = tau_k / tau_{k-1}`
//! for `k >= 2`, with `rho_1 = 0`.

use crate::caputo::rho_star;
use crate::error::{check_alpha, invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    GradedCubic,
    Uniform,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalMesh {
    nodes: Vec<f64>,
    steps: Vec<f64>,
    ratios: Vec<f64>,
    horizon: f64,
    kind: MeshKind,
}

fn check_size(n: usize, horizon: f64) -> Result<()> {
    if n == 0 {
        return invalid("mesh needs at least one step");
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return invalid(format!("horizon must be positive, got {horizon}"));
    }
    Ok(())
}

/// `sum_{k=1}^{n} (2k+1)^3`, which equals `n(n+2)(2n^2+4n+3)`.
pub fn graded_cubic_denominator(n: u64) -> u128 {
    let n = n as u128;
    n * (n + 2) * (2 * n * n + 4 * n + 3)
}

impl TemporalMesh {
    /// Mesh with `tau_k = (2k+1)^3 T / (N(N+2)(2N^2+4N+3))`.
    pub fn graded_cubic(n: usize, horizon: f64) -> Result<Self> {
        check_size(n, horizon)?;
        let denom = graded_cubic_denominator(n as u64) as f64;
        let steps = (1..=n)
            .map(|k| {
                let q = (2 * k + 1) as f64;
                q * q * q * horizon / denom
            })
            .collect();
        Ok(Self::assemble(steps, Some(horizon), MeshKind::GradedCubic))
    }

    pub fn uniform(n: usize, horizon: f64) -> Result<Self> {
        check_size(n, horizon)?;
        let tau = horizon / n as f64;
        Ok(Self::assemble(
            vec![tau; n],
            Some(horizon),
            MeshKind::Uniform,
        ))
    }

    pub fn custom(steps: &[f64]) -> Result<Self> {
        if steps.is_empty() {
            return invalid("mesh needs at least one step");
        }
        if let Some(k) = steps.iter().position(|&s| !(s > 0.0 && s.is_finite())) {
            return invalid(format!("step {} is not positive: {}", k + 1, steps[k]));
        }
        Ok(Self::assemble(steps.to_vec(), None, MeshKind::Custom))
    }

    fn assemble(steps: Vec<f64>, horizon: Option<f64>, kind: MeshKind) -> Self {
        let n = steps.len();
        let mut nodes = Vec::with_capacity(n + 1);
        nodes.push(0.0);
        let mut acc = 0.0;
        for &s in &steps {
            acc += s;
            nodes.push(acc);
        }
        let horizon = match horizon {
            Some(h) => {
                nodes[n] = h;
                h
            }
            None => acc,
        };
        let mut ratios = vec![0.0; n];
        for k in 1..n {
            ratios[k] = steps[k] / steps[k - 1];
        }
        Self {
            nodes,
            steps,
            ratios,
            horizon,
            kind,
        }
    }

    /// Number of steps `N`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `t_n` for `n = 0..N`.
    pub fn t(&self, n: usize) -> f64 {
        self.nodes[n]
    }

    /// `tau_k` for `k = 1..N`.
    pub fn tau(&self, k: usize) -> f64 {
        self.steps[k - 1]
    }

    /// `rho_k` for `k = 1..N` (`rho_1 = 0`).
    pub fn rho(&self, k: usize) -> f64 {
        self.ratios[k - 1]
    }

    /// `rho_k` for `k = 2..N`, and 1 for `k = N+1`.
    pub fn rho_or_one(&self, k: usize) -> f64 {
        if k > self.len() {
            1.0
        } else {
            self.rho(k)
        }
    }

    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    /// Ratios indexed from `k = 1`; the first entry is the placeholder 0.
    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn tau_max(&self) -> f64 {
        self.steps.iter().cloned().fold(0.0, f64::max)
    }

    /// `(k, t_k, tau_k, rho_k)` rows for `k = 0..N`; `tau_0` and `rho_0` are absent.
    pub fn rows(&self) -> Vec<(usize, f64, Option<f64>, Option<f64>)> {
        (0..=self.len())
            .map(|k| {
                if k == 0 {
                    (0, self.nodes[0], None, None)
                } else {
                    (k, self.nodes[k], Some(self.tau(k)), Some(self.rho(k)))
                }
            })
            .collect()
    }
}

/// Outcome of checking `1 <= rho_k <= rho*(alpha)` along a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub rho_star: f64,
    pub passes: Vec<bool>,
    pub offending: Vec<usize>,
}

impl RatioReport {
    pub fn passed(&self) -> bool {
        self.offending.is_empty()
    }
}

pub fn validate_ratio_bound(mesh: &TemporalMesh, alpha: f64) -> Result<RatioReport> {
    check_alpha(alpha)?;
    let rs = rho_star(alpha)?;
    let mut passes = Vec::with_capacity(mesh.len().saturating_sub(1));
    let mut offending = Vec::new();
    for k in 2..=mesh.len() {
        let r = mesh.rho(k);
        let ok = (1.0..=rs).contains(&r);
        passes.push(ok);
        if !ok {
            offending.push(k);
        }
    }
    Ok(RatioReport {
        rho_star: rs,
        passes,
        offending,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_two_steps() {
        let m = TemporalMesh::graded_cubic(2, 1.0).unwrap();
        assert!((m.tau(1) - 27.0 / 152.0).abs() < 1e-16);
        assert!((m.tau(2) - 125.0 / 152.0).abs() < 1e-15);
        assert!((m.rho(2) - 125.0 / 27.0).abs() < 1e-13);
        assert_eq!(m.rho(1), 0.0);
    }

    #[test]
    fn graded_single_step() {
        let m = TemporalMesh::graded_cubic(1, 1.0).unwrap();
        assert_eq!(m.steps(), &[1.0]);
        assert_eq!(m.nodes(), &[0.0, 1.0]);
    }

    #[test]
    fn denominator_identity() {
        let mut acc: u128 = 0;
        for n in 1..=1000u64 {
            let q = (2 * n + 1) as u128;
            acc += q * q * q;
            assert_eq!(acc, graded_cubic_denominator(n));
        }
    }

    #[test]
    fn graded_ratios_decrease_and_stay_bounded() {
        let m = TemporalMesh::graded_cubic(300, 1.0).unwrap();
        let cap = (5.0f64 / 3.0).powi(3);
        for k in 2..=m.len() {
            assert!(m.rho(k) > 1.0 && m.rho(k) <= cap * (1.0 + 1e-14));
            if k > 2 {
                assert!(m.rho(k) < m.rho(k - 1));
            }
        }
        assert!(cap < 4.7476114);
    }

    #[test]
    fn uniform_meshes() {
        let m = TemporalMesh::uniform(4, 1.0).unwrap();
        assert!(m.steps().iter().all(|&s| s == 0.25));
        assert!(m.ratios()[1..].iter().all(|&r| r == 1.0));
        assert_eq!(TemporalMesh::uniform(1, 2.0).unwrap().steps(), &[2.0]);
        let m = TemporalMesh::uniform(3, 1.0).unwrap();
        for (k, want) in [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0].iter().enumerate() {
            assert!((m.t(k) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn custom_mesh() {
        let m = TemporalMesh::custom(&[0.1, 0.2]).unwrap();
        assert!((m.t(2) - 0.3).abs() < 1e-16);
        assert!((m.rho(2) - 2.0).abs() < 1e-15);
        assert_eq!(TemporalMesh::custom(&[1.0]).unwrap().nodes(), &[0.0, 1.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(TemporalMesh::graded_cubic(0, 1.0).is_err());
        assert!(TemporalMesh::graded_cubic(3, 0.0).is_err());
        assert!(TemporalMesh::uniform(2, -1.0).is_err());
        assert!(TemporalMesh::custom(&[0.1, 0.0]).is_err());
        assert!(TemporalMesh::custom(&[]).is_err());
    }

    #[test]
    fn ratio_validation() {
        let g = TemporalMesh::graded_cubic(100, 1.0).unwrap();
        for a in [0.1, 0.5, 0.82265, 0.99] {
            assert!(validate_ratio_bound(&g, a).unwrap().passed());
        }
        let u = TemporalMesh::uniform(10, 1.0).unwrap();
        assert!(validate_ratio_bound(&u, 0.3).unwrap().passed());
        let c = TemporalMesh::custom(&[0.1, 1.0]).unwrap();
        let r = validate_ratio_bound(&c, 0.9).unwrap();
        assert_eq!(r.offending, vec![2]);
        assert!(validate_ratio_bound(&g, 1.0).is_err());
    }
}
