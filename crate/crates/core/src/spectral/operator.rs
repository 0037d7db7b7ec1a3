use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::AxisGrid;
use crate::media::MediumModel;

/// Boundary condition of the finite window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Hard walls at `z_min` and `z_max`; unknowns are the interior nodes.
    #[default]
    Dirichlet,
    /// `z_max` is identified with `z_min`; unknowns are all nodes but the last.
    Periodic,
}

/// Real symmetric matrix of `h₂` on the unknown nodes of a grid.
///
/// Stored as a tridiagonal band plus, for periodic boundaries, the corner
/// entry coupling the first and last unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    pub grid: AxisGrid,
    pub boundary: Boundary,
    pub diag: Vec<f64>,
    /// `off[i]` couples unknowns `i` and `i + 1`.
    pub off: Vec<f64>,
    pub corner: f64,
    /// `ε₂^{1/2}` at the unknown nodes.
    pub sqrt_eps2: Vec<f64>,
    /// Grid indices of the unknowns.
    pub nodes: Vec<usize>,
}

/// Assemble the staggered flux-form discretization `S·T·S` of `h₂`.
pub fn discretize_h2(model: &MediumModel, grid: &AxisGrid, boundary: Boundary) -> Result<DiscreteOperator> {
    let n = grid.len();
    if n < 16 {
        return Err(invalid(format!("discretize_h2 needs at least 16 grid points, got {n}")));
    }
    let h = grid.spacing();
    let z = grid.points();
    let eps2: Vec<f64> = z.iter().map(|z| model.eps2.value(*z)).collect();
    if let Some(i) = (0..n).find(|&i| !(eps2[i] > 0.0)) {
        return Err(invalid(format!("ε₂ is not positive at z = {}", z[i])));
    }
    // m[i] = 1/μ₂ at z_i + h/2.
    let mut m = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let mu = model.mu2.value(0.5 * (z[i] + z[i + 1]));
        if !(mu > 0.0) {
            return Err(invalid(format!("μ₂ is not positive near z = {}", z[i])));
        }
        m.push(1.0 / mu);
    }
    let s: Vec<f64> = eps2.iter().map(|e| 1.0 / e.sqrt()).collect();
    let h2 = h * h;
    let nodes: Vec<usize> = match boundary {
        Boundary::Dirichlet => (1..n - 1).collect(),
        Boundary::Periodic => (0..n - 1).collect(),
    };
    let dim = nodes.len();
    let mut diag = Vec::with_capacity(dim);
    let mut off = Vec::with_capacity(dim - 1);
    let mut corner = 0.0;
    match boundary {
        Boundary::Dirichlet => {
            for &i in &nodes {
                diag.push(s[i] * s[i] * (m[i - 1] + m[i]) / h2);
            }
            for &i in &nodes[..dim - 1] {
                off.push(-s[i] * s[i + 1] * m[i] / h2);
            }
        }
        Boundary::Periodic => {
            // Node n−1 duplicates node 0, so the left midpoint of node 0 is m[n−2].
            for &i in &nodes {
                let left = if i == 0 { m[n - 2] } else { m[i - 1] };
                diag.push(s[i] * s[i] * (left + m[i]) / h2);
            }
            for &i in &nodes[..dim - 1] {
                off.push(-s[i] * s[i + 1] * m[i] / h2);
            }
            corner = -s[dim - 1] * s[0] * m[n - 2] / h2;
        }
    }
    let sqrt_eps2 = nodes.iter().map(|&i| eps2[i].sqrt()).collect();
    Ok(DiscreteOperator {
        grid: grid.clone(),
        boundary,
        diag,
        off,
        corner,
        sqrt_eps2,
        nodes,
    })
}

impl DiscreteOperator {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Coordinates of the unknowns.
    pub fn points(&self) -> Vec<f64> {
        self.nodes.iter().map(|&i| self.grid.z(i)).collect()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let n = self.dim();
        if i == j {
            self.diag[i]
        } else if i + 1 == j {
            self.off[i]
        } else if j + 1 == i {
            self.off[j]
        } else if (i == 0 && j == n - 1) || (j == 0 && i == n - 1) {
            self.corner
        } else {
            0.0
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(x.len(), n, "vector length must match the operator dimension");
        let mut y: Vec<f64> = (0..n).map(|i| self.diag[i] * x[i]).collect();
        for i in 0..n - 1 {
            y[i] += self.off[i] * x[i + 1];
            y[i + 1] += self.off[i] * x[i];
        }
        if self.corner != 0.0 {
            y[0] += self.corner * x[n - 1];
            y[n - 1] += self.corner * x[0];
        }
        y
    }

    /// Discrete `Ω₂² = ε₂^{−1/2} h₂ ε₂^{1/2}` applied to `E` on the unknowns.
    pub fn apply_omega2_squared(&self, e: &[f64]) -> Vec<f64> {
        let psi: Vec<f64> = e.iter().zip(&self.sqrt_eps2).map(|(e, s)| e * s).collect();
        self.apply(&psi)
            .iter()
            .zip(&self.sqrt_eps2)
            .map(|(y, s)| y / s)
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.entry(i, j)).collect()).collect()
    }

    /// Dense matrix of the discrete `Ω₂²`.
    pub fn omega2_squared_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| self.entry(i, j) * self.sqrt_eps2[j] / self.sqrt_eps2[i])
                    .collect()
            })
            .collect()
    }

    /// Maximum absolute row sum, an upper bound on the spectral radius.
    pub fn norm(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut r = self.diag[i].abs();
                if i > 0 {
                    r += self.off[i - 1].abs();
                }
                if i + 1 < n {
                    r += self.off[i].abs();
                }
                if i == 0 || i == n - 1 {
                    r += self.corner.abs();
                }
                r
            })
            .fold(0.0, f64::max)
    }

    pub fn rayleigh_quotient(&self, x: &[f64]) -> f64 {
        let y = self.apply(x);
        let num: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let den: f64 = x.iter().map(|a| a * a).sum();
        num / den
    }

    /// Values on the full grid: zero at Dirichlet walls, the first value
    /// repeated at the periodic image node.
    pub fn embed(&self, x: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.grid.len()];
        for (&i, v) in self.nodes.iter().zip(x) {
            full[i] = *v;
        }
        if self.boundary == Boundary::Periodic {
            full[self.grid.len() - 1] = x[0];
        }
        full
    }
}
