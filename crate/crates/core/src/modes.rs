//! Mode-function projection `c(ω) = √ε₁ ∫ √ε₂ ψ_ω* E₀ dz`, time-domain
//! reconstruction `E(z, t) = ∫ c(ω) E_ω(z, t) dω`, and discrete checks of
//! orthonormality and completeness of the WKB modes.
//!
//! The delta normalization `⟨ψ_ω, ψ_ω′⟩ = δ(ω − ω′)` is made discrete by
//! identifying `δ` with `1/Δω_j` times the Kronecker delta, so `G_jk =
//! √(Δω_j Δω_k) ⟨ψ_j, ψ_k⟩` should be the identity. Spatial integrals use
//! the trapezoid weights times the taper of the axis grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::field::SampledField;
use crate::media::MediumModel;
use crate::spectral::omega_from_lambda;
use crate::wkb::{psi_values, PhaseTable};

/// Frequency samples with quadrature weights and local spacings.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    pub omega: Vec<f64>,
    /// Weights of the ω-quadrature used by `reconstruct`.
    pub weights: Vec<f64>,
    /// Local spacing `Δω_j` used for the delta-to-Kronecker conversion.
    pub spacing: Vec<f64>,
}

impl FrequencyGrid {
    /// Uniform samples on `[ω_min, ω_max]` with trapezoid weights.
    pub fn uniform(omega_min: f64, omega_max: f64, n: usize) -> Result<Self> {
        if n < 2 || !(omega_max > omega_min) || !omega_min.is_finite() || !omega_max.is_finite() {
            return Err(invalid(format!(
                "frequency grid needs n ≥ 2 and ω_min < ω_max, got n={n} on [{omega_min}, {omega_max}]"
            )));
        }
        let step = (omega_max - omega_min) / (n - 1) as f64;
        let omega = (0..n)
            .map(|j| {
                if j == n - 1 {
                    omega_max
                } else {
                    omega_min + j as f64 * step
                }
            })
            .collect();
        let mut weights = vec![step; n];
        weights[0] *= 0.5;
        weights[n - 1] *= 0.5;
        Ok(Self {
            omega,
            weights,
            spacing: vec![step; n],
        })
    }

    /// Samples equally spaced in `f(ω)` by the window's Rayleigh spacing
    /// `Δf = 2π / U`, where `U = ∫ w(z) dz / v₂` is the taper-weighted
    /// phase length. The resulting `Δω_j = Δf / f′(ω_j)`.
    pub fn natural(model: &MediumModel, table: &PhaseTable, omega_min: f64, n: usize) -> Result<Self> {
        if n < 1 || !(omega_min >= 0.0) {
            return Err(invalid(format!(
                "natural grid needs n ≥ 1 and ω_min ≥ 0, got n={n}, ω_min={omega_min}"
            )));
        }
        let step_f = 2.0 * PI / table.effective_phase_length();
        let f0 = model.f(omega_min)?;
        let mut omega = Vec::with_capacity(n);
        let mut spacing = Vec::with_capacity(n);
        for j in 0..n {
            let target = f0 + j as f64 * step_f;
            let w = if j == 0 {
                omega_min
            } else {
                omega_from_lambda(model, target * target)?
            };
            let (_, df) = model.f_and_derivative(w)?;
            omega.push(w);
            spacing.push(step_f / df);
        }
        Ok(Self {
            omega,
            weights: spacing.clone(),
            spacing,
        })
    }

    /// Samples at explicit frequencies; weights from the trapezoid rule on
    /// the (possibly non-uniform) nodes.
    pub fn from_nodes(omega: Vec<f64>) -> Result<Self> {
        let n = omega.len();
        if n < 2 || omega.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("frequency nodes must be strictly increasing, at least two"));
        }
        let mut weights = vec![0.0; n];
        for j in 0..n - 1 {
            let h = omega[j + 1] - omega[j];
            weights[j] += 0.5 * h;
            weights[j + 1] += 0.5 * h;
        }
        let spacing = (0..n)
            .map(|j| {
                if j == 0 {
                    omega[1] - omega[0]
                } else if j == n - 1 {
                    omega[n - 1] - omega[n - 2]
                } else {
                    0.5 * (omega[j + 1] - omega[j - 1])
                }
            })
            .collect();
        Ok(Self {
            omega,
            weights,
            spacing,
        })
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn omega_min(&self) -> f64 {
        self.omega[0]
    }

    pub fn omega_max(&self) -> f64 {
        self.omega[self.omega.len() - 1]
    }

    /// Checks every node against the model's frequency window.
    pub fn check_window(&self, model: &MediumModel) -> Result<()> {
        for w in &self.omega {
            model.n1(*w)?;
        }
        Ok(())
    }
}

/// Samples of the mode function `c(ω)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeFunction {
    pub grid: FrequencyGrid,
    pub values: Vec<Complex64>,
    pub source: String,
}

impl ModeFunction {
    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.norm()).collect()
    }
}

fn spatial_weights(table: &PhaseTable) -> Vec<f64> {
    table.grid.window_weights()
}

fn check_on_grid(table: &PhaseTable, field: &SampledField) -> Result<()> {
    if field.len() != table.len() {
        return Err(invalid(format!(
            "field '{}' has {} samples, the phase table has {}",
            field.label,
            field.len(),
            table.len()
        )));
    }
    Ok(())
}

/// `q_i ⟨ψ_ω, φ⟩` summands with `q_i` the windowed trapezoid weights.
fn inner_with_psi(psi: &[Complex64], weights: &[f64], phi: &[Complex64]) -> Complex64 {
    psi.iter()
        .zip(weights)
        .zip(phi)
        .map(|((p, w), f)| p.conj() * *f * *w)
        .sum()
}

/// Project `E₀` onto the WKB modes at the grid frequencies.
pub fn project(
    model: &MediumModel,
    table: &PhaseTable,
    grid: &FrequencyGrid,
    e0: &SampledField,
) -> Result<ModeFunction> {
    check_on_grid(table, e0)?;
    let weights = spatial_weights(table);
    let phi: Vec<Complex64> = e0.values.iter().zip(&table.eps2).map(|(e, s)| *e * s.sqrt()).collect();
    let values = grid
        .omega
        .par_iter()
        .map(|&w| {
            let psi = psi_values(model, table, w)?;
            Ok(inner_with_psi(&psi, &weights, &phi) * model.eps1(w)?.sqrt())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ModeFunction {
        grid: grid.clone(),
        values,
        source: e0.label.clone(),
    })
}

/// Superpose `c(ω) E_ω(z, t)` by the grid's ω-quadrature.
pub fn reconstruct(model: &MediumModel, table: &PhaseTable, c: &ModeFunction, t: f64) -> Result<SampledField> {
    // Per-frequency factor q_j c_j √(f′/2π) e^{−iωt} / √ε₁ and phase rate f_j.
    let terms = c
        .grid
        .omega
        .iter()
        .zip(&c.grid.weights)
        .zip(&c.values)
        .map(|((&w, &q), &cj)| {
            let (f, df) = model.f_and_derivative(w)?;
            let amp = cj * q * (df / (2.0 * PI) / model.eps1(w)?).sqrt() * Complex64::from_polar(1.0, -w * t);
            Ok((amp, f))
        })
        .collect::<Result<Vec<_>>>()?;
    let values = (0..table.len())
        .into_par_iter()
        .map(|i| {
            let u = table.u2[i];
            let sum: Complex64 = terms.iter().map(|(a, f)| *a * Complex64::from_polar(1.0, f * u)).sum();
            sum / (table.v2[i] * table.eps2[i]).sqrt()
        })
        .collect();
    SampledField::new(table.points(), values, format!("reconstruct(t={t})"))
}

/// Discrete Gram matrix of the WKB modes.
#[derive(Debug, Clone, PartialEq)]
pub struct Gram {
    pub n: usize,
    /// Row-major entries.
    pub entries: Vec<Complex64>,
}

impl Gram {
    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.entries[j * self.n + k]
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.n {
            for k in 0..self.n {
                if j != k {
                    worst = worst.max(self.get(j, k).norm());
                }
            }
        }
        worst
    }

    pub fn max_diagonal_deviation(&self) -> f64 {
        (0..self.n).map(|j| (self.get(j, j) - 1.0).norm()).fold(0.0, f64::max)
    }
}

/// `G_jk = √(Δω_j Δω_k) Σ_i q_i ψ_j(z_i)* ψ_k(z_i)`.
pub fn discrete_gram(model: &MediumModel, table: &PhaseTable, grid: &FrequencyGrid) -> Result<Gram> {
    let weights = spatial_weights(table);
    let modes = grid
        .omega
        .par_iter()
        .zip(&grid.spacing)
        .map(|(&w, &dw)| {
            let scale = dw.sqrt();
            Ok(psi_values(model, table, w)?
                .into_iter()
                .map(|p| p * scale)
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let n = grid.len();
    let entries = (0..n)
        .into_par_iter()
        .flat_map_iter(|j| {
            let modes = &modes;
            let weights = &weights;
            (0..n).map(move |k| inner_with_psi(&modes[j], weights, &modes[k]))
        })
        .collect();
    Ok(Gram { n, entries })
}

/// `‖Σ_j q_j ⟨ψ_j, φ⟩ ψ_j − φ‖ / ‖φ‖` with `φ = ε₂^{1/2}·field`; the
/// field should be band-limited to the frequency grid.
pub fn completeness_residual(
    model: &MediumModel,
    table: &PhaseTable,
    grid: &FrequencyGrid,
    field: &SampledField,
) -> Result<f64> {
    check_on_grid(table, field)?;
    let weights = spatial_weights(table);
    let trapezoid = table.grid.trapezoid_weights();
    let phi: Vec<Complex64> = field
        .values
        .iter()
        .zip(&table.eps2)
        .map(|(e, s)| *e * s.sqrt())
        .collect();
    let norm_phi: f64 = phi
        .iter()
        .zip(&trapezoid)
        .map(|(p, w)| p.norm_sqr() * w)
        .sum::<f64>()
        .sqrt();
    if norm_phi == 0.0 {
        return Ok(0.0);
    }
    let partial = grid
        .omega
        .par_iter()
        .zip(&grid.weights)
        .map(|(&w, &q)| {
            let psi = psi_values(model, table, w)?;
            let c = inner_with_psi(&psi, &weights, &phi) * q;
            Ok(psi.into_iter().map(|p| p * c).collect::<Vec<_>>())
        })
        .try_reduce(
            || vec![Complex64::new(0.0, 0.0); phi.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                Ok(a)
            },
        )?;
    let err: f64 = partial
        .iter()
        .zip(&phi)
        .zip(&trapezoid)
        .map(|((a, b), w)| (a - b).norm_sqr() * w)
        .sum::<f64>()
        .sqrt();
    Ok(err / norm_phi)
}
