//! WKB phase/amplitude machinery: `v₂`, `u₂`, the delta-normalized
//! eigenfunctions `ψ_ω(z) = √(f′(ω) / 2π v₂(z)) · exp(i f(ω) u₂(z))`, the
//! time-harmonic fields and the pointwise validity functional.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::field::SampledField;
use crate::grid::AxisGrid;
use crate::media::{MediumModel, ProfileFactor};
use crate::quadrature::{cumulative_simpson, simpson};

/// Margin below which a mode is flagged as violating the WKB hypothesis.
pub const DEFAULT_MARGIN_WARNING: f64 = 100.0;

/// Allowed relative disagreement between the 2x and 4x refined phase integrals.
pub const PHASE_REFINEMENT_TOLERANCE: f64 = 1e-8;

/// Tabulated profiles need this many samples per characteristic length for
/// their spline second derivatives to be used.
pub const MIN_SAMPLES_PER_LENGTH: f64 = 16.0;

/// Samples of `v₂` and `u₂ = ∫₀^z dz′/v₂` on an axis grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTable {
    pub grid: AxisGrid,
    pub v2: Vec<f64>,
    pub u2: Vec<f64>,
    pub eps2: Vec<f64>,
    pub mu2: Vec<f64>,
    /// Grid index nearest to `z = 0` (clamped to the grid).
    pub origin: usize,
}

fn check_profile_coverage(name: &str, p: &ProfileFactor, grid: &AxisGrid) -> Result<()> {
    if let Some(s) = p.spline() {
        let slack = 1e-12 * grid.span();
        if s.x_min() > grid.z_min() + slack || s.x_max() < grid.z_max() - slack {
            return Err(invalid(format!(
                "tabulated {name} covers [{}, {}] but the grid spans [{}, {}]",
                s.x_min(),
                s.x_max(),
                grid.z_min(),
                grid.z_max()
            )));
        }
    }
    Ok(())
}

impl PhaseTable {
    pub fn build(model: &MediumModel, grid: &AxisGrid) -> Result<Self> {
        check_profile_coverage("eps2", &model.eps2, grid)?;
        check_profile_coverage("mu2", &model.mu2, grid)?;
        let z = grid.points();
        let eps2: Vec<f64> = z.iter().map(|z| model.eps2.value(*z)).collect();
        let mu2: Vec<f64> = z.iter().map(|z| model.mu2.value(*z)).collect();
        if let Some(i) = (0..z.len()).find(|&i| !(eps2[i] > 0.0 && mu2[i] > 0.0)) {
            return Err(invalid(format!("ε₂ or μ₂ is not positive at z = {}", z[i])));
        }
        let v2: Vec<f64> = eps2.iter().zip(&mu2).map(|(e, m)| 1.0 / (e * m).sqrt()).collect();
        if model.eps2.is_constant() && model.mu2.is_constant() {
            let slowness = 1.0 / v2[0];
            let u2 = z.iter().map(|z| z * slowness).collect();
            let origin = (0..z.len())
                .min_by(|a, b| z[*a].abs().total_cmp(&z[*b].abs()))
                .unwrap_or(0);
            return Ok(Self {
                grid: grid.clone(),
                v2,
                u2,
                eps2,
                mu2,
                origin,
            });
        }
        let slowness = |z: f64| (model.eps2.value(z) * model.mu2.value(z)).sqrt();
        let (n, h, z0) = (grid.len(), grid.spacing(), grid.z_min());
        let fine = cumulative_simpson(&slowness, z0, h, n, 4);
        let coarse = cumulative_simpson(&slowness, z0, h, n, 2);
        let scale = fine[n - 1].abs().max(f64::MIN_POSITIVE);
        let rel_diff = fine.iter().zip(&coarse).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
        if rel_diff > PHASE_REFINEMENT_TOLERANCE {
            return Err(Error::GridTooCoarse { rel_diff });
        }

        // Anchor u₂(0) = 0: nearest node, then a short Simpson leg to z = 0.
        let origin = (((0.0 - z0) / h).round().max(0.0) as usize).min(n - 1);
        let z_origin = grid.z(origin);
        let leg = if z_origin == 0.0 {
            0.0
        } else {
            let panels = 4 * ((z_origin.abs() / h).ceil() as usize).max(1);
            simpson(&slowness, z_origin, 0.0, panels)
        };
        let offset = fine[origin] + leg;
        let u2 = fine.iter().map(|u| u - offset).collect();
        Ok(Self {
            grid: grid.clone(),
            v2,
            u2,
            eps2,
            mu2,
            origin,
        })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> Vec<f64> {
        self.grid.points()
    }

    /// Window length in the phase coordinate, `∫ w(z) dz / v₂` with the taper
    /// and trapezoid weights.
    pub fn effective_phase_length(&self) -> f64 {
        self.grid
            .window_weights()
            .iter()
            .zip(&self.v2)
            .map(|(w, v)| w / v)
            .sum()
    }
}

/// `ψ_ω` evaluated on the table's grid.
pub(crate) fn psi_values(model: &MediumModel, table: &PhaseTable, omega: f64) -> Result<Vec<Complex64>> {
    let (f, df) = model.f_and_derivative(omega)?;
    let scale = df / (2.0 * PI);
    Ok(table
        .v2
        .iter()
        .zip(&table.u2)
        .map(|(v, u)| Complex64::from_polar((scale / v).sqrt(), f * u))
        .collect())
}

/// Delta-normalized WKB eigenfunction of `h` at frequency ω.
pub fn psi_wkb(model: &MediumModel, table: &PhaseTable, omega: f64) -> Result<SampledField> {
    let values = psi_values(model, table, omega)?;
    SampledField::new(table.points(), values, format!("psi_wkb(omega={omega})"))
}

/// Time-harmonic WKB field `E_ω(z, t) = e^{−iωt} ψ_ω(z) / √(ε₁(ω) ε₂(z))`.
pub fn e_field_wkb(model: &MediumModel, table: &PhaseTable, omega: f64, t: f64) -> Result<SampledField> {
    let psi = psi_values(model, table, omega)?;
    let eps1 = model.eps1(omega)?;
    let phase = Complex64::from_polar(1.0, -omega * t);
    let values = psi
        .iter()
        .zip(&table.eps2)
        .map(|(p, e)| phase * p / (eps1 * e).sqrt())
        .collect();
    SampledField::new(table.points(), values, format!("e_field_wkb(omega={omega}, t={t})"))
}

/// Left-hand side of the WKB validity condition on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    pub grid: AxisGrid,
    pub lhs: Vec<f64>,
    pub max_lhs: f64,
}

impl ValidityReport {
    /// `ω² / max lhs`; infinite for a homogeneous medium.
    pub fn margin_at(&self, omega: f64) -> f64 {
        if self.max_lhs == 0.0 {
            f64::INFINITY
        } else {
            omega * omega / self.max_lhs
        }
    }
}

fn check_spline_density(name: &str, p: &ProfileFactor, grid: &AxisGrid) -> Result<()> {
    if let Some(s) = p.spline() {
        let length = if grid.taper_length() > 0.0 {
            grid.taper_length()
        } else {
            grid.span()
        };
        let per_length = length / s.max_spacing();
        if per_length < MIN_SAMPLES_PER_LENGTH {
            return Err(Error::DerivativeUnavailable(format!(
                "tabulated {name} has {per_length:.1} samples per length {length} (need {MIN_SAMPLES_PER_LENGTH})"
            )));
        }
    }
    Ok(())
}

/// `(v₂²/2) |(2 v₂ v₂″ − v₂′²)/(2 v₂²) + (2 μ₂ μ₂″ − 3 μ₂′²)/(2 μ₂²)|` per grid point.
pub fn validity_functional(model: &MediumModel, grid: &AxisGrid) -> Result<ValidityReport> {
    check_profile_coverage("eps2", &model.eps2, grid)?;
    check_profile_coverage("mu2", &model.mu2, grid)?;
    check_spline_density("eps2", &model.eps2, grid)?;
    check_spline_density("mu2", &model.mu2, grid)?;
    let lhs: Vec<f64> = grid
        .points()
        .into_iter()
        .map(|z| {
            let (e, e1, e2) = model.eps2.eval_all(z);
            let (m, m1, m2) = model.mu2.eval_all(z);
            let s = e * m;
            let s1 = e1 * m + e * m1;
            let s2 = e2 * m + 2.0 * e1 * m1 + e * m2;
            let v = s.powf(-0.5);
            let v1 = -0.5 * s.powf(-1.5) * s1;
            let v2 = 0.75 * s.powf(-2.5) * s1 * s1 - 0.5 * s.powf(-1.5) * s2;
            let speed_term = (2.0 * v * v2 - v1 * v1) / (2.0 * v * v);
            let mu_term = (2.0 * m * m2 - 3.0 * m1 * m1) / (2.0 * m * m);
            0.5 * v * v * (speed_term + mu_term).abs()
        })
        .collect();
    let max_lhs = lhs.iter().cloned().fold(0.0, f64::max);
    Ok(ValidityReport {
        grid: grid.clone(),
        lhs,
        max_lhs,
    })
}
