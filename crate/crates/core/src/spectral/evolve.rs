use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::field::SampledField;
use crate::grid::AxisGrid;
use crate::media::MediumModel;

use super::eigen::full_eigenbasis;
use super::operator::{discretize_h2, Boundary, DiscreteOperator};

/// Eigenvalues below this fraction of `‖matrix‖` use the `λ → 0` limit of
/// `sin(√λ t)/√λ`.
const ZERO_MODE_FRACTION: f64 = 1e-12;

/// Exact non-dispersive propagator `E(t) = cos(Ωt)E₀ + Ω⁻¹ sin(Ωt)Ė₀`,
/// built from the complete eigenbasis of the discretized `h₂`.
///
/// Constant `ε₁`, `μ₁` are admitted; they rescale every frequency by `1/n₁`.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    pub operator: DiscreteOperator,
    pub lambdas: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    /// Angular frequency of each mode, `√λ / n₁`.
    pub frequencies: Vec<f64>,
    zero_floor: f64,
}

/// Modal amplitudes of `ψ = ε₂^{1/2}E` and of its time derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalState {
    pub amplitude: Vec<Complex64>,
    pub rate: Vec<Complex64>,
}

impl SpectralPropagator {
    pub fn new(model: &MediumModel, grid: &AxisGrid, boundary: Boundary) -> Result<Self> {
        if !model.is_nondispersive() {
            return Err(invalid("the spectral propagator needs frequency-independent ε₁ and μ₁"));
        }
        let n1 = model.n1(0.0)?;
        let operator = discretize_h2(model, grid, boundary)?;
        let (lambdas, vectors) = full_eigenbasis(&operator)?;
        let frequencies = lambdas.iter().map(|l| l.max(0.0).sqrt() / n1).collect();
        let zero_floor = ZERO_MODE_FRACTION * operator.norm();
        Ok(Self {
            operator,
            lambdas,
            vectors,
            frequencies,
            zero_floor,
        })
    }

    pub fn grid(&self) -> &AxisGrid {
        &self.operator.grid
    }

    fn check_field(&self, field: &SampledField) -> Result<()> {
        if field.len() != self.grid().len() {
            return Err(invalid(format!(
                "field '{}' has {} samples, the grid has {}",
                field.label,
                field.len(),
                self.grid().len()
            )));
        }
        Ok(())
    }

    /// `⟨v_k, ε₂^{1/2} E⟩` in the box inner product.
    pub fn coefficients(&self, field: &SampledField) -> Result<Vec<Complex64>> {
        self.check_field(field)?;
        let dz = self.grid().spacing();
        let psi: Vec<Complex64> = self
            .operator
            .nodes
            .iter()
            .zip(&self.operator.sqrt_eps2)
            .map(|(&i, s)| field.values[i] * *s)
            .collect();
        Ok(self
            .vectors
            .iter()
            .map(|v| v.iter().zip(&psi).map(|(a, b)| *b * *a).sum::<Complex64>() * dz)
            .collect())
    }

    fn synthesize(&self, coefficients: &[Complex64], label: String) -> SampledField {
        let dim = self.operator.dim();
        let mut psi = vec![Complex64::new(0.0, 0.0); dim];
        for (c, v) in coefficients.iter().zip(&self.vectors) {
            if *c == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (p, vi) in psi.iter_mut().zip(v) {
                *p += *c * *vi;
            }
        }
        let e: Vec<Complex64> = psi.iter().zip(&self.operator.sqrt_eps2).map(|(p, s)| *p / *s).collect();
        let re = self.operator.embed(&e.iter().map(|c| c.re).collect::<Vec<_>>());
        let im = self.operator.embed(&e.iter().map(|c| c.im).collect::<Vec<_>>());
        let values = re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect();
        SampledField {
            points: self.grid().points(),
            values,
            label,
        }
    }

    pub fn modal_state(&self, e: &SampledField, e_dot: &SampledField) -> Result<ModalState> {
        Ok(ModalState {
            amplitude: self.coefficients(e)?,
            rate: self.coefficients(e_dot)?,
        })
    }

    /// Advance a modal state by `t`.
    pub fn advance(&self, state: &ModalState, t: f64) -> ModalState {
        let mut amplitude = Vec::with_capacity(state.amplitude.len());
        let mut rate = Vec::with_capacity(state.rate.len());
        for (k, (a, b)) in state.amplitude.iter().zip(&state.rate).enumerate() {
            let w = self.frequencies[k];
            let (sin, cos) = (w * t).sin_cos();
            let sinc_t = if self.lambdas[k] < self.zero_floor { t } else { sin / w };
            amplitude.push(*a * cos + *b * sinc_t);
            rate.push(-*a * (w * sin) + *b * cos);
        }
        ModalState { amplitude, rate }
    }

    /// `Σ (ω_k² |a_k|² + |ȧ_k|²)`, conserved by the exact evolution.
    pub fn modal_energy(&self, state: &ModalState) -> f64 {
        state
            .amplitude
            .iter()
            .zip(&state.rate)
            .zip(&self.frequencies)
            .map(|((a, b), w)| w * w * a.norm_sqr() + b.norm_sqr())
            .sum()
    }

    pub fn field(&self, state: &ModalState, label: impl Into<String>) -> SampledField {
        self.synthesize(&state.amplitude, label.into())
    }

    pub fn rate_field(&self, state: &ModalState, label: impl Into<String>) -> SampledField {
        self.synthesize(&state.rate, label.into())
    }

    pub fn evolve(&self, e0: &SampledField, e0_dot: &SampledField, t: f64) -> Result<SampledField> {
        let state = self.advance(&self.modal_state(e0, e0_dot)?, t);
        Ok(self.field(&state, format!("E(t={t})")))
    }
}

/// Propagate `(E₀, Ė₀)` to time `t` in a non-dispersive medium.
pub fn evolve_nondispersive(
    model: &MediumModel,
    grid: &AxisGrid,
    boundary: Boundary,
    e0: &SampledField,
    e0_dot: &SampledField,
    t: f64,
) -> Result<SampledField> {
    SpectralPropagator::new(model, grid, boundary)?.evolve(e0, e0_dot, t)
}

/// Second-order `∂_z` on a uniform grid, one-sided at the ends.
fn z_derivative(values: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = values.len();
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    for i in 1..n - 1 {
        d[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
    d[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
    d
}

/// `B_y(t_end) = B₀ − ∫ ∂_z E_x dτ` from a uniformly spaced history
/// (spacing `dt`), by the trapezoid rule in time.
pub fn reconstruct_b(grid: &AxisGrid, history: &[SampledField], dt: f64, b0: &SampledField) -> Result<SampledField> {
    if history.len() < 2 {
        return Err(Error::InsufficientHistory { samples: history.len() });
    }
    if !(dt > 0.0) {
        return Err(invalid(format!("time step must be positive, got {dt}")));
    }
    let n = grid.len();
    if b0.len() != n || history.iter().any(|e| e.len() != n) {
        return Err(invalid("history and B₀ must be sampled on the grid"));
    }
    let h = grid.spacing();
    let last = history.len() - 1;
    let mut b = b0.values.clone();
    for (j, e) in history.iter().enumerate() {
        let w = if j == 0 || j == last { 0.5 * dt } else { dt };
        for (bi, di) in b.iter_mut().zip(z_derivative(&e.values, h)) {
            *bi -= di * w;
        }
    }
    SampledField::new(grid.points(), b, "B_y")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::{DispersionFactor, ProfileFactor};

    fn medium(eps2: ProfileFactor) -> MediumModel {
        MediumModel::new(
            DispersionFactor::Constant(1.0),
            DispersionFactor::Constant(1.0),
            eps2,
            ProfileFactor::Constant(1.0),
        )
    }

    fn gaussian(grid: &AxisGrid, z0: f64, sigma: f64) -> SampledField {
        let v: Vec<f64> = grid
            .points()
            .iter()
            .map(|z| (-(z - z0).powi(2) / (2.0 * sigma * sigma)).exp())
            .collect();
        SampledField::from_real(grid.points(), &v, "gauss").unwrap()
    }

    #[test]
    fn time_zero_returns_initial_field() {
        let grid = AxisGrid::new(-20.0, 20.0, 201).unwrap();
        let model = medium(ProfileFactor::lorentzian(1.0, 0.4, 3.0).unwrap());
        let e0 = gaussian(&grid, 0.0, 2.0);
        let zero = SampledField::zeros(grid.points(), "0");
        let e = evolve_nondispersive(&model, &grid, Boundary::Dirichlet, &e0, &zero, 0.0).unwrap();
        assert!(e.relative_l2_error(&e0) < 1e-10);
    }

    #[test]
    fn periodic_zero_mode_grows_linearly() {
        let grid = AxisGrid::new(0.0, 10.0, 65).unwrap();
        let model = medium(ProfileFactor::Constant(1.0));
        let zero = SampledField::zeros(grid.points(), "0");
        let one = SampledField::from_real(grid.points(), &vec![1.0; 65], "1").unwrap();
        let e = evolve_nondispersive(&model, &grid, Boundary::Periodic, &zero, &one, 3.0).unwrap();
        assert!(e
            .values
            .iter()
            .all(|v| (v.re - 3.0).abs() < 1e-10 && v.im.abs() < 1e-12));
    }

    #[test]
    fn b_from_constant_field_is_unchanged() {
        let grid = AxisGrid::new(0.0, 1.0, 11).unwrap();
        let e = SampledField::from_real(grid.points(), &[2.0; 11], "E").unwrap();
        let b0 = SampledField::from_real(grid.points(), &[0.5; 11], "B").unwrap();
        let b = reconstruct_b(&grid, &[e.clone(), e], 0.1, &b0).unwrap();
        assert_eq!(b.values, b0.values);
        assert!(matches!(
            reconstruct_b(&grid, &[], 0.1, &b0),
            Err(Error::InsufficientHistory { samples: 0 })
        ));
    }
}
