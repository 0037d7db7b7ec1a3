//! The Lorentzian-inhomogeneity example: a plane wave `A e^{ikz}` launched
//! into `ε₂ = ε₀ (1 + a/(1 + z²/γ²))`, its first-order mode function
//!
//! `c(ω) = 𝔄(ω) {δ(k − 𝔎) + γ a e^{−γ|k−𝔎|} (3k − 𝔎) / (8 (k − 𝔎))} + O(a²)`,
//!
//! and a numerical oracle for the order-`a` term built from exact
//! projections at small `a`.
//!
//! The δ-term is only realizable as a window-smeared peak, so samples with
//! `|k − 𝔎(ω)|` below an exclusion radius are left out of comparisons.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::field::SampledField;
use crate::grid::AxisGrid;
use crate::media::{DispersionFactor, FrequencyWindow, MediumModel, ProfileFactor, Units};
use crate::modes::{project, FrequencyGrid, ModeFunction};
use crate::spectral::omega_from_lambda;
use crate::wkb::PhaseTable;

/// Plane-wave amplitude `A` and wavenumber `k` of the WKB mode of a
/// homogeneous medium: `A = (μ/ε)^{1/4} √((1 + ω n₁′/n₁)/2π)`, `k = ω √(εμ)`.
pub fn plane_wave_constants(model: &MediumModel, omega: f64) -> Result<(f64, f64)> {
    if !model.is_homogeneous() {
        return Err(Error::NotHomogeneous);
    }
    let eps = model.eps1(omega)? * model.eps2.value(0.0);
    let mu = model.mu1(omega)? * model.mu2.value(0.0);
    let (n1, dn1) = model.n1_with_derivative(omega)?;
    let amplitude = (mu / eps).powf(0.25) * ((1.0 + omega * dn1 / n1) / (2.0 * PI)).sqrt();
    let k = omega * (eps * mu).sqrt();
    let k_wkb = omega * n1 / model.v2(0.0);
    if (k - k_wkb).abs() > 1e-12 * k.abs().max(1.0) {
        return Err(invalid(format!("inconsistent wavenumbers {k} and {k_wkb}")));
    }
    Ok((amplitude, k))
}

/// Lorentzian inhomogeneity with a plane-wave input, nonmagnetic.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzCase {
    pub a: f64,
    pub gamma: f64,
    pub dispersion: DispersionFactor,
    pub k: f64,
    /// Input plane-wave amplitude `A`, shared by the input and by `𝔄(ω)`.
    pub amplitude: f64,
    pub units: Units,
    pub window: FrequencyWindow,
}

impl LorentzCase {
    pub fn new(a: f64, gamma: f64, dispersion: DispersionFactor, k: f64) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) || !(gamma > 0.0 && gamma.is_finite()) || !k.is_finite() {
            return Err(invalid(format!(
                "lorentz case needs a ≥ 0, γ > 0 and finite k (a={a}, γ={gamma}, k={k})"
            )));
        }
        Ok(Self {
            a,
            gamma,
            dispersion,
            k,
            amplitude: 1.0,
            units: Units::default(),
            window: FrequencyWindow::default(),
        })
    }

    pub fn with_units(mut self, units: Units) -> Self {
        self.units = units;
        self
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn with_window(mut self, window: FrequencyWindow) -> Self {
        self.window = window;
        self
    }

    /// The medium at inhomogeneity strength `a`.
    pub fn model_with_strength(&self, a: f64) -> Result<MediumModel> {
        Ok(MediumModel::new(
            self.dispersion.clone(),
            DispersionFactor::Constant(1.0),
            ProfileFactor::lorentzian(self.units.eps0, a, self.gamma)?,
            ProfileFactor::Constant(self.units.mu0),
        )
        .with_units(self.units)
        .with_window(self.window))
    }

    pub fn model(&self) -> Result<MediumModel> {
        self.model_with_strength(self.a)
    }

    /// `𝔎(ω) = ω √ε₁(ω) / c`.
    pub fn kappa(&self, omega: f64) -> Result<f64> {
        Ok(self.model_with_strength(0.0)?.f(omega)? / self.units.c)
    }

    /// `𝔄(ω) = A √((2π ε₀ ε₁^{3/2} / c)(1 + ω ε₁′ / 2ε₁))`.
    pub fn amplitude_factor(&self, omega: f64) -> Result<f64> {
        let model = self.model_with_strength(0.0)?;
        let e1 = model.eps1(omega)?;
        let de1 = self.dispersion.derivative(omega);
        let inner = 2.0 * PI * self.units.eps0 * e1.powf(1.5) / self.units.c * (1.0 + omega * de1 / (2.0 * e1));
        Ok(self.amplitude * inner.sqrt())
    }

    /// Frequency of the δ-peak, `𝔎(ω*) = k`.
    pub fn omega_star(&self) -> Result<f64> {
        let target = self.units.c * self.k;
        if target < 0.0 {
            return Err(invalid("the δ-peak needs k ≥ 0"));
        }
        omega_from_lambda(&self.model_with_strength(0.0)?, target * target)
    }

    /// Default exclusion radius in `|k − 𝔎|`: three Rayleigh widths of a
    /// window of length `window_length`, at least `0.2/γ`.
    pub fn default_exclusion_radius(&self, window_length: f64) -> f64 {
        (3.0 * 2.0 * PI / window_length).max(0.2 / self.gamma)
    }

    /// First-order bracket `e^{−γ|q|} (3k − 𝔎) / (8q)` with `q = k − 𝔎(ω)`.
    pub fn bracket(&self, omega: f64) -> Result<f64> {
        let kappa = self.kappa(omega)?;
        let q = self.k - kappa;
        Ok((-self.gamma * q.abs()).exp() * (3.0 * self.k - kappa) / (8.0 * q))
    }

    /// Detuning `k − 𝔎(ω)`.
    pub fn detuning(&self, omega: f64) -> Result<f64> {
        Ok(self.k - self.kappa(omega)?)
    }

    /// Input field `A e^{ikz}` on a grid; the grid's taper is applied by `project`.
    pub fn plane_wave(&self, grid: &AxisGrid) -> SampledField {
        let values = grid
            .points()
            .iter()
            .map(|z| Complex64::from_polar(self.amplitude, self.k * z))
            .collect();
        SampledField {
            points: grid.points(),
            values,
            label: format!("plane_wave(k={})", self.k),
        }
    }

    /// Exact (windowed) projection of the plane wave at strength `a`.
    pub fn projected(&self, grid: &AxisGrid, omega: &FrequencyGrid, a: f64) -> Result<ModeFunction> {
        let model = self.model_with_strength(a)?;
        let table = PhaseTable::build(&model, grid)?;
        let mut c = project(&model, &table, omega, &self.plane_wave(grid))?;
        c.source = format!("plane_wave(k={}, a={a})", self.k);
        Ok(c)
    }
}

/// Smooth first-order part at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderSample {
    pub omega: f64,
    pub detuning: f64,
    /// `𝔄 γ a · bracket`, absent inside the exclusion radius.
    pub value: Option<f64>,
}

/// The smooth part per sample together with the δ-peak location and weight.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderModeFunction {
    pub samples: Vec<FirstOrderSample>,
    pub omega_star: f64,
    pub peak_weight: f64,
    pub exclusion_radius: f64,
}

/// Smooth order-`a` part at a single frequency; `ResonanceProximity` inside
/// the exclusion radius.
pub fn first_order_value(case: &LorentzCase, omega: f64, exclusion_radius: f64) -> Result<f64> {
    let detuning = case.detuning(omega)?;
    if detuning.abs() < exclusion_radius {
        return Err(Error::ResonanceProximity {
            omega,
            detuning,
            radius: exclusion_radius,
        });
    }
    Ok(case.amplitude_factor(omega)? * case.gamma * case.a * case.bracket(omega)?)
}

/// First-order mode function on a frequency grid; samples inside the
/// exclusion radius are flagged rather than evaluated.
pub fn mode_function_first_order(
    case: &LorentzCase,
    grid: &FrequencyGrid,
    exclusion_radius: f64,
) -> Result<FirstOrderModeFunction> {
    let omega_star = case.omega_star()?;
    let peak_weight = case.amplitude_factor(omega_star)?;
    let samples = grid
        .omega
        .iter()
        .map(|&omega| {
            let detuning = case.detuning(omega)?;
            let value = match first_order_value(case, omega, exclusion_radius) {
                Ok(v) => Some(v),
                Err(Error::ResonanceProximity { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(FirstOrderSample { omega, detuning, value })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FirstOrderModeFunction {
        samples,
        omega_star,
        peak_weight,
        exclusion_radius,
    })
}

fn check_steps(a1: f64, a2: f64) -> Result<()> {
    if !(a1 > 0.0 && a2 > a1) {
        return Err(invalid(format!("a-steps need 0 < a₁ < a₂, got a₁={a1}, a₂={a2}")));
    }
    Ok(())
}

fn combine(parts: &[(f64, &ModeFunction)], source: String) -> ModeFunction {
    let n = parts[0].1.values.len();
    let values = (0..n)
        .map(|j| parts.iter().map(|(w, c)| c.values[j] * *w).sum())
        .collect();
    ModeFunction {
        grid: parts[0].1.grid.clone(),
        values,
        source,
    }
}

/// `∂c/∂a` at `a = 0` from exact projections at `a ∈ {0, a₁, a₂}` with the
/// one-sided three-point stencil. The δ-peak, present identically in every
/// run, cancels because the weights sum to zero; the truncation error is
/// `O(a₁ a₂)`.
pub fn numeric_mode_derivative(
    case: &LorentzCase,
    grid: &AxisGrid,
    omega: &FrequencyGrid,
    a_steps: (f64, f64),
) -> Result<ModeFunction> {
    Ok(mode_derivatives(case, grid, omega, a_steps)?.three_point)
}

/// Two-point secant `(c(a₂) − c(a₁)) / (a₂ − a₁)`; carries an `O(a)` bias.
pub fn secant_mode_derivative(
    case: &LorentzCase,
    grid: &AxisGrid,
    omega: &FrequencyGrid,
    a_steps: (f64, f64),
) -> Result<ModeFunction> {
    Ok(mode_derivatives(case, grid, omega, a_steps)?.secant)
}

/// Both derivative estimates and the underlying projections.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeDerivatives {
    pub three_point: ModeFunction,
    pub secant: ModeFunction,
    /// Projections at `a = 0, a₁, a₂`.
    pub projections: [ModeFunction; 3],
}

pub fn mode_derivatives(
    case: &LorentzCase,
    grid: &AxisGrid,
    omega: &FrequencyGrid,
    a_steps: (f64, f64),
) -> Result<ModeDerivatives> {
    let (a1, a2) = a_steps;
    check_steps(a1, a2)?;
    let (c0, (c1, c2)) = rayon::join(
        || case.projected(grid, omega, 0.0),
        || rayon::join(|| case.projected(grid, omega, a1), || case.projected(grid, omega, a2)),
    );
    let (c0, c1, c2) = (c0?, c1?, c2?);
    let w0 = -(a1 + a2) / (a1 * a2);
    let w1 = a2 / (a1 * (a2 - a1));
    let w2 = -a1 / (a2 * (a2 - a1));
    let three_point = combine(
        &[(w0, &c0), (w1, &c1), (w2, &c2)],
        format!("dc/da three-point a=({a1}, {a2})"),
    );
    let h = 1.0 / (a2 - a1);
    let secant = combine(&[(-h, &c1), (h, &c2)], format!("dc/da secant a=({a1}, {a2})"));
    Ok(ModeDerivatives {
        three_point,
        secant,
        projections: [c0, c1, c2],
    })
}

/// Per-sample comparison of a numerical derivative against the bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketSample {
    pub omega: f64,
    pub detuning: f64,
    pub analytic: f64,
    /// `(∂c/∂a) / (γ 𝔄)`.
    pub numeric: Complex64,
    pub excluded: bool,
}

impl BracketSample {
    pub fn relative_deviation(&self) -> f64 {
        (self.numeric - self.analytic).norm() / self.analytic.abs()
    }
}

/// Normalize a numerical `∂c/∂a` by `γ𝔄` and pair it with the bracket.
pub fn compare_bracket(
    case: &LorentzCase,
    derivative: &ModeFunction,
    exclusion_radius: f64,
) -> Result<Vec<BracketSample>> {
    derivative
        .grid
        .omega
        .iter()
        .zip(&derivative.values)
        .map(|(&omega, &d)| {
            let detuning = case.detuning(omega)?;
            let excluded = detuning.abs() < exclusion_radius;
            let analytic = if excluded { f64::NAN } else { case.bracket(omega)? };
            let numeric = d / (case.gamma * case.amplitude_factor(omega)?);
            Ok(BracketSample {
                omega,
                detuning,
                analytic,
                numeric,
                excluded,
            })
        })
        .collect()
}

/// Samples with `γ|k − 𝔎| ∈ [lo, hi]` that are not excluded.
pub fn in_band(samples: &[BracketSample], gamma: f64, band: (f64, f64)) -> Vec<BracketSample> {
    samples
        .iter()
        .filter(|s| {
            let x = gamma * s.detuning.abs();
            !s.excluded && x >= band.0 && x <= band.1
        })
        .copied()
        .collect()
}

/// Largest relative deviation of the numeric bracket inside the band.
pub fn max_relative_deviation(samples: &[BracketSample], gamma: f64, band: (f64, f64)) -> Option<f64> {
    in_band(samples, gamma, band)
        .iter()
        .map(BracketSample::relative_deviation)
        .reduce(f64::max)
}

/// Least-squares decay rate `−d ln|numeric · 8q/(3k − 𝔎)| / d|q|` over the band.
pub fn fit_decay_rate(case: &LorentzCase, samples: &[BracketSample], band: (f64, f64)) -> Result<f64> {
    let points: Vec<(f64, f64)> = in_band(samples, case.gamma, band)
        .iter()
        .map(|s| {
            let kappa = case.k - s.detuning;
            let prefactor = (3.0 * case.k - kappa) / (8.0 * s.detuning);
            (s.detuning.abs(), (s.numeric.norm() / prefactor.abs()).ln())
        })
        .filter(|(_, y)| y.is_finite())
        .collect();
    if points.len() < 2 {
        return Err(invalid("decay fit needs at least two in-band samples"));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("decay fit needs distinct detunings"));
    }
    Ok(-sxy / sxx)
}

/// Fraction of `Σ w_j |c_j|²` carried by samples with `|k − 𝔎(ω)| ≥ radius`.
pub fn out_of_peak_fraction(case: &LorentzCase, c: &ModeFunction, radius: f64) -> Result<f64> {
    let mut total = 0.0;
    let mut outside = 0.0;
    for ((&omega, &w), v) in c.grid.omega.iter().zip(&c.grid.weights).zip(&c.values) {
        let e = w * v.norm_sqr();
        total += e;
        if case.detuning(omega)?.abs() >= radius {
            outside += e;
        }
    }
    Ok(if total == 0.0 { 0.0 } else { outside / total })
}
