//! Separable medium models `ε = ε₁(ω) ε₂(z)`, `μ = μ₁(ω) μ₂(z)`.
//!
//! Frequency factors are dimensionless and even in ω; spatial factors carry
//! the absolute units (multiples of `ε₀`, `μ₀`). Negative frequencies are
//! served through the odd extension `f(−ω) = −f(ω)`, so all window checks are
//! applied to `|ω|`.

use crate::error::{invalid, Error, Result};
use crate::spline::CubicSpline;

/// Frequency factor `ε₁(ω)` or `μ₁(ω)`.
#[derive(Debug, Clone, PartialEq)]
pub enum DispersionFactor {
    Constant(f64),
    /// `A + B ω²`.
    Cauchy {
        a: f64,
        b: f64,
    },
    /// Natural cubic spline through samples at `|ω|`.
    Tabulated(CubicSpline),
}

impl DispersionFactor {
    pub fn constant(value: f64) -> Result<Self> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(invalid(format!(
                "constant dispersion factor must be positive, got {value}"
            )));
        }
        Ok(Self::Constant(value))
    }

    pub fn cauchy(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(invalid(format!(
                "cauchy dispersion needs A > 0 and B > 0, got A={a}, B={b}"
            )));
        }
        Ok(Self::Cauchy { a, b })
    }

    pub fn tabulated(omega: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if omega.iter().any(|w| *w < 0.0) {
            return Err(invalid(
                "tabulated dispersion is sampled on |ω|; frequencies must be ≥ 0",
            ));
        }
        if values.iter().any(|v| !(*v > 0.0)) {
            return Err(invalid("tabulated dispersion values must be positive"));
        }
        Ok(Self::Tabulated(CubicSpline::natural(omega, values)?))
    }

    /// Value at ω (even extension).
    pub fn value(&self, omega: f64) -> f64 {
        let w = omega.abs();
        match self {
            Self::Constant(v) => *v,
            Self::Cauchy { a, b } => a + b * w * w,
            Self::Tabulated(s) => s.eval(w),
        }
    }

    /// dε₁/dω at ω (odd, since the factor is even).
    pub fn derivative(&self, omega: f64) -> f64 {
        let w = omega.abs();
        let d = match self {
            Self::Constant(_) => 0.0,
            Self::Cauchy { b, .. } => 2.0 * b * w,
            Self::Tabulated(s) => s.eval_all(w).1,
        };
        if omega < 0.0 {
            -d
        } else {
            d
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Self::Constant(_))
    }

    /// `|ω|` range covered by tabulated data.
    pub fn sample_range(&self) -> Option<(f64, f64)> {
        match self {
            Self::Tabulated(s) => Some((s.x_min(), s.x_max())),
            _ => None,
        }
    }
}

/// Spatial factor `ε₂(z)` or `μ₂(z)` in absolute units.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileFactor {
    Constant(f64),
    /// `base · (1 + a / (1 + z²/γ²))`.
    Lorentzian {
        base: f64,
        a: f64,
        gamma: f64,
    },
    Tabulated(CubicSpline),
}

impl ProfileFactor {
    pub fn constant(value: f64) -> Result<Self> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(invalid(format!("constant profile must be positive, got {value}")));
        }
        Ok(Self::Constant(value))
    }

    pub fn lorentzian(base: f64, a: f64, gamma: f64) -> Result<Self> {
        if !(base > 0.0 && a >= 0.0 && gamma > 0.0) || !(base.is_finite() && a.is_finite() && gamma.is_finite()) {
            return Err(invalid(format!(
                "lorentzian profile needs base > 0, a ≥ 0, γ > 0 (got base={base}, a={a}, γ={gamma})"
            )));
        }
        Ok(Self::Lorentzian { base, a, gamma })
    }

    pub fn tabulated(z: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !(*v > 0.0)) {
            return Err(invalid("tabulated profile values must be positive"));
        }
        Ok(Self::Tabulated(CubicSpline::natural(z, values)?))
    }

    /// Value, first and second derivative.
    pub fn eval_all(&self, z: f64) -> (f64, f64, f64) {
        match self {
            Self::Constant(v) => (*v, 0.0, 0.0),
            Self::Lorentzian { base, a, gamma } => {
                let x = z / gamma;
                let d = 1.0 + x * x;
                let value = base * (1.0 + a / d);
                let d1 = -base * a * 2.0 * x / (gamma * d * d);
                let d2 = -2.0 * base * a * (1.0 - 3.0 * x * x) / (gamma * gamma * d * d * d);
                (value, d1, d2)
            }
            Self::Tabulated(s) => s.eval_all(z),
        }
    }

    pub fn value(&self, z: f64) -> f64 {
        match self {
            Self::Constant(v) => *v,
            Self::Lorentzian { base, a, gamma } => base * (1.0 + a / (1.0 + (z / gamma).powi(2))),
            Self::Tabulated(s) => s.eval(z),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Self::Constant(_) => true,
            Self::Lorentzian { a, .. } => *a == 0.0,
            Self::Tabulated(_) => false,
        }
    }

    pub fn spline(&self) -> Option<&CubicSpline> {
        match self {
            Self::Tabulated(s) => Some(s),
            _ => None,
        }
    }
}

/// Physical constants; natural units by default. `c² ε₀ μ₀ = 1` is enforced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Units {
    pub c: f64,
    pub eps0: f64,
    pub mu0: f64,
}

impl Default for Units {
    fn default() -> Self {
        Self {
            c: 1.0,
            eps0: 1.0,
            mu0: 1.0,
        }
    }
}

impl Units {
    pub fn new(c: f64, eps0: f64, mu0: f64) -> Result<Self> {
        if !(c > 0.0 && eps0 > 0.0 && mu0 > 0.0) {
            return Err(invalid("units must be positive"));
        }
        let consistency = c * c * eps0 * mu0;
        if (consistency - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("units violate c²·ε₀·μ₀ = 1 (got {consistency})")));
        }
        Ok(Self { c, eps0, mu0 })
    }
}

/// Closed `|ω|` interval on which the dispersion factors are trusted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyWindow {
    pub min: f64,
    pub max: f64,
}

impl Default for FrequencyWindow {
    fn default() -> Self {
        Self {
            min: 0.0,
            max: f64::INFINITY,
        }
    }
}

impl FrequencyWindow {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min >= 0.0 && max > min) {
            return Err(invalid(format!(
                "frequency window needs 0 ≤ ω_min < ω_max, got [{min}, {max}]"
            )));
        }
        Ok(Self { min, max })
    }

    pub fn contains(&self, omega: f64) -> bool {
        let w = omega.abs();
        let slack = 1e-12 * self.max.clamp(1.0, 1e300);
        w >= self.min - slack && w <= self.max + slack
    }

    fn intersect(self, other: (f64, f64)) -> Self {
        Self {
            min: self.min.max(other.0),
            max: self.max.min(other.1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MediumModel {
    pub eps1: DispersionFactor,
    pub mu1: DispersionFactor,
    pub eps2: ProfileFactor,
    pub mu2: ProfileFactor,
    pub units: Units,
    window: FrequencyWindow,
}

impl MediumModel {
    pub fn new(eps1: DispersionFactor, mu1: DispersionFactor, eps2: ProfileFactor, mu2: ProfileFactor) -> Self {
        Self {
            eps1,
            mu1,
            eps2,
            mu2,
            units: Units::default(),
            window: FrequencyWindow::default(),
        }
    }

    /// Vacuum in the given units.
    pub fn vacuum(units: Units) -> Self {
        Self {
            eps1: DispersionFactor::Constant(1.0),
            mu1: DispersionFactor::Constant(1.0),
            eps2: ProfileFactor::Constant(units.eps0),
            mu2: ProfileFactor::Constant(units.mu0),
            units,
            window: FrequencyWindow::default(),
        }
    }

    pub fn with_units(mut self, units: Units) -> Self {
        self.units = units;
        self
    }

    pub fn with_window(mut self, window: FrequencyWindow) -> Self {
        self.window = window;
        self
    }

    /// Declared window intersected with any tabulated sample ranges.
    pub fn window(&self) -> FrequencyWindow {
        let mut w = self.window;
        for range in [self.eps1.sample_range(), self.mu1.sample_range()]
            .into_iter()
            .flatten()
        {
            w = w.intersect(range);
        }
        w
    }

    pub fn declared_window(&self) -> FrequencyWindow {
        self.window
    }

    /// Tabulated frequency factors require an explicit finite window.
    pub fn check(&self) -> Result<()> {
        let tabulated = self.eps1.sample_range().is_some() || self.mu1.sample_range().is_some();
        if tabulated && !self.window.max.is_finite() {
            return Err(invalid("tabulated dispersion requires an explicit window.omega_max"));
        }
        let w = self.window();
        if !(w.max > w.min) {
            return Err(invalid(format!(
                "effective frequency window [{}, {}] is empty",
                w.min, w.max
            )));
        }
        Ok(())
    }

    fn check_omega(&self, omega: f64) -> Result<()> {
        let w = self.window();
        if !omega.is_finite() || !w.contains(omega) {
            return Err(Error::OutOfWindow {
                omega,
                min: w.min,
                max: w.max,
            });
        }
        Ok(())
    }

    pub fn eps1(&self, omega: f64) -> Result<f64> {
        self.check_omega(omega)?;
        Ok(self.eps1.value(omega))
    }

    pub fn mu1(&self, omega: f64) -> Result<f64> {
        self.check_omega(omega)?;
        Ok(self.mu1.value(omega))
    }

    /// `n₁(ω) = √(ε₁ μ₁)`.
    pub fn n1(&self, omega: f64) -> Result<f64> {
        self.check_omega(omega)?;
        let n2 = self.eps1.value(omega) * self.mu1.value(omega);
        if !(n2 > 0.0) {
            return Err(invalid(format!("ε₁μ₁ = {n2} is not positive at ω = {omega}")));
        }
        Ok(n2.sqrt())
    }

    /// `(n₁, dn₁/dω)` at ω.
    pub fn n1_with_derivative(&self, omega: f64) -> Result<(f64, f64)> {
        let n1 = self.n1(omega)?;
        let (e, de) = (self.eps1.value(omega), self.eps1.derivative(omega));
        let (m, dm) = (self.mu1.value(omega), self.mu1.derivative(omega));
        Ok((n1, (de * m + e * dm) / (2.0 * n1)))
    }

    /// `f(ω) = ω n₁(ω)` and `f′(ω)`; fails with `NonMonotone` where `f′ ≤ 0`.
    pub fn f_and_derivative(&self, omega: f64) -> Result<(f64, f64)> {
        let (n1, dn1) = self.n1_with_derivative(omega)?;
        let f = omega * n1;
        let df = n1 + omega * dn1;
        if !(df > 0.0) {
            return Err(Error::NonMonotone { omega, slope: df });
        }
        Ok((f, df))
    }

    /// `f(ω)` without the monotonicity requirement.
    pub fn f(&self, omega: f64) -> Result<f64> {
        Ok(omega * self.n1(omega)?)
    }

    /// Checks `f′ > 0` on `samples` uniform points of `[lo, hi]`, reporting
    /// the first failure.
    pub fn validate_monotone(&self, lo: f64, hi: f64, samples: usize) -> Result<()> {
        if samples < 2 {
            return Err(invalid("validate_monotone needs at least 2 samples"));
        }
        if !(hi > lo) {
            return Err(invalid(format!("empty monotonicity window [{lo}, {hi}]")));
        }
        let step = (hi - lo) / (samples - 1) as f64;
        for i in 0..samples {
            let omega = if i + 1 == samples { hi } else { lo + step * i as f64 };
            self.f_and_derivative(omega)?;
        }
        Ok(())
    }

    /// WKB speed `v₂(z) = 1/√(ε₂ μ₂)`.
    pub fn v2(&self, z: f64) -> f64 {
        1.0 / (self.eps2.value(z) * self.mu2.value(z)).sqrt()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.eps2.is_constant() && self.mu2.is_constant()
    }

    pub fn is_nondispersive(&self) -> bool {
        self.eps1.is_constant() && self.mu1.is_constant()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cauchy_model(b: f64) -> MediumModel {
        MediumModel::new(
            DispersionFactor::cauchy(1.0, b).unwrap(),
            DispersionFactor::Constant(1.0),
            ProfileFactor::Constant(1.0),
            ProfileFactor::Constant(1.0),
        )
    }

    fn tabulated_eps1(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> DispersionFactor {
        let w: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
        let v = w.iter().map(|x| f(*x)).collect();
        DispersionFactor::tabulated(w, v).unwrap()
    }

    #[test]
    fn vacuum_index_is_one() {
        let m = MediumModel::vacuum(Units::default());
        for w in [0.0, 0.3, 7.0, -2.0] {
            assert_eq!(m.n1(w).unwrap(), 1.0);
        }
        assert_eq!(m.f_and_derivative(3.0).unwrap(), (3.0, 1.0));
    }

    #[test]
    fn cauchy_index_and_slope() {
        let m = cauchy_model(1.0);
        assert!((m.n1(1.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let (f, df) = m.f_and_derivative(1.0).unwrap();
        assert!((f - 2f64.sqrt()).abs() < 1e-15);
        assert!((df - (2f64.sqrt() + 1.0 / 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn tabulated_matches_cauchy() {
        let eps1 = tabulated_eps1(0.0, 10.0, 1001, |w| 1.0 + w * w);
        let m = MediumModel::new(
            eps1,
            DispersionFactor::Constant(1.0),
            ProfileFactor::Constant(1.0),
            ProfileFactor::Constant(1.0),
        )
        .with_window(FrequencyWindow::new(0.0, 10.0).unwrap());
        assert!((m.n1(0.5).unwrap() - 1.25f64.sqrt()).abs() < 1e-6);

        // f′ against a dense central difference of f itself.
        let h = 1e-4;
        let (f, df) = m.f_and_derivative(1.0).unwrap();
        let fd = (m.f(1.0 + h).unwrap() - m.f(1.0 - h).unwrap()) / (2.0 * h);
        assert!((f - 2f64.sqrt()).abs() < 1e-5);
        assert!((df - fd).abs() < 1e-5);
        assert!((df - (2f64.sqrt() + 1.0 / 2f64.sqrt())).abs() < 1e-5);
    }

    #[test]
    fn out_of_window_is_reported() {
        let eps1 = tabulated_eps1(0.0, 5.0, 101, |w| 1.0 + w * w);
        let m = MediumModel::new(
            eps1,
            DispersionFactor::Constant(1.0),
            ProfileFactor::Constant(1.0),
            ProfileFactor::Constant(1.0),
        )
        .with_window(FrequencyWindow::new(0.0, 10.0).unwrap());
        assert_eq!(m.window().max, 5.0);
        assert!(matches!(m.n1(6.0), Err(Error::OutOfWindow { .. })));
        assert!(matches!(m.n1(-6.0), Err(Error::OutOfWindow { .. })));
        assert!(m.n1(-4.0).is_ok());
    }

    #[test]
    fn tabulated_without_window_is_rejected() {
        let eps1 = tabulated_eps1(0.0, 5.0, 101, |w| 1.0 + w * w);
        let m = MediumModel::new(
            eps1,
            DispersionFactor::Constant(1.0),
            ProfileFactor::Constant(1.0),
            ProfileFactor::Constant(1.0),
        );
        assert!(m.check().is_err());
    }

    #[test]
    fn monotone_presets() {
        assert!(cauchy_model(1.0).validate_monotone(0.1, 10.0, 100).is_ok());
        assert!(MediumModel::vacuum(Units::default())
            .validate_monotone(0.0, 50.0, 7)
            .is_ok());
    }

    #[test]
    fn dip_is_rejected_near_two() {
        // ε₁ falls steeply on the right flank of a bump centred at 1.9.
        let bump = |w: f64| 1.0 + 3.0 * (-(w - 1.9f64).powi(2) / (2.0 * 0.1f64.powi(2))).exp();
        let eps1 = tabulated_eps1(0.0, 4.0, 2001, bump);
        let m = MediumModel::new(
            eps1,
            DispersionFactor::Constant(1.0),
            ProfileFactor::Constant(1.0),
            ProfileFactor::Constant(1.0),
        )
        .with_window(FrequencyWindow::new(0.0, 4.0).unwrap());
        let err = m.validate_monotone(0.1, 4.0, 400).unwrap_err();
        let Error::NonMonotone { omega, .. } = err else {
            panic!("expected NonMonotone, got {err:?}")
        };
        // Independent check: a dense finite difference of f changes sign there.
        let f = |w: f64| w * bump(w).sqrt();
        let fd = |w: f64| (f(w + 1e-5) - f(w - 1e-5)) / 2e-5;
        assert!(fd(omega) <= 1e-3, "fd at {omega} = {}", fd(omega));
        assert!(fd(omega - 0.02) > 0.0);
        assert!((omega - 2.0).abs() < 0.2, "failure at {omega}");
    }

    #[test]
    fn lorentzian_derivatives_match_finite_differences() {
        let p = ProfileFactor::lorentzian(1.0, 0.7, 2.5).unwrap();
        for z in [-4.0, -0.3, 0.0, 1.1, 6.0] {
            let h = 1e-4;
            let (_, d1, d2) = p.eval_all(z);
            let fd1 = (p.value(z + h) - p.value(z - h)) / (2.0 * h);
            let fd2 = (p.value(z + h) - 2.0 * p.value(z) + p.value(z - h)) / (h * h);
            assert!((d1 - fd1).abs() <= 1e-5 * d1.abs().max(1e-3));
            assert!((d2 - fd2).abs() <= 1e-5 * d2.abs().max(1e-2));
        }
    }

    #[test]
    fn units_must_be_consistent() {
        assert!(Units::new(2.0, 0.5, 0.5).is_ok());
        assert!(Units::new(2.0, 1.0, 1.0).is_err());
    }
}
