use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Complex samples of a function on a grid (z-axis or frequency axis).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    /// Abscissae, one per value.
    pub points: Vec<f64>,
    pub values: Vec<Complex64>,
    pub label: String,
}

impl SampledField {
    pub fn new(points: Vec<f64>, values: Vec<Complex64>, label: impl Into<String>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(invalid(format!(
                "sampled field has {} points but {} values",
                points.len(),
                values.len()
            )));
        }
        Ok(Self {
            points,
            values,
            label: label.into(),
        })
    }

    pub fn from_real(points: Vec<f64>, values: &[f64], label: impl Into<String>) -> Result<Self> {
        Self::new(points, values.iter().map(|v| Complex64::new(*v, 0.0)).collect(), label)
    }

    pub fn zeros(points: Vec<f64>, label: impl Into<String>) -> Self {
        let n = points.len();
        Self {
            points,
            values: vec![Complex64::new(0.0, 0.0); n],
            label: label.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Discrete `L²` norm with the given quadrature weights.
    pub fn weighted_norm(&self, weights: &[f64]) -> f64 {
        self.values
            .iter()
            .zip(weights)
            .map(|(v, w)| w * v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Relative `L²` distance `‖self − other‖ / ‖other‖` with trapezoid-free
    /// uniform weights.
    pub fn relative_l2_error(&self, reference: &SampledField) -> f64 {
        let num: f64 = self
            .values
            .iter()
            .zip(&reference.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let den: f64 = reference.values.iter().map(|b| b.norm_sqr()).sum();
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }
}
