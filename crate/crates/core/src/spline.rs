//! Natural cubic spline interpolation with first and second derivatives.

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    /// Natural boundary conditions (`y'' = 0` at both ends).
    pub fn natural(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 3 || y.len() != n {
            return Err(invalid("spline needs at least 3 knots and matching value count"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("spline knots must be strictly increasing"));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(invalid("spline knots and values must be finite"));
        }
        // Tridiagonal system for the interior second derivatives (Thomas algorithm).
        let mut m = vec![0.0; n];
        let mut c_prime = vec![0.0; n];
        let mut d_prime = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let a = h0 / 6.0;
            let b = (h0 + h1) / 3.0;
            let c = h1 / 6.0;
            let d = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
            let denom = b - a * c_prime[i - 1];
            c_prime[i] = c / denom;
            d_prime[i] = (d - a * d_prime[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = d_prime[i] - c_prime[i] * m[i + 1];
        }
        Ok(Self { x, y, m })
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    /// Largest knot spacing.
    pub fn max_spacing(&self) -> f64 {
        self.x.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.x.len();
        match self
            .x
            .binary_search_by(|v| v.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    /// Value, first and second derivative at `t`. Outside the knot range the
    /// end cubic is extrapolated.
    pub fn eval_all(&self, t: f64) -> (f64, f64, f64) {
        let i = self.segment(t);
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let h = x1 - x0;
        let a = (x1 - t) / h;
        let b = (t - x0) / h;
        let value = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 = (y1 - y0) / h - (3.0 * a * a - 1.0) * h * m0 / 6.0 + (3.0 * b * b - 1.0) * h * m1 / 6.0;
        let d2 = a * m0 + b * m1;
        (value, d1, d2)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_all(t).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubic_interior() {
        let x: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let y: Vec<f64> = x.iter().map(|t| 1.0 + t * t).collect();
        let s = CubicSpline::natural(x, y).unwrap();
        let (v, d1, d2) = s.eval_all(4.321);
        assert!((v - (1.0 + 4.321f64.powi(2))).abs() < 1e-9);
        assert!((d1 - 2.0 * 4.321).abs() < 1e-7);
        assert!((d2 - 2.0).abs() < 1e-5);
    }

    #[test]
    fn rejects_unsorted_knots() {
        assert!(CubicSpline::natural(vec![0.0, 2.0, 1.0], vec![1.0, 1.0, 1.0]).is_err());
        assert!(CubicSpline::natural(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn interpolates_knots_exactly() {
        let x = vec![0.0, 0.7, 1.1, 2.5, 3.0];
        let y = vec![1.0, -2.0, 0.5, 4.0, 3.0];
        let s = CubicSpline::natural(x.clone(), y.clone()).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert!((s.eval(*xi) - yi).abs() < 1e-14);
        }
        assert_eq!(s.eval_all(0.0).2, 0.0);
        assert_eq!(s.eval_all(3.0).2, 0.0);
    }
}
