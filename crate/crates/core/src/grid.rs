//! Uniform z-axis grids and edge tapers.

use crate::error::{invalid, Result};

/// Edge taper applied to windowed inputs. `fraction` is the ramp length on
/// each side as a fraction of the window span.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Taper {
    #[default]
    None,
    /// Raised-cosine ramps (Tukey window).
    Cosine { fraction: f64 },
    /// C^∞ Planck-taper ramps; spectral leakage decays faster than any power.
    Planck { fraction: f64 },
}

impl Taper {
    pub fn fraction(&self) -> f64 {
        match self {
            Taper::None => 0.0,
            Taper::Cosine { fraction } | Taper::Planck { fraction } => *fraction,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Taper::None => Ok(()),
            Taper::Cosine { fraction } | Taper::Planck { fraction } => {
                if *fraction > 0.0 && *fraction < 0.5 {
                    Ok(())
                } else {
                    Err(invalid(format!("taper fraction must lie in (0, 0.5), got {fraction}")))
                }
            }
        }
    }

    /// Ramp value for a point at distance `d ≥ 0` from the window edge, ramp
    /// length `len`.
    fn ramp(&self, d: f64, len: f64) -> f64 {
        if d >= len {
            return 1.0;
        }
        if d <= 0.0 {
            return 0.0;
        }
        match self {
            Taper::None => 1.0,
            Taper::Cosine { .. } => 0.5 * (1.0 - (std::f64::consts::PI * d / len).cos()),
            Taper::Planck { .. } => {
                let zeta = len / d - len / (len - d);
                if zeta > 700.0 {
                    0.0
                } else {
                    1.0 / (1.0 + zeta.exp())
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisGrid {
    z_min: f64,
    z_max: f64,
    n: usize,
    taper: Taper,
}

impl AxisGrid {
    pub fn new(z_min: f64, z_max: f64, n: usize) -> Result<Self> {
        Self::with_taper(z_min, z_max, n, Taper::None)
    }

    pub fn with_taper(z_min: f64, z_max: f64, n: usize, taper: Taper) -> Result<Self> {
        if n < 3 {
            return Err(invalid(format!("axis grid needs at least 3 points, got {n}")));
        }
        if !(z_max > z_min) || !z_min.is_finite() || !z_max.is_finite() {
            return Err(invalid(format!(
                "axis grid needs finite z_min < z_max, got [{z_min}, {z_max}]"
            )));
        }
        taper.validate()?;
        Ok(Self { z_min, z_max, n, taper })
    }

    pub fn z_min(&self) -> f64 {
        self.z_min
    }

    pub fn z_max(&self) -> f64 {
        self.z_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn span(&self) -> f64 {
        self.z_max - self.z_min
    }

    pub fn spacing(&self) -> f64 {
        self.span() / (self.n - 1) as f64
    }

    pub fn taper(&self) -> Taper {
        self.taper
    }

    /// Ramp length of the taper on each side.
    pub fn taper_length(&self) -> f64 {
        self.taper.fraction() * self.span()
    }

    pub fn z(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.z_max
        } else {
            self.z_min + self.spacing() * i as f64
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.z(i)).collect()
    }

    /// Taper weights at the grid points (all ones without a taper).
    pub fn taper_weights(&self) -> Vec<f64> {
        let len = self.taper_length();
        (0..self.n)
            .map(|i| {
                if matches!(self.taper, Taper::None) {
                    return 1.0;
                }
                let z = self.z(i);
                let d = (z - self.z_min).min(self.z_max - z);
                self.taper.ramp(d, len)
            })
            .collect()
    }

    /// Trapezoid quadrature weights.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut w = vec![h; self.n];
        w[0] = 0.5 * h;
        w[self.n - 1] = 0.5 * h;
        w
    }

    /// Trapezoid weights multiplied by the taper.
    pub fn window_weights(&self) -> Vec<f64> {
        self.trapezoid_weights()
            .iter()
            .zip(self.taper_weights())
            .map(|(a, b)| a * b)
            .collect()
    }

    /// Same axis without the taper.
    pub fn untapered(&self) -> Self {
        Self {
            taper: Taper::None,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_spacing_hits_endpoints() {
        let g = AxisGrid::new(-1.0, 1.0, 201).unwrap();
        assert_eq!(g.z(0), -1.0);
        assert_eq!(g.z(200), 1.0);
        assert!((g.spacing() - 0.01).abs() < 1e-15);
        assert!(g.points().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(AxisGrid::new(0.0, 1.0, 2).is_err());
        assert!(AxisGrid::new(1.0, 0.0, 10).is_err());
        assert!(AxisGrid::with_taper(0.0, 1.0, 10, Taper::Cosine { fraction: 0.5 }).is_err());
        assert!(AxisGrid::with_taper(0.0, 1.0, 10, Taper::Planck { fraction: 0.0 }).is_err());
    }

    #[test]
    fn cosine_taper_integrates_to_span_minus_ramp() {
        // Each raised-cosine ramp integrates to half its length.
        let g = AxisGrid::with_taper(-100.0, 100.0, 20001, Taper::Cosine { fraction: 0.1 }).unwrap();
        let area: f64 = g.window_weights().iter().sum();
        assert!((area - 180.0).abs() < 1e-6, "area {area}");
        let w = g.taper_weights();
        assert_eq!(w[0], 0.0);
        assert_eq!(w[10000], 1.0);
    }

    #[test]
    fn planck_taper_is_symmetric_and_bounded() {
        let g = AxisGrid::with_taper(-10.0, 10.0, 401, Taper::Planck { fraction: 0.3 }).unwrap();
        let w = g.taper_weights();
        for i in 0..w.len() {
            assert!((0.0..=1.0).contains(&w[i]));
            assert!((w[i] - w[w.len() - 1 - i]).abs() < 1e-12);
        }
        // The ramp of a Planck taper also integrates to half its length (odd symmetry about the midpoint).
        let area: f64 = g.window_weights().iter().sum();
        assert!((area - 14.0).abs() < 1e-6, "area {area}");
    }
}
