//! WKB-approximate time-harmonic solutions of Maxwell's equations for planar
//! waves in stationary, separable, inhomogeneous dispersive media.
//!
//! The medium is `ε(z, ω) = ε₁(ω) ε₂(z)`, `μ(z, ω) = μ₁(ω) μ₂(z)`. The crate
//! builds the WKB eigenfunctions of the Hermitian operator `h`, projects
//! initial fields onto them, evolves them in time, and checks everything
//! against an independent finite-difference spectral solver of `h₂`.
//!
//! Module map:
//!
//! * [`media`]: dispersion and profile factors, `n₁`, `f(ω) = ω n₁(ω)`.
//! * [`grid`], [`field`]: sample grids and complex sampled fields.
//! * [`wkb`]: phase table `u₂`, `v₂`, WKB eigenfunctions and validity functional.
//! * [`spectral`]: discretized `h₂`, symmetric eigensolvers, non-dispersive propagator.
//! * [`modes`]: mode-function projection, reconstruction, Gram and completeness checks.
//! * [`perturb`]: the Lorentzian-inhomogeneity first-order mode function.
//! * [`cli`]: TOML experiment configuration and the `wkbwave` command driver.

// `!(x > 0.0)` guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod field;
pub mod grid;
pub mod media;
pub mod modes;
pub mod perturb;
pub mod quadrature;
pub mod spectral;
pub mod spline;
pub mod wkb;

pub use error::{Error, Result};
pub use field::SampledField;
pub use grid::{AxisGrid, Taper};
pub use media::{DispersionFactor, FrequencyWindow, MediumModel, ProfileFactor, Units};
pub use modes::{FrequencyGrid, ModeFunction};
pub use num_complex::Complex64;
pub use spectral::{Boundary, DiscreteOperator, EigenPair};
pub use wkb::{PhaseTable, ValidityReport};
