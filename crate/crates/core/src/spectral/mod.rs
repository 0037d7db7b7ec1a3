//! Finite-difference oracle for `h₂ = ε₂^{−1/2} p μ₂^{−1} p ε₂^{−1/2}`:
//! assembly, symmetric eigensolvers, the inverse of `f`, and the
//! non-dispersive initial-value propagator.

mod eigen;
mod evolve;
mod operator;

pub use eigen::{eigenpairs_at, eigensolve, eigenvalues, omega_from_lambda, EigenPair, MAX_QL_ITERATIONS};
pub use evolve::{evolve_nondispersive, reconstruct_b, SpectralPropagator};
pub use operator::{discretize_h2, Boundary, DiscreteOperator};
