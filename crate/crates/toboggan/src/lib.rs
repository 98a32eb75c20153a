//! Eigenvalue solver for the Bender Hamiltonian family
//! −ψ″ + x²(ix)^ε ψ = Eψ on complex integration contours that wind
//! λ times around the branch point at the origin.
//!
//! The pipeline is: build a PT-symmetric contour ([`contour`]), evaluate
//! the multi-sheeted potential along it ([`potential`]), propagate two
//! shooting solutions from the contour center ([`integrator`]), reduce
//! them to a real eigenvalue-condition function ([`shooting`]), find its
//! zeros ([`rootfind`]) and sweep/track branches over ε ([`spectrum`]).
//! [`perturbation`] provides the first-order analytic cross-check.

pub mod contour;
pub mod error;
pub mod integrator;
pub mod perturbation;
pub mod potential;
pub mod rootfind;
pub mod shooting;
pub mod spectrum;

pub use error::{Error, Result};
