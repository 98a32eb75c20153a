//! Eigenvalue-condition functions built from the propagated solutions.
//!
//! E is an eigenvalue when a linear combination of ψ₁ and ψ₂ decays at
//! both contour ends.  The full condition is the 2×2 determinant over
//! both endpoints; PT symmetry of the wave function reduces it to the
//! real scalar F(E) = Re[conj(ψ₁(x₊))·ψ₂(x₊)], whose zero crossings can
//! be bisected.  F is reported in renormalized scale — only its sign
//! structure matters and the positive real rescaling preserves it.

use num_complex::Complex64;

use crate::contour::ContourSpec;
use crate::error::Result;
use crate::integrator::{Direction, IntegratorConfig, Propagator};
use crate::potential::PotentialSpec;

/// Value of the PT-reduced eigenvalue condition at one energy.
#[derive(Debug, Clone, Copy)]
pub struct MismatchResult {
    pub energy: f64,
    /// Re[conj(ψ₁)·ψ₂] at the endpoint, renormalized scale.
    pub f: f64,
    /// Accumulated log-magnitude factored out of F (diagnostics).
    pub logmag: f64,
}

/// Determinant condition over both endpoints, renormalized: the true
/// determinant is `det · exp(logmag)`.
#[derive(Debug, Clone, Copy)]
pub struct DetResult {
    pub energy: f64,
    pub det: Complex64,
    pub logmag: f64,
    /// Forward-run scale sum, for cross-checks against the F form.
    pub logmag_forward: f64,
}

/// Holds the coefficient tables so an E-grid scan pays no contour or
/// potential evaluations.
pub struct Shooter {
    forward: Propagator,
    backward: Propagator,
}

impl Shooter {
    pub fn new(spec: &ContourSpec, pspec: &PotentialSpec, cfg: &IntegratorConfig) -> Result<Self> {
        Ok(Self {
            forward: Propagator::new(spec, pspec, Direction::Forward, cfg)?,
            backward: Propagator::new(spec, pspec, Direction::Backward, cfg)?,
        })
    }

    /// F(E) from the forward endpoint.
    pub fn mismatch(&self, energy: f64) -> Result<MismatchResult> {
        let pair = self.forward.propagate(energy)?;
        Ok(reduce(energy, pair.s1.psi, pair.s2.psi, pair.logscale1 + pair.logscale2, 1.0))
    }

    /// F(E) evaluated from the backward endpoint instead; by the PT
    /// reflection of the solutions this agrees with [`Self::mismatch`].
    pub fn mismatch_backward(&self, energy: f64) -> Result<MismatchResult> {
        let pair = self.backward.propagate(energy)?;
        // ψ₁(−T) = −conj(ψ₁(T)), ψ₂(−T) = conj(ψ₂(T)), so the same real
        // number is −Re[conj(ψ₁(−T))·ψ₂(−T)].
        Ok(reduce(energy, pair.s1.psi, pair.s2.psi, pair.logscale1 + pair.logscale2, -1.0))
    }

    /// The unreduced determinant ψ₁(x₊)ψ₂(x₋) − ψ₁(x₋)ψ₂(x₊), both
    /// directions integrated, renormalized so the stored complex value
    /// is the determinant relative to the size of its two products.
    pub fn det_mismatch(&self, energy: f64) -> Result<DetResult> {
        let fwd = self.forward.propagate(energy)?;
        let bwd = self.backward.propagate(energy)?;
        let la = fwd.logscale1 + bwd.logscale2;
        let lb = bwd.logscale1 + fwd.logscale2;
        let lref = la.max(lb);
        let pa = fwd.s1.psi * bwd.s2.psi * (la - lref).exp();
        let pb = bwd.s1.psi * fwd.s2.psi * (lb - lref).exp();
        let m = pa.norm().max(pb.norm()).max(f64::MIN_POSITIVE);
        Ok(DetResult {
            energy,
            det: (pa - pb) / m,
            logmag: lref + m.ln(),
            logmag_forward: fwd.logscale1 + fwd.logscale2,
        })
    }
}

/// Normalize Re[conj(ψ₁)·ψ₂] by the endpoint magnitudes so F sits in
/// [−1, 1]; the division is by a positive real, so the sign structure
/// of the eigenvalue condition is untouched and the true value is
/// recovered as F·exp(logmag).
fn reduce(energy: f64, psi1: Complex64, psi2: Complex64, logscale: f64, orient: f64) -> MismatchResult {
    let m = (psi1.norm() * psi2.norm()).max(f64::MIN_POSITIVE);
    MismatchResult {
        energy,
        f: orient * (psi1.conj() * psi2).re / m,
        logmag: logscale + m.ln(),
    }
}

/// One-shot mismatch evaluation.
pub fn mismatch(
    energy: f64,
    spec: &ContourSpec,
    pspec: &PotentialSpec,
    cfg: &IntegratorConfig,
) -> Result<MismatchResult> {
    let pair = Propagator::new(spec, pspec, Direction::Forward, cfg)?.propagate(energy)?;
    Ok(reduce(energy, pair.s1.psi, pair.s2.psi, pair.logscale1 + pair.logscale2, 1.0))
}
