//! Closed-form level table E_n(ε) = 2n+1 + (ε/2)·ψ((2⌈n/2⌉+1)/2)
//! behind the `perturb` subcommand, together with a self-contained
//! digamma implementation.  First-order slopes at ε = 0 are the same
//! for every winding number, so they can be used to check contours
//! against each other; the exact coefficient is the Gaussian matrix
//! element ⟨n|x²ln|x||n⟩ (see the acceptance suite), which this paired
//! digamma table summarizes only coarsely.

use crate::error::{Error, Result};

/// Level index with its ε-expansion data: E_n(ε) ≈ base + slope·ε.
#[derive(Debug, Clone, Copy)]
pub struct FirstOrderCoefficient {
    pub n: u32,
    pub base: f64,
    pub slope: f64,
}

impl FirstOrderCoefficient {
    pub fn new(n: u32) -> Self {
        let m = (n + 1) / 2; // ⌈n/2⌉
        Self {
            n,
            base: 2.0 * n as f64 + 1.0,
            slope: 0.5 * digamma((2.0 * m as f64 + 1.0) / 2.0).expect("argument > 0"),
        }
    }

    pub fn energy(&self, epsilon: f64) -> f64 {
        self.base + self.slope * epsilon
    }
}

/// B_{2k}/(2k) for the asymptotic expansion ψ(x) ~ ln x − 1/(2x) − Σ B_{2k}/(2k x^{2k}).
const ASYMP: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
];

/// Digamma ψ(x) = (ln Γ(x))′ for x > 0, to ~1e−12: upward recurrence
/// ψ(x+1) = ψ(x) + 1/x until x > 8, then the asymptotic series.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(x));
    }
    let mut x = x;
    let mut acc = 0.0;
    while x <= 8.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let mut series = 0.0;
    let mut p = inv2;
    for c in ASYMP {
        series += c * p;
        p *= inv2;
    }
    Ok(acc + x.ln() - 0.5 / x - series)
}

/// E_n to first order in ε.
pub fn first_order_energy(n: u32, epsilon: f64) -> f64 {
    FirstOrderCoefficient::new(n).energy(epsilon)
}
