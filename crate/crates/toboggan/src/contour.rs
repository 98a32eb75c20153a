//! PT-symmetric integration contours with winding number λ.
//!
//! The contour consists of a unit circle traversed λ times around the
//! origin (the branch point of the potential) with straight tails
//! attached tangentially at the circle's bottom/top.  Its center sits at
//! x = −i on the principal sheet and the whole curve satisfies the PT
//! reflection x(−t) = −conj(x(t)).  Alongside the position we carry the
//! continuous argument θ(t), which encodes the Riemann sheet each point
//! lies on; θ is never reduced mod 2π.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Geometry of a winding contour: unit circle looped `winding` times,
/// horizontal tails reaching |Re x| = `tail_extent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec {
    winding: u32,
    radius: f64,
    tail_extent: f64,
}

/// Minimum tail reach; shorter tails invalidate the asymptotic-decay
/// condition at the endpoints.
pub const MIN_TAIL_EXTENT: f64 = 5.0;

/// Default |Re x| reach of the straight tails.
pub const DEFAULT_TAIL_EXTENT: f64 = 10.0;

impl ContourSpec {
    /// Unit-radius contour with the given winding number and tail reach.
    pub fn new(winding: u32, tail_extent: f64) -> Result<Self> {
        Self::with_radius(winding, 1.0, tail_extent)
    }

    /// Only radius = 1 is accepted; the field exists so the restriction
    /// is explicit rather than implicit.
    pub fn with_radius(winding: u32, radius: f64, tail_extent: f64) -> Result<Self> {
        if radius != 1.0 {
            return Err(Error::InvalidParameter(format!(
                "contour radius must be 1 (got {radius})"
            )));
        }
        if !(tail_extent >= MIN_TAIL_EXTENT) {
            return Err(Error::InvalidParameter(format!(
                "tail_extent must be ≥ {MIN_TAIL_EXTENT} (got {tail_extent})"
            )));
        }
        Ok(Self {
            winding,
            radius,
            tail_extent,
        })
    }

    pub fn winding(&self) -> u32 {
        self.winding
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn tail_extent(&self) -> f64 {
        self.tail_extent
    }

    /// Parameter value where the circle hands over to the tails.
    pub fn junction(&self) -> f64 {
        self.winding as f64 * PI
    }
}

impl Default for ContourSpec {
    fn default() -> Self {
        Self {
            winding: 0,
            radius: 1.0,
            tail_extent: DEFAULT_TAIL_EXTENT,
        }
    }
}

/// A sampled point of the contour: position, unit-speed tangent and the
/// continuous argument θ of x (the sheet label).
#[derive(Debug, Clone, Copy)]
pub struct ContourPoint {
    pub t: f64,
    pub x: Complex64,
    pub dx: Complex64,
    pub theta: f64,
}

/// Evaluate the contour at parameter `t`.
///
/// Circle part (|t| ≤ λπ): x = −i·e^{it}, so θ(t) = t − π/2 with the
/// anchor θ(0) = −π/2 at the center x = −i.  Tail part: straight lines
/// x = (−1)^λ·(t − λπ·sgn t − i), tangent-matched at the junctions; θ is
/// continued from the junction value by principal-branch unwrapping
/// (the tails keep |Im x| = 1, so each increment stays below π).
pub fn point(spec: &ContourSpec, t: f64) -> ContourPoint {
    let tj = spec.junction();
    if t.abs() <= tj {
        // x = −i e^{it} = e^{i(t − π/2)}
        let theta = t - PI / 2.0;
        ContourPoint {
            t,
            x: Complex64::from_polar(1.0, theta),
            dx: Complex64::from_polar(1.0, t),
            theta,
        }
    } else {
        let sign = if spec.winding % 2 == 0 { 1.0 } else { -1.0 };
        let s = t - tj * t.signum();
        let x = sign * Complex64::new(s, -1.0);
        let dx = Complex64::new(sign, 0.0);
        // junction values on the same side
        let t_j = tj * t.signum();
        let theta_j = t_j - PI / 2.0;
        let x_j = Complex64::from_polar(1.0, theta_j);
        let theta = theta_j + principal_delta(x.arg(), x_j.arg());
        ContourPoint { t, x, dx, theta }
    }
}

/// Wrap the principal-argument difference `a − b` into (−π, π].
fn principal_delta(a: f64, b: f64) -> f64 {
    let mut d = a - b;
    while d > PI {
        d -= 2.0 * PI;
    }
    while d <= -PI {
        d += 2.0 * PI;
    }
    d
}

/// Endpoint parameters t_± = ±(λπ + L), where the contour reaches
/// |Re x| = L.
pub fn endpoints(spec: &ContourSpec) -> (f64, f64) {
    let t = spec.junction() + spec.tail_extent();
    (-t, t)
}

/// Numerically check the PT reflection identities x(−t) = −conj(x(t))
/// and θ(−t) = −π − θ(t) on a uniform sample of the whole contour.
pub fn verify_pt_geometry(spec: &ContourSpec, samples: usize) -> bool {
    assert!(samples >= 2);
    let (_, t_max) = endpoints(spec);
    let tol = 1e-12;
    (0..samples).all(|k| {
        let t = t_max * k as f64 / (samples - 1) as f64;
        let p = point(spec, t);
        let m = point(spec, -t);
        (m.x + p.x.conj()).norm() <= tol && (m.theta + PI + p.theta).abs() <= tol
    })
}
