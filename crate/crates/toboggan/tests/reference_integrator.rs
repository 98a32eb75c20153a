//! The production propagator is fixed-step RK4.  These tests pit it
//! against an independently written adaptive step-doubling RK4 with
//! Richardson extrapolation, with the contour and potential formulas
//! re-derived by hand rather than taken from the library, so any shared
//! mistake would have to be made twice.

use num_complex::Complex64;
use std::f64::consts::PI;

use toboggan::contour::ContourSpec;
use toboggan::integrator::{Direction, IntegratorConfig, Propagator};
use toboggan::potential::PotentialSpec;

type State = [Complex64; 2]; // (ψ, dψ/dx)

/// One classical RK4 step of ψ' = x'(t)·χ, χ' = x'(t)·(W−E)·ψ.
fn rk4<F>(f: &F, t: f64, y: State, h: f64) -> State
where
    F: Fn(f64, State) -> State,
{
    let k1 = f(t, y);
    let y2 = [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]];
    let k2 = f(t + 0.5 * h, y2);
    let y3 = [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]];
    let k3 = f(t + 0.5 * h, y3);
    let y4 = [y[0] + h * k3[0], y[1] + h * k3[1]];
    let k4 = f(t + h, y4);
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Adaptive step-doubling driver: each step is taken once with h and
/// twice with h/2; the difference controls the step and the
/// Richardson-combined value (error one order higher) is kept.
fn integrate_adaptive<F>(f: &F, mut t: f64, t_end: f64, mut y: State, rel_tol: f64) -> State
where
    F: Fn(f64, State) -> State,
{
    let mut h = 1e-3_f64;
    while t < t_end {
        h = h.min(t_end - t);
        let full = rk4(f, t, y, h);
        let half = rk4(f, t + 0.5 * h, rk4(f, t, y, 0.5 * h), 0.5 * h);
        let scale = half[0].norm().max(half[1].norm()).max(1.0);
        let err = (half[0] - full[0]).norm().max((half[1] - full[1]).norm()) / scale;
        if err > rel_tol && h > 1e-9 {
            h *= 0.5;
            continue;
        }
        y = [
            half[0] + (half[0] - full[0]) / 15.0,
            half[1] + (half[1] - full[1]) / 15.0,
        ];
        t += h;
        if err < rel_tol / 64.0 {
            h *= 2.0;
        }
    }
    y
}

fn rel_diff(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

#[test]
fn matches_adaptive_reference_on_the_line() {
    // λ=0, ε=0, E=0.5: contour x = t − i, potential W = x², forward
    // endpoint t = 10
    let energy = 0.5;
    let f = |t: f64, y: State| -> State {
        let x = Complex64::new(t, -1.0);
        let w = x * x;
        [y[1], (w - energy) * y[0]]
    };
    let psi1 = integrate_adaptive(&f, 0.0, 10.0, [Complex64::ZERO, Complex64::ONE], 1e-12);
    let psi2 = integrate_adaptive(&f, 0.0, 10.0, [Complex64::ONE, Complex64::ZERO], 1e-12);

    let spec = ContourSpec::new(0, 10.0).unwrap();
    let pspec = PotentialSpec::new(0.0);
    let prop = Propagator::new(&spec, &pspec, Direction::Forward, &IntegratorConfig::default())
        .unwrap();
    let pair = prop.propagate(energy).unwrap();
    assert_eq!(pair.logscale1, 0.0, "no renormalization expected here");

    assert!(rel_diff(pair.s1.psi, psi1[0]) < 1e-8, "ψ₁ endpoint");
    assert!(rel_diff(pair.s1.dpsi, psi1[1]) < 1e-8, "ψ₁′ endpoint");
    assert!(rel_diff(pair.s2.psi, psi2[0]) < 1e-8, "ψ₂ endpoint");
    assert!(rel_diff(pair.s2.dpsi, psi2[1]) < 1e-8, "ψ₂′ endpoint");
}

#[test]
fn matches_adaptive_reference_through_a_winding() {
    // λ=1, ε=0.25, E=1.7.  Hand-written geometry: circle x = −i·e^{it}
    // up to t=π, then the upper-half tail x = −(s − i), s = t − π, with
    // the continued argument θ = atan2(1, −s) picking up where the
    // circle's θ = t − π/2 left off.
    let energy = 1.7;
    let eps = 0.25;
    let w_polar = |ln_r: f64, theta: f64| -> Complex64 {
        ((2.0 + eps) * Complex64::new(ln_r, theta) + Complex64::new(0.0, eps * PI / 2.0)).exp()
    };
    let f = |t: f64, y: State| -> State {
        let (dx, w) = if t <= PI {
            let dx = Complex64::from_polar(1.0, t);
            (dx, w_polar(0.0, t - PI / 2.0))
        } else {
            let s = t - PI;
            let r = (s * s + 1.0).sqrt();
            (-Complex64::ONE, w_polar(r.ln(), (1.0_f64).atan2(-s)))
        };
        [dx * y[1], dx * (w - energy) * y[0]]
    };
    // split at the C¹ junction so no reference step straddles it
    let run = |y0: State| -> State {
        let mid = integrate_adaptive(&f, 0.0, PI, y0, 1e-12);
        integrate_adaptive(&f, PI, PI + 10.0, mid, 1e-12)
    };
    let psi1 = run([Complex64::ZERO, Complex64::ONE]);
    let psi2 = run([Complex64::ONE, Complex64::ZERO]);

    let spec = ContourSpec::new(1, 10.0).unwrap();
    let pspec = PotentialSpec::new(eps);
    let prop = Propagator::new(&spec, &pspec, Direction::Forward, &IntegratorConfig::default())
        .unwrap();
    let pair = prop.propagate(energy).unwrap();
    assert_eq!(pair.logscale1, 0.0);

    assert!(rel_diff(pair.s1.psi, psi1[0]) < 1e-7, "ψ₁ endpoint");
    assert!(rel_diff(pair.s1.dpsi, psi1[1]) < 1e-7, "ψ₁′ endpoint");
    assert!(rel_diff(pair.s2.psi, psi2[0]) < 1e-7, "ψ₂ endpoint");
    assert!(rel_diff(pair.s2.dpsi, psi2[1]) < 1e-7, "ψ₂′ endpoint");
}
