//! Grid bracketing and bisection for the real mismatch function F(E).
//!
//! The grid scan also flags local minima of |F| that dip well below
//! their neighborhood without a sign change: near an exceptional point
//! two roots collide and F only touches zero, so such minima are
//! candidate double roots.  The flags are advisory; resolving them is
//! an ε-direction question handled in the spectrum layer.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// A sign-change interval of f.
#[derive(Debug, Clone, Copy)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct RootConfig {
    pub e_min: f64,
    pub e_max: f64,
    pub grid_step: f64,
    pub tol: f64,
    /// Relative dip of |f| below its neighbors that flags a candidate
    /// tangential (double) root.
    pub flat_threshold: f64,
}

impl RootConfig {
    pub fn new(e_min: f64, e_max: f64) -> Self {
        Self {
            e_min,
            e_max,
            grid_step: 0.05,
            tol: 1e-10,
            flat_threshold: 0.1,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.e_min < self.e_max) {
            return Err(Error::InvalidParameter(format!(
                "empty energy window [{}, {}]",
                self.e_min, self.e_max
            )));
        }
        if !(self.grid_step > 0.0 && self.grid_step < self.e_max - self.e_min) {
            return Err(Error::InvalidParameter(format!(
                "grid_step {} does not fit the window",
                self.grid_step
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter("tol must be positive".into()));
        }
        Ok(())
    }
}

/// Evaluate f on the uniform grid and collect sign-change brackets (in
/// ascending order) plus flagged near-tangential minima of |f|.
pub fn scan<F>(f: F, cfg: &RootConfig) -> Result<(Vec<Bracket>, Vec<f64>)>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    cfg.validate()?;
    let n = ((cfg.e_max - cfg.e_min) / cfg.grid_step).ceil() as usize;
    let grid: Vec<f64> = (0..=n)
        .map(|k| (cfg.e_min + k as f64 * cfg.grid_step).min(cfg.e_max))
        .collect();
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&e| f(e))
        .collect::<Result<Vec<_>>>()?;

    let mut brackets = Vec::new();
    for k in 0..n {
        if values[k] == 0.0 {
            // exact grid hit: synthesize a tiny bracket around it
            brackets.push(Bracket {
                lo: grid[k],
                hi: grid[k],
                f_lo: 0.0,
                f_hi: 0.0,
            });
        } else if values[k] * values[k + 1] < 0.0 {
            brackets.push(Bracket {
                lo: grid[k],
                hi: grid[k + 1],
                f_lo: values[k],
                f_hi: values[k + 1],
            });
        }
    }

    let mut flags = Vec::new();
    for k in 1..n {
        let (a, b, c) = (values[k - 1], values[k], values[k + 1]);
        let no_sign_change = a * b > 0.0 && b * c > 0.0;
        let local_min = b.abs() <= a.abs() && b.abs() <= c.abs();
        let deep = b.abs() < cfg.flat_threshold * a.abs().max(c.abs());
        if no_sign_change && local_min && deep {
            flags.push(grid[k]);
        }
    }
    Ok((brackets, flags))
}

/// Bisect a valid bracket down to |hi − lo| ≤ tol.
pub fn bisect<F>(f: F, b: &Bracket, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if b.f_lo == 0.0 {
        return Ok(b.lo);
    }
    if b.f_hi == 0.0 {
        return Ok(b.hi);
    }
    if !(b.lo < b.hi) || b.f_lo * b.f_hi >= 0.0 {
        return Err(Error::BracketInvalid { lo: b.lo, hi: b.hi });
    }
    let (mut lo, mut hi, mut f_lo) = (b.lo, b.hi, b.f_lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // ran out of floating-point resolution
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_lo * f_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Scan and bisect in one call; roots come back sorted ascending.
pub fn find_roots<F>(f: F, cfg: &RootConfig) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let (brackets, flags) = scan(&f, cfg)?;
    let roots = brackets
        .par_iter()
        .map(|b| bisect(&f, b, cfg.tol))
        .collect::<Result<Vec<_>>>()?;
    Ok((roots, flags))
}
