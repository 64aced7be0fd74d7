//! Picard iteration of the space-time Gronwall inequality against its closed-form bound.

use super::grid::{Convolver, GridField, Sampling};
use super::resolvent::{sample_j, sample_resolvent, KernelVariant};
use crate::error::{domain, Error, Result};

const DIVERGENCE_LIMIT: f64 = 1e12;

/// Outcome of [`picard_verify`].
#[derive(Debug, Clone, PartialEq)]
pub struct PicardReport {
    pub iterations: usize,
    /// `max (f_iters - (a + K * a))` over the grid; positive means the
    /// iterate exceeds the closed-form bound.
    pub max_excess: f64,
    /// Largest value of the closed-form bound `a + K * a`.
    pub bound_max: f64,
    /// Whether `f_{k+1} >= f_k` held everywhere, up to round-off.
    pub monotone: bool,
    /// `max |f_iters - f_{iters - 1}|`.
    pub last_increment: f64,
    /// Final iterate, midpoint-sampled.
    pub iterate: GridField,
}

/// Iterates `f_{k+1} = a + C (J * f_k)` from `f_0 = a` and compares the
/// result with `a + K * a`, `K` the closed-form resolvent.
pub fn picard_verify(a: &GridField, kernel: KernelVariant, iters: usize) -> Result<PicardReport> {
    if a.sampling != Sampling::Midpoint {
        return Err(Error::Shape("Picard input must be midpoint-sampled".into()));
    }
    if a.data.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(domain("Picard input must be finite and nonnegative"));
    }
    let grid = a.grid;
    let j = Convolver::new(&sample_j(kernel.variant, grid))?;
    let mut f = a.clone();
    let mut monotone = true;
    let mut last_increment = 0.0;
    for k in 0..iters {
        let conv = j.apply(&f)?.to_midpoint();
        let mut next = a.clone();
        next.axpy(kernel.c, &conv)?;
        let scale = next.max_abs().max(1e-300);
        if !(scale < DIVERGENCE_LIMIT) {
            return Err(Error::Instability(format!(
                "Picard iterate {} reached {scale:e}",
                k + 1
            )));
        }
        let mut inc: f64 = 0.0;
        for (n, o) in next.data.iter().zip(&f.data) {
            let d = n - o;
            if d < -1e-10 * scale {
                monotone = false;
            }
            inc = inc.max(d.abs());
        }
        last_increment = inc;
        f = next;
    }
    let resolvent = sample_resolvent(kernel, grid, Sampling::Midpoint);
    let k_star_a = Convolver::new(&resolvent)?.apply(a)?.to_midpoint();
    let mut bound = a.clone();
    bound.axpy(1.0, &k_star_a)?;
    let max_excess = f
        .data
        .iter()
        .zip(&bound.data)
        .fold(f64::NEG_INFINITY, |m, (v, b)| m.max(v - b));
    Ok(PicardReport {
        iterations: iters,
        max_excess,
        bound_max: bound.max_abs(),
        monotone,
        last_increment,
        iterate: f,
    })
}
