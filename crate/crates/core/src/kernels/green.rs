//! Interval Green's functions by images and by eigenfunction expansion.

use std::f64::consts::PI;

use super::{gamma, BoundaryCondition};
use crate::error::{domain, Error, Result};
use crate::special::gaussian_integral_from;

pub const DEFAULT_SERIES_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_TERMS: usize = 10_000;

// Points this close outside the interval (relative to L) are clamped onto it.
const EDGE_SLACK: f64 = 1e-12;

/// Green's function of the heat operator on `[-L, L]` under one boundary condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenEvaluator {
    l: f64,
    bc: BoundaryCondition,
    series_tol: f64,
    max_terms: usize,
}

impl GreenEvaluator {
    pub fn new(l: f64, bc: BoundaryCondition) -> Result<Self> {
        Self::with_tolerance(l, bc, DEFAULT_SERIES_TOL, DEFAULT_MAX_TERMS)
    }

    pub fn with_tolerance(
        l: f64,
        bc: BoundaryCondition,
        series_tol: f64,
        max_terms: usize,
    ) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(domain(format!("half-length must be positive, got {l}")));
        }
        if !(series_tol > 0.0) {
            return Err(domain(format!(
                "series tolerance must be positive, got {series_tol}"
            )));
        }
        if max_terms == 0 {
            return Err(domain("max_terms must be at least 1"));
        }
        Ok(Self {
            l,
            bc,
            series_tol,
            max_terms,
        })
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn series_tol(&self) -> f64 {
        self.series_tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    /// Validates a position and clamps round-off overshoot onto `[-L, L]`.
    pub fn check_position(&self, x: f64) -> Result<f64> {
        if !x.is_finite() || x.abs() > self.l * (1.0 + EDGE_SLACK) {
            return Err(domain(format!(
                "position {x} lies outside [-{l}, {l}]",
                l = self.l
            )));
        }
        Ok(x.clamp(-self.l, self.l))
    }

    fn check(&self, t: f64, x: f64, y: f64) -> Result<(f64, f64)> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(domain(format!("time must be positive, got {t}")));
        }
        Ok((self.check_position(x)?, self.check_position(y)?))
    }

    /// Sum of the image series, optionally without the direct `Gamma(t, x - y)` term.
    fn image_sum(&self, t: f64, x: f64, y: f64, skip_direct: bool) -> Result<f64> {
        let l = self.l;
        let reflect = match self.bc {
            BoundaryCondition::Dirichlet | BoundaryCondition::Mixed => -1.0,
            BoundaryCondition::Neumann => 1.0,
        };
        let alternating = self.bc == BoundaryCondition::Mixed;
        let c = 4.0 * l * l / t;
        let envelope = 4.0 / (4.0 * PI * t).sqrt();

        let mut sum = if skip_direct { 0.0 } else { gamma(t, x - y) };
        sum += reflect * gamma(t, x + y + 2.0 * l);
        let mut k = 1usize;
        loop {
            let kf = k as f64;
            let shell = gamma(t, x - y + 4.0 * kf * l)
                + gamma(t, x - y - 4.0 * kf * l)
                + reflect
                    * (gamma(t, x + y + (4.0 * kf + 2.0) * l)
                        + gamma(t, x + y + (2.0 - 4.0 * kf) * l));
            if alternating && k % 2 == 1 {
                sum -= shell;
            } else {
                sum += shell;
            }
            // Every term of shell k + j + 1 has |argument| >= 4 (k + j) L.
            let remainder = envelope * ((-c * kf * kf).exp() + gaussian_integral_from(c, kf));
            if remainder < self.series_tol {
                return Ok(sum);
            }
            k += 1;
            if k > self.max_terms {
                return Err(Error::Truncation {
                    what: "image series",
                    tol: self.series_tol,
                    max_terms: self.max_terms,
                });
            }
        }
    }

    fn eigen_sum(&self, t: f64, x: f64, y: f64) -> Result<f64> {
        let l = self.l;
        let truncated = || Error::Truncation {
            what: "eigenfunction series",
            tol: self.series_tol,
            max_terms: self.max_terms,
        };
        match self.bc {
            BoundaryCondition::Dirichlet | BoundaryCondition::Neumann => {
                let a = PI * PI * t / (4.0 * l * l);
                let px = PI * (x + l) / (2.0 * l);
                let py = PI * (y + l) / (2.0 * l);
                let neumann = self.bc == BoundaryCondition::Neumann;
                let mut sum = 0.0;
                for n in 1..=self.max_terms {
                    let nf = n as f64;
                    let modes = if neumann {
                        (nf * px).cos() * (nf * py).cos()
                    } else {
                        (nf * px).sin() * (nf * py).sin()
                    };
                    sum += (-a * nf * nf).exp() * modes;
                    if gaussian_integral_from(a, nf) / l < self.series_tol {
                        let base = if neumann { 0.5 / l } else { 0.0 };
                        return Ok(base + sum / l);
                    }
                }
                Err(truncated())
            }
            BoundaryCondition::Mixed => {
                let a = PI * PI * t / (16.0 * l * l);
                let px = PI * (x + l) / (4.0 * l);
                let py = PI * (y + l) / (4.0 * l);
                let mut sum = 0.0;
                for n in 0..self.max_terms {
                    let k = (2 * n + 1) as f64;
                    sum += (-a * k * k).exp() * (k * px).sin() * (k * py).sin();
                    // Remaining odd modes 2n+3, 2n+5, ... lie under half the
                    // Gaussian integral from 2n+1.
                    if 0.5 * gaussian_integral_from(a, k) / l < self.series_tol {
                        return Ok(sum / l);
                    }
                }
                Err(truncated())
            }
        }
    }
}

/// Green's function from the method of images, truncated by symmetric shells.
pub fn green_images(ev: &GreenEvaluator, t: f64, x: f64, y: f64) -> Result<f64> {
    let (x, y) = ev.check(t, x, y)?;
    ev.image_sum(t, x, y, false)
}

/// Green's function from the eigenfunction expansion.
pub fn green_eigen(ev: &GreenEvaluator, t: f64, x: f64, y: f64) -> Result<f64> {
    let (x, y) = ev.check(t, x, y)?;
    ev.eigen_sum(t, x, y)
}

/// Green's function, using images for `t <= L^2` and eigenfunctions otherwise.
pub fn green(ev: &GreenEvaluator, t: f64, x: f64, y: f64) -> Result<f64> {
    let (x, y) = ev.check(t, x, y)?;
    if t <= ev.l * ev.l {
        ev.image_sum(t, x, y, false)
    } else {
        ev.eigen_sum(t, x, y)
    }
}

/// `H_L = Gamma(t, x - y) - Gamma_L(t; x, y)`.
///
/// In the image regime the direct term cancels analytically, so the
/// difference is summed from the reflected images alone.
pub fn discrepancy(ev: &GreenEvaluator, t: f64, x: f64, y: f64) -> Result<f64> {
    let (x, y) = ev.check(t, x, y)?;
    if t <= ev.l * ev.l {
        Ok(-ev.image_sum(t, x, y, true)?)
    } else {
        Ok(gamma(t, x - y) - ev.eigen_sum(t, x, y)?)
    }
}

/// Mixed Green's function on `[-L, L]` assembled from the Dirichlet one on `[-2L, 2L]`.
pub fn mixed_from_dirichlet(l: f64, t: f64, x: f64, y: f64) -> Result<f64> {
    let mixed = GreenEvaluator::new(l, BoundaryCondition::Mixed)?;
    let (x, y) = mixed.check(t, x, y)?;
    let wide = GreenEvaluator::new(2.0 * l, BoundaryCondition::Dirichlet)?;
    Ok(green(&wide, t, x - l, y - l)? + green(&wide, t, x - l, l - y)?)
}
