//! Gaussian tails, the boundary factors `K_{t,x,L}` and `a_L`, and the theta function.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{domain, Result};
use crate::special::erfc;

/// Exact upper tail `P(X > a)` for `X ~ N(0, sigma2)`.
pub fn gaussian_tail_exact(a: f64, sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(domain(format!("variance must be positive, got {sigma2}")));
    }
    if !(a >= 0.0) {
        return Err(domain(format!("tail point must be nonnegative, got {a}")));
    }
    Ok(tail_unchecked(a, sigma2))
}

#[inline]
pub(crate) fn tail_unchecked(a: f64, sigma2: f64) -> f64 {
    0.5 * erfc(a / (SQRT_2 * sigma2.sqrt()))
}

/// Upper bound `0.5 min(1, sqrt(2/pi) sigma/a) exp(-a^2 / (2 sigma2))` on the Gaussian tail.
pub fn gaussian_tail_bound(a: f64, sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(domain(format!("variance must be positive, got {sigma2}")));
    }
    if !(a > 0.0) {
        return Err(domain(format!("tail bound needs a > 0, got {a}")));
    }
    let sigma = sigma2.sqrt();
    let ratio = (2.0 / PI).sqrt() * sigma / a;
    Ok(0.5 * ratio.min(1.0) * (-a * a / (2.0 * sigma2)).exp())
}

fn check_inside(t: f64, x: f64, l: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain(format!("time must be positive, got {t}")));
    }
    if !(l > 0.0) {
        return Err(domain(format!("half-length must be positive, got {l}")));
    }
    if !(x.abs() < l) {
        return Err(domain(format!("need |x| < L, got x = {x}, L = {l}")));
    }
    Ok(())
}

/// `K_{t,x,L} = min(1/2, sqrt(t/pi) max(1/(L-x), 1/(L+x)))`.
pub fn k_factor(t: f64, x: f64, l: f64) -> Result<f64> {
    check_inside(t, x, l)?;
    let gap = l - x.abs();
    Ok((0.5f64).min((t / PI).sqrt() / gap))
}

/// Boundary rate factor `exp(-(L-x)^2/(8t)) + exp(-(L+x)^2/(8t))`.
pub fn rate_factor_al(t: f64, x: f64, l: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain(format!("time must be positive, got {t}")));
    }
    if !(l > 0.0) || x.abs() > l {
        return Err(domain(format!("need |x| <= L, got x = {x}, L = {l}")));
    }
    Ok(exp_bracket(t, x, l, 8.0))
}

/// `exp(-(L-x)^2/(d t)) + exp(-(L+x)^2/(d t))`.
#[inline]
pub fn exp_bracket(t: f64, x: f64, l: f64, d: f64) -> f64 {
    (-(l - x).powi(2) / (d * t)).exp() + (-(l + x).powi(2) / (d * t)).exp()
}

/// Mass of `Gamma(t, x - .)` outside `[-L, L]`.
pub fn tail_mass(t: f64, x: f64, l: f64) -> Result<f64> {
    check_inside(t, x, l)?;
    Ok(tail_mass_unchecked(t, x, l))
}

#[inline]
pub(crate) fn tail_mass_unchecked(t: f64, x: f64, l: f64) -> f64 {
    tail_unchecked(l - x, 2.0 * t) + tail_unchecked(l + x, 2.0 * t)
}

/// `sum_{m >= 0} exp(-a m^2)`, truncated once the next term drops below 1e-15.
pub fn theta(a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain(format!("theta needs a > 0, got {a}")));
    }
    let mut sum = 1.0;
    let mut m = 1.0f64;
    loop {
        let term = (-a * m * m).exp();
        if term < 1e-15 {
            break;
        }
        sum += term;
        m += 1.0;
    }
    Ok(sum)
}

/// The three boundary quantities at one `(t, x, L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundBundle {
    pub k_factor: f64,
    pub a_l: f64,
    pub tail_mass: f64,
}

impl BoundBundle {
    pub fn new(t: f64, x: f64, l: f64) -> Result<Self> {
        Ok(Self {
            k_factor: k_factor(t, x, l)?,
            a_l: rate_factor_al(t, x, l)?,
            tail_mass: tail_mass(t, x, l)?,
        })
    }

    /// `K_{t,x,L}` times the bracket with denominator `4t`.
    pub fn tail_bound(&self, t: f64, x: f64, l: f64) -> f64 {
        self.k_factor * exp_bracket(t, x, l, 4.0)
    }
}

/// Upper bound on the squared-kernel mass outside `[-L, L]`:
/// `K_{t/2,x,L} / sqrt(8 pi t)` times the bracket with denominator `2t`.
pub fn tail_l2_bound(t: f64, x: f64, l: f64) -> Result<f64> {
    let k = k_factor(0.5 * t, x, l)?;
    Ok(k / (8.0 * PI * t).sqrt() * exp_bracket(t, x, l, 2.0))
}

/// Exact squared-kernel mass outside `[-L, L]`.
pub fn tail_l2_exact(t: f64, x: f64, l: f64) -> Result<f64> {
    check_inside(t, x, l)?;
    Ok(tail_mass_unchecked(0.5 * t, x, l) / (8.0 * PI * t).sqrt())
}
