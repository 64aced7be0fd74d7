//! Scalar special functions shared by the kernel and resolvent code.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Complementary error function.
#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Standard normal distribution function.
#[inline]
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Integral of exp(-c u^2) over [k, inf) for c > 0 and k >= 0.
#[inline]
pub fn gaussian_integral_from(c: f64, k: f64) -> f64 {
    0.5 * (PI / c).sqrt() * erfc(k * c.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_reference_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        // Phi(1) and Phi(-1.959963984540054) from standard tables.
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((normal_cdf(-1.959_963_984_540_054) - 0.025).abs() < 1e-15);
    }

    #[test]
    fn gaussian_integral_matches_half_line() {
        // k = 0 gives half of sqrt(pi / c).
        let c = 2.5;
        assert!((gaussian_integral_from(c, 0.0) - 0.5 * (PI / c).sqrt()).abs() < 1e-15);
    }
}
