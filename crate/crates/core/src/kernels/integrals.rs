//! Quadrature functionals of the Green's functions and the bounds they obey.

use std::cell::Cell;
use std::f64::consts::PI;

use super::green::{discrepancy, green, GreenEvaluator};
use super::tail::{exp_bracket, k_factor, tail_mass_unchecked, theta};
use super::{gamma, BoundaryCondition};
use crate::error::{domain, Error, Result};
use crate::quadrature::Quadrature;

/// Absolute-accuracy rule for masses and convolution residuals.
pub const MASS_QUADRATURE: Quadrature = Quadrature {
    abs_tol: 1e-12,
    rel_tol: 0.0,
    max_intervals: 4000,
};

/// Relative-accuracy rule for small positive functionals (deficits, discrepancy norms).
pub const RELATIVE_QUADRATURE: Quadrature = Quadrature {
    abs_tol: 0.0,
    rel_tol: 1e-10,
    max_intervals: 4000,
};

/// Outer (time) and inner (space) rules for the time-integrated functionals.
pub const OUTER_QUADRATURE: Quadrature = Quadrature {
    abs_tol: 0.0,
    rel_tol: 1e-8,
    max_intervals: 2000,
};

pub const INNER_QUADRATURE: Quadrature = Quadrature {
    abs_tol: 0.0,
    rel_tol: 1e-10,
    max_intervals: 2000,
};

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain(format!("time must be positive, got {t}")));
    }
    Ok(())
}

fn check_interior(ev: &GreenEvaluator, t: f64, x: f64) -> Result<()> {
    check_time(t)?;
    if !(x.abs() < ev.l()) {
        return Err(domain(format!("need |x| < L, got x = {x}, L = {}", ev.l())));
    }
    Ok(())
}

/// Break points around the peak of `Gamma(t, x - .)` inside `[-L, L]`.
fn space_breaks(t: f64, x: f64) -> [f64; 7] {
    let s = (2.0 * t).sqrt();
    [
        x - 10.0 * s,
        x - 4.0 * s,
        x - 1.5 * s,
        x,
        x + 1.5 * s,
        x + 4.0 * s,
        x + 10.0 * s,
    ]
}

pub(crate) fn time_breaks(t: f64) -> [f64; 2] {
    [1e-2 * t, 1e-1 * t]
}

// Near `y = -x` the two reflected images of the Mixed kernel cancel, so
// `|H^M|` has a kink there.
fn inner_breaks(bc: BoundaryCondition, t: f64, x: f64) -> Vec<f64> {
    let s = (2.0 * t).sqrt();
    let mut breaks = vec![x - 5.0 * s, x, x + 5.0 * s];
    if bc == BoundaryCondition::Mixed {
        breaks.push(-x);
    }
    breaks
}

/// Runs a fallible integrand through the quadrature, surfacing the first error.
pub(crate) fn integrate_fallible<F>(
    q: &Quadrature,
    a: f64,
    b: f64,
    breaks: &[f64],
    mut f: F,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let failure: Cell<Option<Error>> = Cell::new(None);
    let est = q.integrate_with_breaks(
        |y| match f(y) {
            Ok(v) => v,
            Err(e) => {
                let prev = failure.take();
                failure.set(Some(prev.unwrap_or(e)));
                f64::NAN
            }
        },
        a,
        b,
        breaks,
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(est?.value)
}

/// `int_{-L}^{L} Gamma_L(t; x, y) dy`.
pub fn green_mass(ev: &GreenEvaluator, t: f64, x: f64) -> Result<f64> {
    check_time(t)?;
    let x = ev.check_position(x)?;
    let l = ev.l();
    integrate_fallible(&MASS_QUADRATURE, -l, l, &space_breaks(t, x), |y| {
        green(ev, t, x, y)
    })
}

/// `1 - green_mass`, computed from the exterior tail and the discrepancy so
/// that it keeps relative accuracy when the deficit is tiny.
pub fn green_mass_deficit(ev: &GreenEvaluator, t: f64, x: f64) -> Result<f64> {
    check_time(t)?;
    let x = ev.check_position(x)?;
    let l = ev.l();
    if ev.bc() == BoundaryCondition::Neumann {
        return Ok(0.0);
    }
    if x.abs() >= l {
        // Boundary start point of a Dirichlet end: the full mass is missing.
        let dirichlet_end = x <= -l || ev.bc() == BoundaryCondition::Dirichlet;
        if dirichlet_end {
            return Ok(1.0);
        }
        return Ok(1.0 - green_mass(ev, t, x)?);
    }
    if ev.bc() == BoundaryCondition::Mixed {
        // Folding `[-L, 3L]` at `L` maps the Dirichlet problem there onto the
        // Mixed one, so both lose the same mass. The Dirichlet form sums
        // nonnegative terms and avoids cancellation near the Neumann end.
        let wide = GreenEvaluator::with_tolerance(
            2.0 * l,
            BoundaryCondition::Dirichlet,
            ev.series_tol(),
            ev.max_terms(),
        )?;
        return green_mass_deficit(&wide, t, x - l);
    }
    let inside = integrate_fallible(&RELATIVE_QUADRATURE, -l, l, &space_breaks(t, x), |y| {
        discrepancy(ev, t, x, y)
    })?;
    Ok(tail_mass_unchecked(t, x, l) + inside)
}

/// `int_{-L}^{L} |H_L(t; x, y)| dy`.
pub fn discrepancy_l1(ev: &GreenEvaluator, t: f64, x: f64) -> Result<f64> {
    check_interior(ev, t, x)?;
    let l = ev.l();
    let mut breaks = space_breaks(t, x).to_vec();
    if ev.bc() == BoundaryCondition::Mixed {
        breaks.push(-x);
    }
    integrate_fallible(&RELATIVE_QUADRATURE, -l, l, &breaks, |y| {
        Ok(discrepancy(ev, t, x, y)?.abs())
    })
}

/// Outer (time) and inner (space) rules for a nested time-space integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSpaceRule {
    pub outer: Quadrature,
    pub inner: Quadrature,
}

impl Default for TimeSpaceRule {
    fn default() -> Self {
        Self {
            outer: OUTER_QUADRATURE,
            inner: INNER_QUADRATURE,
        }
    }
}

impl TimeSpaceRule {
    /// Rule with the given relative tolerance outside and a 100x tighter one inside.
    pub fn relative(rel_tol: f64) -> Self {
        Self {
            outer: Quadrature::new(0.0, rel_tol),
            inner: Quadrature::new(0.0, 0.01 * rel_tol),
        }
    }
}

fn time_space_integral<F>(
    ev: &GreenEvaluator,
    t: f64,
    x: f64,
    rule: &TimeSpaceRule,
    g: F,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    check_interior(ev, t, x)?;
    let l = ev.l();
    integrate_fallible(&rule.outer, 0.0, t, &time_breaks(t), |s| {
        if s <= 0.0 {
            return Ok(0.0);
        }
        integrate_fallible(&rule.inner, -l, l, &inner_breaks(ev.bc(), s, x), |y| {
            Ok(g(discrepancy(ev, s, x, y)?))
        })
    })
}

/// `int_0^t ds int_{-L}^{L} |H_L(s; x, y)| dy`.
pub fn discrepancy_l1_time(ev: &GreenEvaluator, t: f64, x: f64) -> Result<f64> {
    discrepancy_l1_time_with(ev, t, x, &TimeSpaceRule::default())
}

pub fn discrepancy_l1_time_with(
    ev: &GreenEvaluator,
    t: f64,
    x: f64,
    rule: &TimeSpaceRule,
) -> Result<f64> {
    time_space_integral(ev, t, x, rule, f64::abs)
}

/// `int_0^t ds int_{-L}^{L} H_L(s; x, y)^2 dy`.
pub fn discrepancy_l2_time(ev: &GreenEvaluator, t: f64, x: f64) -> Result<f64> {
    discrepancy_l2_time_with(ev, t, x, &TimeSpaceRule::default())
}

pub fn discrepancy_l2_time_with(
    ev: &GreenEvaluator,
    t: f64,
    x: f64,
    rule: &TimeSpaceRule,
) -> Result<f64> {
    time_space_integral(ev, t, x, rule, |h| h * h)
}

/// `|int Gamma_L(s; x, y) Gamma_L(t; y, z) dy - Gamma_L(s + t; x, z)|`.
pub fn semigroup_residual(ev: &GreenEvaluator, s: f64, t: f64, x: f64, z: f64) -> Result<f64> {
    check_time(s)?;
    check_time(t)?;
    let x = ev.check_position(x)?;
    let z = ev.check_position(z)?;
    let l = ev.l();
    let mut breaks = space_breaks(s, x).to_vec();
    breaks.extend_from_slice(&space_breaks(t, z));
    let conv = integrate_fallible(&MASS_QUADRATURE, -l, l, &breaks, |y| {
        Ok(green(ev, s, x, y)? * green(ev, t, y, z)?)
    })?;
    Ok((conv - green(ev, s + t, x, z)?).abs())
}

/// `K_{t,x,L}` times the boundary bracket with denominator `4t`; bounds the
/// exterior heat mass and every `int |H_L| dy`.
pub fn l1_bound(t: f64, x: f64, l: f64) -> Result<f64> {
    Ok(k_factor(t, x, l)? * exp_bracket(t, x, l, 4.0))
}

/// Bound on `int_0^t int |H_L|`.
pub fn l1_time_bound(t: f64, x: f64, l: f64) -> Result<f64> {
    Ok(t * l1_bound(t, x, l)?)
}

/// Bound on `int_0^t int H_L^2`. The Neumann case needs a fixed `L0 in (0, L]`.
pub fn l2_time_bound(
    bc: BoundaryCondition,
    t: f64,
    x: f64,
    l: f64,
    l0: Option<f64>,
) -> Result<f64> {
    let bracket = exp_bracket(t, x, l, 4.0);
    let base = (t / PI).sqrt() * k_factor(t, x, l)? * bracket * bracket;
    match bc {
        BoundaryCondition::Neumann => {
            let l0 = l0.ok_or_else(|| domain("the Neumann bound needs L0"))?;
            if !(l0 > 0.0 && l0 <= l) {
                return Err(domain(format!("need 0 < L0 <= L, got L0 = {l0}, L = {l}")));
            }
            Ok(base * theta(4.0 * l0 * l0 / t)?)
        }
        _ => Ok(base),
    }
}

/// Upper bound `Gamma(t, x - L) + Gamma(t, x + L)` on the Dirichlet and Mixed discrepancies.
pub fn pointwise_upper_bound(t: f64, x: f64, l: f64) -> Result<f64> {
    check_time(t)?;
    Ok(gamma(t, x - l) + gamma(t, x + l))
}

/// Lower bound `-Gamma(t, x + y - 2L)` on the Mixed discrepancy.
pub fn mixed_lower_bound(t: f64, x: f64, y: f64, l: f64) -> Result<f64> {
    check_time(t)?;
    Ok(-gamma(t, x + y - 2.0 * l))
}

/// Bound `2 theta(4L^2/t) / sqrt(4 pi t)` times the `4t` bracket on `|H_L^N|`.
///
/// The images split into four one-sided sums; each pair sharing an
/// exponential is bounded by `theta / sqrt(4 pi t)`, hence the factor 2.
pub fn neumann_pointwise_bound(t: f64, x: f64, l: f64) -> Result<f64> {
    check_time(t)?;
    Ok(2.0 * theta(4.0 * l * l / t)? / (4.0 * PI * t).sqrt() * exp_bracket(t, x, l, 4.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::tail::tail_mass;

    #[test]
    fn neumann_mass_is_one() {
        let ev = GreenEvaluator::new(1.0, BoundaryCondition::Neumann).unwrap();
        for &(t, x) in &[(0.05, 0.3), (0.5, -0.9), (3.0, 1.0)] {
            assert!((green_mass(&ev, t, x).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn deficit_matches_mass() {
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Mixed] {
            let ev = GreenEvaluator::new(1.0, bc).unwrap();
            let m = green_mass(&ev, 0.4, 0.2).unwrap();
            let d = green_mass_deficit(&ev, 0.4, 0.2).unwrap();
            assert!(d > 0.0);
            assert!((m + d - 1.0).abs() < 1e-10, "{bc:?}");
        }
    }

    #[test]
    fn neumann_l1_identity() {
        let ev = GreenEvaluator::new(2.0, BoundaryCondition::Neumann).unwrap();
        let l1 = discrepancy_l1(&ev, 0.5, 0.3).unwrap();
        assert!((l1 - tail_mass(0.5, 0.3, 2.0).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn neumann_l2_bound_needs_l0() {
        assert!(l2_time_bound(BoundaryCondition::Neumann, 0.5, 0.0, 1.0, None).is_err());
        assert!(l2_time_bound(BoundaryCondition::Neumann, 0.5, 0.0, 1.0, Some(1.5)).is_err());
        assert!(l2_time_bound(BoundaryCondition::Dirichlet, 0.5, 0.0, 1.0, None).is_ok());
    }
}
