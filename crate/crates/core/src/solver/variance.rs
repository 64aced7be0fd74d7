use crate::error::{config, Result};
use crate::kernels::integrals::{integrate_fallible, time_breaks};
use crate::kernels::{
    discrepancy_l2_time_with, green_mass_deficit, tail_l2_exact, BoundaryCondition, GreenEvaluator,
    TimeSpaceRule,
};
use crate::quadrature::Quadrature;

use super::coefficients::InitialCondition;

const TAIL_QUADRATURE: Quadrature = Quadrature {
    abs_tol: 0.0,
    rel_tol: 1e-10,
    max_intervals: 2000,
};

/// `E[(u - u_L)^2](t, x)` for `sigma = 1`, `b = 0`, where the difference is Gaussian:
/// `m^2 + int_0^t [int_{D_L} H_L^2 + int_{D_L^c} Gamma^2] ds`, with `m` the
/// deterministic mismatch of the initial data.
pub fn linear_variance_exact(
    bc: BoundaryCondition,
    l: f64,
    t: f64,
    x: f64,
    u0: &InitialCondition,
) -> Result<f64> {
    linear_variance_exact_with(bc, l, t, x, u0, &TimeSpaceRule::default())
}

pub fn linear_variance_exact_with(
    bc: BoundaryCondition,
    l: f64,
    t: f64,
    x: f64,
    u0: &InitialCondition,
    rule: &TimeSpaceRule,
) -> Result<f64> {
    let c = match *u0 {
        InitialCondition::Zero => 0.0,
        InitialCondition::Constant { value } => value,
        other => {
            return Err(config(format!(
                "exact variance needs zero or constant initial data, got {other:?}"
            )))
        }
    };
    let ev = GreenEvaluator::new(l, bc)?;
    let inside = discrepancy_l2_time_with(&ev, t, x, rule)?;
    let outside = integrate_fallible(&TAIL_QUADRATURE, 0.0, t, &time_breaks(t), |s| {
        if s <= 0.0 {
            return Ok(0.0);
        }
        tail_l2_exact(s, x, l)
    })?;
    let m = if c == 0.0 {
        0.0
    } else {
        c * green_mass_deficit(&ev, t, x)?
    };
    Ok(m * m + inside + outside)
}
