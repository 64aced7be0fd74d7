use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::kernels::{green, BoundaryCondition, GreenEvaluator};
use crate::numfmt::json_f64;
use crate::quadrature::Quadrature;

const RULE: Quadrature = Quadrature {
    abs_tol: 0.0,
    rel_tol: 1e-10,
    max_intervals: 2000,
};

/// Second moment of the linear Neumann solution at the centre versus `t / (2L)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallLReport {
    #[serde(serialize_with = "json_f64")]
    pub t: f64,
    #[serde(rename = "L", serialize_with = "json_f64")]
    pub l: f64,
    /// `E[u_L(t, 0)^2] = int_0^t Gamma_L^N(2s; 0, 0) ds` for `sigma = 1`, `b = 0`, `u0 = 0`.
    #[serde(serialize_with = "json_f64")]
    pub second_moment: f64,
    #[serde(serialize_with = "json_f64")]
    pub lower_bound: f64,
    pub passes: bool,
}

/// Shows that the Neumann second moment grows like `1/L`, so no bound
/// uniform in small `L` exists.
pub fn neumann_small_l_check(t: f64, l: f64) -> Result<SmallLReport> {
    if !(t > 0.0 && t.is_finite() && l > 0.0 && l.is_finite()) {
        return Err(domain(format!(
            "need t > 0 and L > 0, got t = {t}, L = {l}"
        )));
    }
    let ev = GreenEvaluator::new(l, BoundaryCondition::Neumann)?;
    let mut failure = None;
    // With s = v^2 the integrand 2v Gamma^N(2v^2; 0, 0) stays bounded at v = 0.
    let est = RULE.integrate(
        |v| {
            if v <= 0.0 {
                return 1.0 / (2.0 * std::f64::consts::PI).sqrt();
            }
            match green(&ev, 2.0 * v * v, 0.0, 0.0) {
                Ok(g) => 2.0 * v * g,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        0.0,
        t.sqrt(),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let second_moment = est?.value;
    let lower_bound = t / (2.0 * l);
    Ok(SmallLReport {
        t,
        l,
        second_moment,
        lower_bound,
        passes: second_moment >= lower_bound,
    })
}
