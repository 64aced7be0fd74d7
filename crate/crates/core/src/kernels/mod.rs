//! Heat kernel, interval Green's functions, discrepancies, and the bound quantities.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub mod green;
pub mod integrals;
pub mod tail;

pub use green::{
    discrepancy, green, green_eigen, green_images, mixed_from_dirichlet, GreenEvaluator,
    DEFAULT_MAX_TERMS, DEFAULT_SERIES_TOL,
};
pub use integrals::{
    discrepancy_l1, discrepancy_l1_time, discrepancy_l1_time_with, discrepancy_l2_time,
    discrepancy_l2_time_with, green_mass, green_mass_deficit, l1_bound, l1_time_bound,
    l2_time_bound, mixed_lower_bound, neumann_pointwise_bound, pointwise_upper_bound,
    semigroup_residual, TimeSpaceRule,
};
pub use tail::{
    exp_bracket, gaussian_tail_bound, gaussian_tail_exact, k_factor, rate_factor_al, tail_l2_bound,
    tail_l2_exact, tail_mass, theta, BoundBundle,
};

/// Boundary condition on `[-L, L]`. `Mixed` is Dirichlet at `-L` and Neumann at `+L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Mixed,
    Neumann,
}

impl BoundaryCondition {
    pub const ALL: [BoundaryCondition; 3] = [Self::Dirichlet, Self::Mixed, Self::Neumann];

    pub fn name(self) -> &'static str {
        match self {
            Self::Dirichlet => "dirichlet",
            Self::Mixed => "mixed",
            Self::Neumann => "neumann",
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" | "d" => Ok(Self::Dirichlet),
            "mixed" | "m" => Ok(Self::Mixed),
            "neumann" | "n" => Ok(Self::Neumann),
            other => Err(Error::Config(format!(
                "unknown boundary condition '{other}'"
            ))),
        }
    }
}

/// Heat kernel `(4 pi t)^{-1/2} exp(-x^2 / (4t))`.
pub fn heat_kernel(t: f64, x: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain(format!("heat kernel needs t > 0, got {t}")));
    }
    if !x.is_finite() {
        return Err(domain(format!("heat kernel needs finite x, got {x}")));
    }
    Ok(gamma(t, x))
}

#[inline]
pub(crate) fn gamma(t: f64, x: f64) -> f64 {
    (-x * x / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()
}
