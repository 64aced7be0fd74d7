//! One-step kernels `J`, their closed-form resolvents, and the convolution-series oracle.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::grid::{Convolver, GridField, Sampling, SpaceTimeGrid};
use crate::error::{domain, Error, Result};
use crate::kernels::gamma;
use crate::special::normal_cdf;

/// Which one-step kernel drives the Gronwall inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// `J(r, z) = Gamma(r, z) / sqrt(4 pi r)`.
    Stochastic,
    /// `J(r, z) = Gamma(r, z)^2 = Gamma(r/2, z) / sqrt(8 pi r)`.
    NoDrift,
    /// `J(r, z) = Gamma(r, z)`.
    Deterministic,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Self::Stochastic, Self::NoDrift, Self::Deterministic];

    pub fn name(self) -> &'static str {
        match self {
            Self::Stochastic => "stochastic",
            Self::NoDrift => "no-drift",
            Self::Deterministic => "deterministic",
        }
    }

    /// Time scale `s` such that every convolution power is `g(t) Gamma(s t, x)`.
    fn time_scale(self) -> f64 {
        match self {
            Self::NoDrift => 0.5,
            _ => 1.0,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "stochastic" => Ok(Self::Stochastic),
            "no-drift" | "nodrift" | "no_drift" => Ok(Self::NoDrift),
            "deterministic" => Ok(Self::Deterministic),
            other => Err(Error::Config(format!("unknown kernel variant '{other}'"))),
        }
    }
}

/// A kernel variant with its feedback constant `C >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelVariant {
    pub variant: Variant,
    pub c: f64,
}

impl KernelVariant {
    pub fn new(variant: Variant, c: f64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(domain(format!("feedback constant must be >= 0, got {c}")));
        }
        Ok(Self { variant, c })
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain(format!("time must be positive, got {t}")));
    }
    Ok(())
}

/// One-step kernel `J(r, z)` of the variant.
pub fn j_kernel(variant: Variant, r: f64, z: f64) -> Result<f64> {
    check_time(r)?;
    Ok(j_unchecked(variant, r, z))
}

#[inline]
fn j_unchecked(variant: Variant, r: f64, z: f64) -> f64 {
    match variant {
        Variant::Stochastic => gamma(r, z) / (4.0 * PI * r).sqrt(),
        Variant::NoDrift => gamma(0.5 * r, z) / (8.0 * PI * r).sqrt(),
        Variant::Deterministic => gamma(r, z),
    }
}

/// Time prefactor `g(t)` of the resolvent, `K(t, x) = g(t) Gamma(s t, x)`.
///
/// Every power `J^{*l}` is a time weight times `Gamma(s t, .)`. For the two
/// stochastic variants the weights of `C^l J^{*l}` have Laplace transforms
/// `(b / sqrt(lambda))^l`, whose sum inverts to
/// `b / sqrt(pi t) + 2 b^2 e^{b^2 t} Phi(b sqrt(2t))`.
pub fn resolvent_prefactor(kernel: KernelVariant, t: f64) -> Result<f64> {
    check_time(t)?;
    let c = kernel.c;
    if c == 0.0 {
        return Ok(0.0);
    }
    Ok(match kernel.variant {
        Variant::Stochastic => half_line_resolvent(0.5 * c, t),
        Variant::NoDrift => half_line_resolvent(c / 8f64.sqrt(), t),
        Variant::Deterministic => c * (c * t).exp(),
    })
}

fn half_line_resolvent(b: f64, t: f64) -> f64 {
    b / (PI * t).sqrt() + 2.0 * b * b * (b * b * t).exp() * normal_cdf(b * (2.0 * t).sqrt())
}

/// Closed-form resolvent `K = sum_{l >= 1} C^l J^{*l}`.
pub fn resolvent_closed(kernel: KernelVariant, t: f64, x: f64) -> Result<f64> {
    let g = resolvent_prefactor(kernel, t)?;
    Ok(g * gamma(kernel.variant.time_scale() * t, x))
}

/// Alternative closed forms, kept for comparison only.
///
/// The stochastic one equals [`resolvent_closed`] at `C / 2`, and the
/// deterministic one freezes the exponential at `t = 1`.
pub fn resolvent_alternative(kernel: KernelVariant, t: f64, x: f64) -> Result<f64> {
    check_time(t)?;
    let c = kernel.c;
    Ok(match kernel.variant {
        Variant::Stochastic => {
            (c / (4.0 * (PI * t).sqrt())
                + c * c / 8.0 * (c * c * t / 16.0).exp() * normal_cdf(c * (t / 8.0).sqrt()))
                * gamma(t, x)
        }
        Variant::NoDrift => {
            (c / (8.0 * PI * t).sqrt()
                + c * c / 4.0 * (c * c * t / 8.0).exp() * normal_cdf(c * (t / 4.0).sqrt()))
                * gamma(0.5 * t, x)
        }
        Variant::Deterministic => c * c.exp() * gamma(t, x),
    })
}

/// `J` sampled at time-cell midpoints (never at `r = 0`).
pub fn sample_j(variant: Variant, grid: SpaceTimeGrid) -> GridField {
    GridField::sample(grid, Sampling::Midpoint, move |t, x| {
        j_unchecked(variant, t, x)
    })
}

/// Closed-form resolvent sampled on the grid.
pub fn sample_resolvent(
    kernel: KernelVariant,
    grid: SpaceTimeGrid,
    sampling: Sampling,
) -> GridField {
    GridField::sample(grid, sampling, move |t, x| {
        resolvent_closed(kernel, t, x).unwrap_or(f64::NAN)
    })
}

/// Spatial half-width used to truncate the real line for a horizon `t_end`.
pub fn truncation_half_width(t_end: f64, c_max: f64) -> f64 {
    8.0 * t_end.sqrt() * c_max.max(1.0)
}

/// Convolution powers `J^{*l}`, `l = 1..=n_terms`, sampled at end points.
pub fn convolution_powers(
    variant: Variant,
    grid: SpaceTimeGrid,
    n_terms: usize,
) -> Result<Vec<GridField>> {
    if n_terms == 0 {
        return Err(domain("need at least one series term"));
    }
    let j_mid = sample_j(variant, grid);
    let mut powers = Vec::with_capacity(n_terms);
    powers.push(GridField::sample(grid, Sampling::EndPoint, move |t, x| {
        j_unchecked(variant, t, x)
    }));
    if n_terms > 1 {
        let conv = Convolver::new(&j_mid)?;
        let mut current = j_mid;
        for _ in 1..n_terms {
            let next = conv.apply(&current)?;
            current = next.to_midpoint();
            powers.push(next);
        }
    }
    Ok(powers)
}

/// `sum_{l=1}^{n} C^l J^{*l}` on the grid (end-point sampled).
pub fn resolvent_series(
    kernel: KernelVariant,
    grid: SpaceTimeGrid,
    n_terms: usize,
) -> Result<GridField> {
    let powers = convolution_powers(kernel.variant, grid, n_terms)?;
    Ok(sum_series(&powers, kernel.c))
}

/// Weighted sum of precomputed convolution powers for one value of `C`.
pub fn sum_series(powers: &[GridField], c: f64) -> GridField {
    let mut out = GridField::zeros(powers[0].grid, Sampling::EndPoint);
    let mut weight = 1.0;
    for p in powers {
        weight *= c;
        out.axpy(weight, p).expect("powers share one grid");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j_examples() {
        let v = j_kernel(Variant::Stochastic, 1.0, 0.0).unwrap();
        assert!((v - 0.079_577_471_545_947_67).abs() < 1e-15);
        let g = gamma(0.37, 0.21);
        assert!((j_kernel(Variant::NoDrift, 0.37, 0.21).unwrap() - g * g).abs() < 1e-15);
        assert_eq!(j_kernel(Variant::Deterministic, 0.37, 0.21).unwrap(), g);
        assert!(j_kernel(Variant::Stochastic, 0.0, 0.0).is_err());
    }

    #[test]
    fn closed_form_examples() {
        for v in Variant::ALL {
            let k = KernelVariant::new(v, 0.0).unwrap();
            assert_eq!(resolvent_closed(k, 0.4, 0.1).unwrap(), 0.0);
        }
        let det = KernelVariant::new(Variant::Deterministic, 1.0).unwrap();
        let v = resolvent_closed(det, 1.0, 0.0).unwrap();
        assert!((v - 0.766_813_146_381_871).abs() < 1e-12);
        assert!(KernelVariant::new(Variant::Stochastic, -1.0).is_err());
    }

    #[test]
    fn alternative_forms_relate_to_true_resolvents() {
        for &t in &[0.1, 0.5, 1.0, 2.0] {
            let x = 0.3;
            let ours =
                resolvent_closed(KernelVariant::new(Variant::Stochastic, 1.4).unwrap(), t, x)
                    .unwrap();
            let alt =
                resolvent_alternative(KernelVariant::new(Variant::Stochastic, 2.8).unwrap(), t, x)
                    .unwrap();
            assert!((ours - alt).abs() <= 1e-14 * ours);
            let nd = KernelVariant::new(Variant::NoDrift, 1.4).unwrap();
            let a = resolvent_closed(nd, t, x).unwrap();
            let b = resolvent_alternative(nd, t, x).unwrap();
            assert!((a - b).abs() <= 1e-14 * a);
            let det = KernelVariant::new(Variant::Deterministic, 1.4).unwrap();
            let a = resolvent_closed(det, t, x).unwrap();
            let b = resolvent_alternative(det, t, x).unwrap();
            if t < 1.0 {
                assert!(a < b);
            } else if t == 1.0 {
                assert!((a - b).abs() <= 1e-14 * a);
            }
        }
    }

    #[test]
    fn variant_parsing() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("other".parse::<Variant>().is_err());
    }
}
