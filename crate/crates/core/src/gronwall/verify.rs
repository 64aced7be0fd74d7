//! Truncated resolvent series against the closed form on an interior region.

use serde::{Deserialize, Serialize};

use super::grid::{GridField, Sampling, SpaceTimeGrid};
use super::resolvent::{
    convolution_powers, resolvent_closed, sum_series, truncation_half_width, KernelVariant, Variant,
};
use crate::error::{domain, Result};
use crate::numfmt::json_f64;

/// Interior points satisfy `t >= t_min` and `|x| <= INTERIOR_SIGMAS sqrt(t)`.
pub const INTERIOR_SIGMAS: f64 = 4.0;

/// Worst relative gap between a truncated series and the closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesComparison {
    pub variant: Variant,
    #[serde(serialize_with = "json_f64")]
    pub c: f64,
    pub terms: usize,
    #[serde(serialize_with = "json_f64")]
    pub worst_relative: f64,
    #[serde(serialize_with = "json_f64")]
    pub at_t: f64,
    #[serde(serialize_with = "json_f64")]
    pub at_x: f64,
    pub points: usize,
}

/// Compares an end-point sampled series with [`resolvent_closed`] on the interior region.
pub fn compare_series(
    kernel: KernelVariant,
    series: &GridField,
    terms: usize,
    t_min: f64,
) -> Result<SeriesComparison> {
    if series.sampling != Sampling::EndPoint {
        return Err(domain("series must be end-point sampled"));
    }
    let grid = series.grid;
    let mut cmp = SeriesComparison {
        variant: kernel.variant,
        c: kernel.c,
        terms,
        worst_relative: 0.0,
        at_t: f64::NAN,
        at_x: f64::NAN,
        points: 0,
    };
    for i in 0..grid.nt() {
        let t = grid.time(i, Sampling::EndPoint);
        if t < t_min * (1.0 - 1e-12) {
            continue;
        }
        let reach = INTERIOR_SIGMAS * t.sqrt();
        for k in 0..grid.nx() {
            let x = grid.x(k);
            if x.abs() > reach {
                continue;
            }
            cmp.points += 1;
            let closed = resolvent_closed(kernel, t, x)?;
            let gap = (series.at(i, k) - closed).abs();
            let rel = if closed > 0.0 {
                gap / closed
            } else if gap == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            if rel > cmp.worst_relative || cmp.at_t.is_nan() {
                cmp.worst_relative = cmp.worst_relative.max(rel);
                cmp.at_t = t;
                cmp.at_x = x;
            }
        }
    }
    Ok(cmp)
}

/// Series-versus-closed-form comparisons for every variant and `C`, on a
/// grid wide enough for the largest `C`. The convolution powers are computed
/// once per variant.
pub fn series_suite(
    variants: &[Variant],
    cs: &[f64],
    t_end: f64,
    dt: f64,
    dx: f64,
    terms: usize,
    t_min: f64,
) -> Result<Vec<SeriesComparison>> {
    let c_max = cs.iter().copied().fold(0.0, f64::max);
    let half_width = (truncation_half_width(t_end, c_max) / dx).ceil() * dx;
    let grid = SpaceTimeGrid::symmetric(t_end, dt, half_width, dx)?;
    let mut out = Vec::with_capacity(variants.len() * cs.len());
    for &v in variants {
        let powers = convolution_powers(v, grid, terms)?;
        for &c in cs {
            let kernel = KernelVariant::new(v, c)?;
            out.push(compare_series(
                kernel,
                &sum_series(&powers, c),
                terms,
                t_min,
            )?);
        }
    }
    Ok(out)
}
