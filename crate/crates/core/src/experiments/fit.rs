use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::BoundaryCondition;
use crate::numfmt::json_f64;
use crate::solver::LocalizationRecord;

/// Relative slack allowed when comparing fitted and theoretical slopes.
pub const SLOPE_TOLERANCE: f64 = 0.15;

/// Fits use only `L` with `(L - |x|)^2 / (8t) >= FIT_WINDOW`.
pub const FIT_WINDOW: f64 = 2.0;

/// Decay envelope in `L^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `exp(-L^2 / (8t))`: the general nonlinear bound.
    General8t,
    /// `exp(-L^2 / (4t))`: the linear, driftless, and deterministic cases.
    Sharp4t,
}

impl Regime {
    pub fn slope(self, t: f64) -> f64 {
        match self {
            Self::General8t => -1.0 / (8.0 * t),
            Self::Sharp4t => -1.0 / (4.0 * t),
        }
    }
}

/// Least-squares fit of `log(error)` against `L^2` at fixed `(bc, t, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub bc: BoundaryCondition,
    #[serde(serialize_with = "json_f64")]
    pub t: f64,
    #[serde(serialize_with = "json_f64")]
    pub x: f64,
    pub points: usize,
    #[serde(serialize_with = "json_f64")]
    pub slope: f64,
    #[serde(serialize_with = "json_f64")]
    pub intercept: f64,
    #[serde(serialize_with = "json_f64")]
    pub r_squared: f64,
    pub regime: Regime,
    #[serde(serialize_with = "json_f64")]
    pub theoretical_slope: f64,
    /// `|slope - theoretical| / |theoretical|`.
    #[serde(serialize_with = "json_f64")]
    pub relative_deviation: f64,
    /// Fastest envelope the fitted decay keeps up with, within the slope tolerance.
    pub envelope: Option<Regime>,
}

impl RateFit {
    /// True if the slope is within `rel` of the theoretical slope.
    pub fn matches(&self, rel: f64) -> bool {
        self.relative_deviation <= rel
    }

    /// True if the decay is at least as fast as the theoretical envelope,
    /// up to `rel`.
    pub fn decays_as_fast(&self, rel: f64) -> bool {
        self.slope <= self.theoretical_slope * (1.0 - rel)
    }
}

/// `(slope, intercept, r^2)` of the least-squares line `y = slope x + intercept`.
pub fn fit_log_linear(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::Fit(format!(
            "need matching samples, got {n} and {}",
            y.len()
        )));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (slope * a + intercept);
            r * r
        })
        .sum();
    let r2 = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok((slope, intercept, r2))
}

fn same_group(a: &LocalizationRecord, b: &LocalizationRecord) -> bool {
    a.bc == b.bc && a.t == b.t && a.x == b.x
}

fn in_window(r: &LocalizationRecord) -> bool {
    let d = r.l - r.x.abs();
    d > 0.0 && d * d / (8.0 * r.t) >= FIT_WINDOW
}

/// Rate fit on records sharing `(bc, t, x)`, restricted to the asymptotic window.
pub fn fit_rate(records: &[LocalizationRecord], regime: Regime) -> Result<RateFit> {
    let first = records
        .first()
        .ok_or_else(|| Error::Fit("no records to fit".into()))?;
    if !records.iter().all(|r| same_group(first, r)) {
        return Err(Error::Fit("records must share bc, t, and x".into()));
    }
    let window: Vec<&LocalizationRecord> = records.iter().filter(|r| in_window(r)).collect();
    if window.len() < 4 {
        return Err(Error::Fit(format!(
            "need at least 4 records in the fit window, got {}",
            window.len()
        )));
    }
    if let Some(bad) = window.iter().find(|r| !(r.error > 0.0)) {
        return Err(Error::Fit(format!(
            "nonpositive error {} at L = {}",
            bad.error, bad.l
        )));
    }
    let xs: Vec<f64> = window.iter().map(|r| r.l * r.l).collect();
    let ys: Vec<f64> = window.iter().map(|r| r.error.ln()).collect();
    let (slope, intercept, r_squared) = fit_log_linear(&xs, &ys)?;
    let theoretical_slope = regime.slope(first.t);
    let envelope = [Regime::Sharp4t, Regime::General8t]
        .into_iter()
        .find(|g| slope <= g.slope(first.t) * (1.0 - SLOPE_TOLERANCE));
    Ok(RateFit {
        bc: first.bc,
        t: first.t,
        x: first.x,
        points: window.len(),
        slope,
        intercept,
        r_squared,
        regime,
        theoretical_slope,
        relative_deviation: ((slope - theoretical_slope) / theoretical_slope).abs(),
        envelope,
    })
}

fn groups(records: &[LocalizationRecord]) -> Vec<Vec<LocalizationRecord>> {
    let mut out: Vec<Vec<LocalizationRecord>> = Vec::new();
    for r in records {
        match out.iter_mut().find(|g| same_group(&g[0], r)) {
            Some(g) => g.push(r.clone()),
            None => out.push(vec![r.clone()]),
        }
    }
    for g in &mut out {
        g.sort_by(|a, b| a.l.total_cmp(&b.l));
    }
    out
}

/// Rate fits for every `(bc, t, x)` group with enough points in the window.
pub fn fit_rate_groups(records: &[LocalizationRecord], regime: Regime) -> Vec<RateFit> {
    groups(records)
        .iter()
        .filter(|g| g.iter().filter(|r| in_window(r)).count() >= 4)
        .filter_map(|g| fit_rate(g, regime).ok())
        .collect()
}

/// Trend of the envelope ratio across the three largest `L` of one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendCheck {
    pub bc: BoundaryCondition,
    #[serde(serialize_with = "json_f64")]
    pub t: f64,
    #[serde(serialize_with = "json_f64")]
    pub x: f64,
    #[serde(serialize_with = "json_f64")]
    pub first_ratio: f64,
    #[serde(serialize_with = "json_f64")]
    pub last_ratio: f64,
    /// Allowed growth `3 * relative SE`.
    #[serde(serialize_with = "json_f64")]
    pub allowance: f64,
    pub upward: bool,
}

/// Sweep-wide constant `c` in `error <= c (1 + ||u_0||) a_L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit {
    #[serde(serialize_with = "json_f64")]
    pub fitted_c: f64,
    #[serde(serialize_with = "json_f64")]
    pub u0_sup: f64,
    pub trends: Vec<TrendCheck>,
    pub upward_trend: bool,
}

fn relative_se(r: &LocalizationRecord) -> f64 {
    if r.error > 0.0 {
        r.std_error / r.error
    } else {
        0.0
    }
}

/// Max-ratio envelope constant, with a per-group check that the ratio does
/// not grow across the three largest `L`.
pub fn fit_envelope_constant(records: &[LocalizationRecord], u0_sup: f64) -> Result<EnvelopeFit> {
    if records.is_empty() {
        return Err(Error::Fit("no records for the envelope fit".into()));
    }
    if !(u0_sup >= 0.0) {
        return Err(Error::Fit(format!("need ||u0|| >= 0, got {u0_sup}")));
    }
    if let Some(bad) = records.iter().find(|r| !(r.bound_al > 0.0)) {
        return Err(Error::Fit(format!(
            "need a_L > 0, got {} at L = {}",
            bad.bound_al, bad.l
        )));
    }
    let ratio = |r: &LocalizationRecord| r.error / ((1.0 + u0_sup) * r.bound_al);
    let fitted_c = records.iter().map(ratio).fold(0.0, f64::max);
    let mut trends = Vec::new();
    for g in groups(records) {
        if g.len() < 3 {
            continue;
        }
        let first = &g[g.len() - 3];
        let last = &g[g.len() - 1];
        let allowance = 3.0 * relative_se(first).hypot(relative_se(last));
        let (a, b) = (ratio(first), ratio(last));
        trends.push(TrendCheck {
            bc: first.bc,
            t: first.t,
            x: first.x,
            first_ratio: a,
            last_ratio: b,
            allowance,
            upward: b > a * (1.0 + allowance),
        });
    }
    let upward_trend = trends.iter().any(|t| t.upward);
    Ok(EnvelopeFit {
        fitted_c,
        u0_sup,
        trends,
        upward_trend,
    })
}

/// Monotonicity of the error in `L` within every `(bc, t, x)` group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    /// Every consecutive pair strictly decreases.
    pub strictly_decreasing: bool,
    /// Every increase is within 3 combined standard errors.
    pub nonincreasing_within_se: bool,
    /// Every pair decreases strictly up to 3 combined standard errors.
    pub decreasing_within_se: bool,
}

pub fn check_monotone(records: &[LocalizationRecord]) -> MonotoneReport {
    let mut rep = MonotoneReport {
        strictly_decreasing: true,
        nonincreasing_within_se: true,
        decreasing_within_se: true,
    };
    for g in groups(records) {
        for w in g.windows(2) {
            let slack = 3.0 * w[0].std_error.hypot(w[1].std_error);
            rep.strictly_decreasing &= w[1].error < w[0].error;
            rep.nonincreasing_within_se &= w[1].error <= w[0].error + slack;
            rep.decreasing_within_se &= w[1].error < w[0].error + slack;
        }
    }
    rep
}
