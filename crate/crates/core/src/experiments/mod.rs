//! Localization sweeps over `L`, decay-rate fits, envelope checks, and result tables.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::kernels::{rate_factor_al, BoundaryCondition};
use crate::numfmt::json_opt_f64;
use crate::solver::{
    check_margin, linear_variance_exact, proxy_half_length, CoefficientSpec, Coefficients, Domain,
    InitialCondition, LatticeSpec, McPlan, ProxyBound,
};

pub mod emit;
pub mod fit;
pub mod small_l;

pub use crate::solver::LocalizationRecord;
pub use emit::{emit_records, read_records, write_json, Format};
pub use fit::{
    check_monotone, fit_envelope_constant, fit_log_linear, fit_rate, fit_rate_groups, EnvelopeFit,
    MonotoneReport, RateFit, Regime, TrendCheck, FIT_WINDOW, SLOPE_TOLERANCE,
};
pub use small_l::{neumann_small_l_check, SmallLReport};

/// Minimum replicate count for Monte Carlo sweeps.
pub const MIN_MC_REPS: usize = 100;

/// How a sweep evaluates the localization error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Quadrature when the exact linear-case variance applies, Monte Carlo otherwise.
    #[default]
    Auto,
    MonteCarlo,
    Quadrature,
}

fn default_xs() -> Vec<f64> {
    vec![0.0]
}

fn default_p() -> f64 {
    2.0
}

/// A sweep over boundary conditions, half-lengths, times, and positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub bcs: Vec<BoundaryCondition>,
    /// Half-lengths in ascending order.
    pub ls: Vec<f64>,
    pub ts: Vec<f64>,
    #[serde(default = "default_xs")]
    pub xs: Vec<f64>,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub n_reps: usize,
    pub dx: f64,
    pub dt: f64,
    /// Proxy half-length; defaults to the smallest aligned value obeying the margin rule.
    #[serde(default)]
    pub l_master: Option<f64>,
    pub coefficients: CoefficientSpec,
    pub initial: InitialCondition,
    pub base_seed: u64,
    #[serde(default)]
    pub method: Method,
}

/// Records of a sweep plus the proxy metadata of its Monte Carlo path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub method: Method,
    pub records: Vec<LocalizationRecord>,
    pub flagged: usize,
    #[serde(rename = "L_master", serialize_with = "json_opt_f64")]
    pub l_master: Option<f64>,
    pub proxy_bounds: Vec<ProxyBound>,
}

impl SweepConfig {
    fn exact_applies(&self) -> bool {
        Coefficients::from(self.coefficients).is_linear()
            && matches!(
                self.initial,
                InitialCondition::Zero | InitialCondition::Constant { .. }
            )
    }

    /// The method actually used.
    pub fn resolved_method(&self) -> Method {
        match self.method {
            Method::Auto if self.exact_applies() && self.p == 2.0 => Method::Quadrature,
            Method::Auto => Method::MonteCarlo,
            m => m,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.ts.iter().copied().fold(0.0, f64::max)
    }

    /// The proxy lattice for the Monte Carlo path.
    pub fn master_lattice(&self) -> Result<LatticeSpec> {
        let l_max = self.ls.iter().copied().fold(0.0, f64::max);
        let t_end = self.horizon();
        let l_master = match self.l_master {
            Some(l) => {
                check_margin(l, l_max, t_end)?;
                l
            }
            None => proxy_half_length(l_max, t_end, self.dx),
        };
        LatticeSpec::new(l_master, self.dx, t_end, self.dt)
    }

    /// Checks every precondition before any compute starts.
    pub fn validate(&self) -> Result<()> {
        if self.bcs.is_empty() || self.ls.is_empty() || self.ts.is_empty() || self.xs.is_empty() {
            return Err(config("sweep needs nonempty bcs, ls, ts, and xs"));
        }
        if !(self.p >= 1.0) || !self.p.is_finite() {
            return Err(config(format!("need finite p >= 1, got {}", self.p)));
        }
        if !self.ls.iter().all(|&l| l > 0.0 && l.is_finite()) {
            return Err(config("half-lengths must be positive"));
        }
        if !self.ls.windows(2).all(|w| w[0] < w[1]) {
            return Err(config("half-lengths must be strictly ascending"));
        }
        if !self.ts.iter().all(|&t| t > 0.0 && t.is_finite()) {
            return Err(config("times must be positive"));
        }
        let l_min = self.ls[0];
        if !self.xs.iter().all(|&x| x.abs() < l_min) {
            return Err(config(format!("positions must satisfy |x| < {l_min}")));
        }
        self.coefficients.validate()?;
        self.initial.validate()?;
        match self.resolved_method() {
            Method::Quadrature => {
                if !self.exact_applies() || self.p != 2.0 {
                    return Err(config(
                        "quadrature needs sigma = 1, b = 0, zero or constant u0, and p = 2",
                    ));
                }
            }
            _ => {
                if self.n_reps < MIN_MC_REPS {
                    return Err(config(format!(
                        "Monte Carlo sweeps need n_reps >= {MIN_MC_REPS}, got {}",
                        self.n_reps
                    )));
                }
                let master = self.master_lattice()?;
                for &l in &self.ls {
                    let sub = master.restrict(l)?;
                    for &x in &self.xs {
                        sub.node_index(x)?;
                    }
                }
                for &t in &self.ts {
                    master.step_index(t)?;
                }
            }
        }
        Ok(())
    }
}

/// One record per `(bc, L, t, x)`, ordered by bc, then `L`, `t`, `x`.
pub fn sweep(cfg: &SweepConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    let method = cfg.resolved_method();
    let cells: Vec<(BoundaryCondition, f64, f64, f64)> = cfg
        .bcs
        .iter()
        .flat_map(|&bc| {
            cfg.ls.iter().flat_map(move |&l| {
                cfg.ts
                    .iter()
                    .flat_map(move |&t| cfg.xs.iter().map(move |&x| (bc, l, t, x)))
            })
        })
        .collect();
    let exact = |bc, l, t, x| linear_variance_exact(bc, l, t, x, &cfg.initial);
    if method == Method::Quadrature {
        let records = cells
            .par_iter()
            .map(|&(bc, l, t, x)| {
                let v = exact(bc, l, t, x)?;
                Ok(LocalizationRecord {
                    bc,
                    l,
                    t,
                    x,
                    p: 2.0,
                    error: v.sqrt(),
                    std_error: 0.0,
                    bound_al: rate_factor_al(t, x, l)?,
                    exact_variance: Some(v),
                    n_effective: 0,
                    seed: cfg.base_seed,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(SweepOutcome {
            method,
            records,
            flagged: 0,
            l_master: None,
            proxy_bounds: Vec::new(),
        });
    }

    let mut ts = cfg.ts.clone();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let plan = McPlan {
        master: cfg.master_lattice()?,
        domains: cfg
            .bcs
            .iter()
            .flat_map(|&bc| cfg.ls.iter().map(move |&l| Domain { bc, l }))
            .collect(),
        times: ts.clone(),
        xs: cfg.xs.clone(),
        p: cfg.p,
        n_reps: cfg.n_reps,
        base_seed: cfg.base_seed,
        coeffs: cfg.coefficients.into(),
        u0: cfg.initial,
    };
    let out = plan.run()?;
    let nx = cfg.xs.len();
    let mut records = Vec::with_capacity(cells.len());
    for (di, _) in plan.domains.iter().enumerate() {
        for &t in &cfg.ts {
            let ti = ts.iter().position(|&s| s == t).unwrap_or(0);
            for xi in 0..nx {
                records.push(out.records[(di * ts.len() + ti) * nx + xi].clone());
            }
        }
    }
    if cfg.exact_applies() {
        let exact_values = records
            .par_iter()
            .map(|r| exact(r.bc, r.l, r.t, r.x))
            .collect::<Result<Vec<_>>>()?;
        for (r, v) in records.iter_mut().zip(exact_values) {
            r.exact_variance = Some(v);
        }
    }
    Ok(SweepOutcome {
        method,
        records,
        flagged: out.flagged,
        l_master: Some(out.l_master),
        proxy_bounds: out.proxy_bounds,
    })
}

/// `1 + ||u_0||_inf` times `a_L`: the shape of the localization bound.
pub fn envelope_scale(u0: &InitialCondition, rec: &LocalizationRecord) -> f64 {
    (1.0 + u0.sup_norm()) * rec.bound_al
}
