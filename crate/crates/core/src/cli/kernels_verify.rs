use std::path::PathBuf;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{prepare_output, Status};
use crate::error::{config, Result};
use crate::experiments::write_json;
use crate::kernels::{
    discrepancy, discrepancy_l1, green_eigen, green_images, green_mass, green_mass_deficit,
    l1_bound, mixed_lower_bound, neumann_pointwise_bound, pointwise_upper_bound,
    semigroup_residual, tail_mass, BoundaryCondition, GreenEvaluator, DEFAULT_MAX_TERMS,
    DEFAULT_SERIES_TOL,
};
use crate::numfmt::json_f64;

/// Relative slack for the pointwise sign and bound checks.
const POINTWISE_SLACK: f64 = 1e-12;

/// An explicit `(t, x, y, L)` sample added to the random ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    #[serde(rename = "L")]
    pub l: f64,
}

fn default_seed() -> u64 {
    1
}
fn default_ls() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}
fn default_samples() -> usize {
    500
}
fn default_quadrature_samples() -> usize {
    100
}
fn default_t_min() -> f64 {
    0.01
}
fn default_t_max() -> f64 {
    5.0
}
fn default_dual_tolerance() -> f64 {
    1e-10
}
fn default_semigroup_tolerance() -> f64 {
    1e-8
}
fn default_mass_tolerance() -> f64 {
    1e-10
}
fn default_identity_tolerance() -> f64 {
    1e-8
}
fn default_series_tol() -> f64 {
    DEFAULT_SERIES_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelsVerifyConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(rename = "Ls", default = "default_ls")]
    pub ls: Vec<f64>,
    /// Random points per boundary condition for the pointwise checks.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Random points per boundary condition for the quadrature checks.
    #[serde(default = "default_quadrature_samples")]
    pub quadrature_samples: usize,
    #[serde(default = "default_t_min")]
    pub t_min: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_dual_tolerance")]
    pub dual_tolerance: f64,
    #[serde(default = "default_semigroup_tolerance")]
    pub semigroup_tolerance: f64,
    #[serde(default = "default_mass_tolerance")]
    pub mass_tolerance: f64,
    #[serde(default = "default_identity_tolerance")]
    pub identity_tolerance: f64,
    /// Truncation tolerance of the Green's function series.
    #[serde(default = "default_series_tol")]
    pub series_tol: f64,
    #[serde(default)]
    pub points: Vec<Point>,
    pub report: PathBuf,
}

impl KernelsVerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ls.is_empty() || !self.ls.iter().all(|&l| l > 0.0 && l.is_finite()) {
            return Err(config(
                "Ls must be a nonempty list of positive half-lengths",
            ));
        }
        if !(self.t_min > 0.0 && self.t_min < self.t_max && self.t_max.is_finite()) {
            return Err(config(format!(
                "need 0 < t_min < t_max, got {} and {}",
                self.t_min, self.t_max
            )));
        }
        let tols = [
            self.dual_tolerance,
            self.semigroup_tolerance,
            self.mass_tolerance,
            self.identity_tolerance,
            self.series_tol,
        ];
        if !tols.iter().all(|&v| v > 0.0 && v.is_finite()) {
            return Err(config("tolerances must be positive"));
        }
        for p in &self.points {
            if !(p.t > 0.0 && p.l > 0.0 && p.x.abs() <= p.l && p.y.abs() <= p.l) {
                return Err(config(format!(
                    "point {p:?} violates t > 0, L > 0, |x| <= L, |y| <= L"
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of one named check for one boundary condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: String,
    pub bc: BoundaryCondition,
    pub samples: usize,
    /// Largest value of the check statistic.
    #[serde(serialize_with = "json_f64")]
    pub worst: f64,
    /// The statistic must stay at or below this limit.
    #[serde(serialize_with = "json_f64")]
    pub limit: f64,
    #[serde(serialize_with = "json_f64")]
    pub margin: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelsReport {
    pub config: KernelsVerifyConfig,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

struct Sampler(ChaCha8Rng);

impl Sampler {
    fn uniform(&mut self, a: f64, b: f64) -> f64 {
        let u = (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        a + (b - a) * u
    }

    fn log_uniform(&mut self, a: f64, b: f64) -> f64 {
        self.uniform(a.ln(), b.ln()).exp()
    }
}

struct Sample {
    t: f64,
    x: f64,
    y: f64,
    l: f64,
}

fn sample(rng: &mut Sampler, cfg: &KernelsVerifyConfig, interior: bool) -> Sample {
    let l = cfg.ls[(rng.0.next_u64() % cfg.ls.len() as u64) as usize];
    let t = rng.log_uniform(cfg.t_min, cfg.t_max);
    let reach = if interior { 0.999 * l } else { l };
    Sample {
        t,
        x: rng.uniform(-reach, reach),
        y: rng.uniform(-l, l),
        l,
    }
}

struct Tracker {
    check: &'static str,
    bc: BoundaryCondition,
    limit: f64,
    strict: bool,
    worst: f64,
    samples: usize,
    note: Option<String>,
}

impl Tracker {
    fn new(check: &'static str, bc: BoundaryCondition, limit: f64) -> Self {
        Self {
            check,
            bc,
            limit,
            strict: false,
            worst: f64::NEG_INFINITY,
            samples: 0,
            note: None,
        }
    }

    fn strict(mut self) -> Self {
        self.strict = true;
        self
    }

    fn record(&mut self, v: f64) {
        self.samples += 1;
        if v > self.worst || v.is_nan() {
            self.worst = v;
        }
    }

    fn finish(self) -> CheckResult {
        let within = if self.strict {
            self.worst < self.limit
        } else {
            self.worst <= self.limit
        };
        CheckResult {
            check: self.check.to_string(),
            bc: self.bc,
            samples: self.samples,
            worst: self.worst,
            limit: self.limit,
            margin: self.limit - self.worst,
            passed: within && self.note.is_none(),
            note: self.note,
        }
    }
}

fn evaluator(cfg: &KernelsVerifyConfig, l: f64, bc: BoundaryCondition) -> Result<GreenEvaluator> {
    GreenEvaluator::with_tolerance(l, bc, cfg.series_tol, DEFAULT_MAX_TERMS)
}

/// Runs every check and returns the per-check results.
pub fn verify(cfg: &KernelsVerifyConfig) -> Result<Vec<CheckResult>> {
    cfg.validate()?;
    let mut rng = Sampler(ChaCha8Rng::seed_from_u64(cfg.seed));
    let mut out = Vec::new();
    for bc in BoundaryCondition::ALL {
        let mut pointwise: Vec<Sample> = cfg
            .points
            .iter()
            .map(|p| Sample {
                t: p.t,
                x: p.x,
                y: p.y,
                l: p.l,
            })
            .collect();
        pointwise.extend((0..cfg.samples).map(|_| sample(&mut rng, cfg, false)));
        let quad: Vec<Sample> = (0..cfg.quadrature_samples)
            .map(|_| sample(&mut rng, cfg, true))
            .collect();

        let mut dual = Tracker::new("dual-representation", bc, cfg.dual_tolerance);
        let floor = 2.0 * cfg.series_tol;
        if cfg.dual_tolerance < floor {
            dual.note = Some(format!(
                "tolerance {:e} is below the certified truncation level {floor:e}",
                cfg.dual_tolerance
            ));
        }
        let mut sign = Tracker::new("sign", bc, 0.0);
        let mut bound = Tracker::new("bound-pointwise", bc, 1.0 + POINTWISE_SLACK);
        for s in &pointwise {
            let ev = evaluator(cfg, s.l, bc)?;
            let a = green_images(&ev, s.t, s.x, s.y)?;
            let b = green_eigen(&ev, s.t, s.x, s.y)?;
            dual.record((a - b).abs());
            let h = discrepancy(&ev, s.t, s.x, s.y)?;
            let scale = POINTWISE_SLACK * a.abs().max(b.abs());
            match bc {
                BoundaryCondition::Dirichlet => {
                    sign.record(-h - scale);
                    bound.record(h / pointwise_upper_bound(s.t, s.x, s.l)?);
                }
                BoundaryCondition::Mixed => {
                    let lower = mixed_lower_bound(s.t, s.x, s.y, s.l)?;
                    sign.record(lower - h - scale);
                    bound.record(h / pointwise_upper_bound(s.t, s.x, s.l)?);
                }
                BoundaryCondition::Neumann => {
                    sign.record(h - scale);
                    bound.record(-h / neumann_pointwise_bound(s.t, s.x, s.l)?);
                }
            }
        }
        out.extend([dual.finish(), sign.finish(), bound.finish()]);

        let mut mass = if bc == BoundaryCondition::Neumann {
            Tracker::new("mass", bc, cfg.mass_tolerance)
        } else {
            Tracker::new("mass", bc, 0.0).strict()
        };
        let mut semigroup = Tracker::new("semigroup", bc, cfg.semigroup_tolerance);
        let mut l1 = Tracker::new("bound-l1", bc, 1.0 + POINTWISE_SLACK);
        let mut identity = Tracker::new("tail-identity", bc, cfg.identity_tolerance);
        for s in &quad {
            let ev = evaluator(cfg, s.l, bc)?;
            if bc == BoundaryCondition::Neumann {
                mass.record((green_mass(&ev, s.t, s.x)? - 1.0).abs());
            } else {
                mass.record(-green_mass_deficit(&ev, s.t, s.x)?);
            }
            let t2 = 0.5 * s.t;
            semigroup.record(semigroup_residual(&ev, t2, s.t - t2, s.x, s.y)?);
            let h1 = discrepancy_l1(&ev, s.t, s.x)?;
            l1.record(h1 / l1_bound(s.t, s.x, s.l)?);
            if bc == BoundaryCondition::Neumann {
                identity.record((h1 - tail_mass(s.t, s.x, s.l)?).abs());
            }
        }
        out.extend([mass.finish(), semigroup.finish(), l1.finish()]);
        if bc == BoundaryCondition::Neumann {
            out.push(identity.finish());
        }
    }
    Ok(out)
}

pub fn run(cfg: &KernelsVerifyConfig) -> Result<Status> {
    let checks = verify(cfg)?;
    for c in &checks {
        println!(
            "{} {:<20} {:<9} n={:<5} worst={:.3e} limit={:.3e}{}",
            if c.passed { "PASS" } else { "FAIL" },
            c.check,
            c.bc.name(),
            c.samples,
            c.worst,
            c.limit,
            c.note
                .as_deref()
                .map(|n| format!(" ({n})"))
                .unwrap_or_default()
        );
    }
    let passed = checks.iter().all(|c| c.passed);
    prepare_output(&cfg.report)?;
    write_json(
        &KernelsReport {
            config: cfg.clone(),
            checks,
            passed,
        },
        &cfg.report,
    )?;
    Ok(Status::from_pass(passed))
}
