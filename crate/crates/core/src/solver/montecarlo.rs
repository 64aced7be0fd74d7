use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coefficients::{Coefficients, InitialCondition};
use super::lattice::{check_margin, LatticeSpec};
use super::noise::make_noise;
use super::scheme::Stepper;
use crate::error::{config, Error, Result};
use crate::kernels::{rate_factor_al, BoundaryCondition};
use crate::numfmt::{json_f64, json_opt_f64};

/// Maximum fraction of replicates that may blow up before the run fails.
const MAX_FLAGGED_FRACTION: f64 = 0.01;

/// A truncated domain `[-L, L]` with its boundary condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub bc: BoundaryCondition,
    pub l: f64,
}

/// Estimate of `||u(t, x) - u_L(t, x)||_{L^p}` at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationRecord {
    pub bc: BoundaryCondition,
    #[serde(rename = "L", serialize_with = "json_f64")]
    pub l: f64,
    #[serde(serialize_with = "json_f64")]
    pub t: f64,
    #[serde(serialize_with = "json_f64")]
    pub x: f64,
    #[serde(serialize_with = "json_f64")]
    pub p: f64,
    #[serde(serialize_with = "json_f64")]
    pub error: f64,
    #[serde(serialize_with = "json_f64")]
    pub std_error: f64,
    /// `a_L(t, x)`, the boundary factor of the localization bound.
    #[serde(rename = "bound_aL", serialize_with = "json_f64")]
    pub bound_al: f64,
    #[serde(serialize_with = "json_opt_f64")]
    pub exact_variance: Option<f64>,
    pub n_effective: usize,
    pub seed: u64,
}

/// A coupled Monte Carlo run: one whole-line proxy and several truncated
/// domains, all driven by the same noise in every replicate.
#[derive(Debug, Clone)]
pub struct McPlan {
    /// Lattice of the Neumann proxy on `[-L_master, L_master]`.
    pub master: LatticeSpec,
    pub domains: Vec<Domain>,
    pub times: Vec<f64>,
    pub xs: Vec<f64>,
    pub p: f64,
    pub n_reps: usize,
    pub base_seed: u64,
    pub coeffs: Coefficients,
    pub u0: InitialCondition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxyBound {
    #[serde(serialize_with = "json_f64")]
    pub t: f64,
    #[serde(serialize_with = "json_f64")]
    pub x: f64,
    /// `a_L(t, x)` at `L_master`; the proxy's own localization error scales with it.
    #[serde(rename = "bound_aL", serialize_with = "json_f64")]
    pub bound_al: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McOutcome {
    pub records: Vec<LocalizationRecord>,
    /// Replicates excluded because a solution blew up.
    pub flagged: usize,
    #[serde(rename = "L_master", serialize_with = "json_f64")]
    pub l_master: f64,
    pub proxy_bounds: Vec<ProxyBound>,
}

struct Prepared {
    subs: Vec<(Domain, LatticeSpec, usize)>,
    step_to_time: Vec<Option<usize>>,
    master_nodes: Vec<usize>,
    sub_nodes: Vec<Vec<usize>>,
}

impl McPlan {
    fn prepare(&self) -> Result<Prepared> {
        if !(self.p >= 1.0) || !self.p.is_finite() {
            return Err(config(format!("need finite p >= 1, got {}", self.p)));
        }
        if self.n_reps < 2 {
            return Err(config(format!("need n_reps >= 2, got {}", self.n_reps)));
        }
        if self.domains.is_empty() || self.times.is_empty() || self.xs.is_empty() {
            return Err(config("need at least one domain, time, and position"));
        }
        self.u0.validate()?;
        if let Some(spec) = self.coeffs.registry() {
            spec.validate()?;
        }
        let master = self.master;
        let mut subs = Vec::with_capacity(self.domains.len());
        for d in &self.domains {
            if !(d.l < master.l()) {
                return Err(config(format!(
                    "domain half-length {} must be below L_master = {}",
                    d.l,
                    master.l()
                )));
            }
            check_margin(master.l(), d.l, master.t_end())?;
            let lat = master.restrict(d.l)?;
            let offset = master.offset_of(&lat)?;
            subs.push((*d, lat, offset));
        }
        let mut step_to_time = vec![None; master.steps() + 1];
        for (k, &t) in self.times.iter().enumerate() {
            let i = master.step_index(t)?;
            if i == 0 {
                return Err(config("times must be positive"));
            }
            if step_to_time[i].replace(k).is_some() {
                return Err(config(format!("duplicate time {t}")));
            }
        }
        let master_nodes = self
            .xs
            .iter()
            .map(|&x| master.node_index(x))
            .collect::<Result<Vec<_>>>()?;
        let mut sub_nodes = Vec::with_capacity(subs.len());
        for (d, lat, _) in &subs {
            let mut nodes = Vec::with_capacity(self.xs.len());
            for &x in &self.xs {
                if !(x.abs() < d.l) {
                    return Err(config(format!("need |x| < L, got x = {x}, L = {}", d.l)));
                }
                nodes.push(lat.node_index(x)?);
            }
            sub_nodes.push(nodes);
        }
        Ok(Prepared {
            subs,
            step_to_time,
            master_nodes,
            sub_nodes,
        })
    }

    fn cells_per_replicate(&self) -> usize {
        self.domains.len() * self.times.len() * self.xs.len()
    }

    /// `|u - u_L|^p` at every record cell, or `None` if a solution blew up.
    fn replicate(&self, prep: &Prepared, r: usize) -> Result<Option<Vec<f64>>> {
        let noise = make_noise(self.base_seed, r as u64, self.master)?;
        let mut master = Stepper::new(BoundaryCondition::Neumann, self.master, &self.u0);
        let mut subs: Vec<Stepper> = prep
            .subs
            .iter()
            .map(|(d, lat, _)| Stepper::new(d.bc, *lat, &self.u0))
            .collect();
        let noisy = !self.coeffs.is_noiseless();
        let mut row = vec![0.0; self.master.cells()];
        let nt = self.times.len();
        let nx = self.xs.len();
        let mut out = vec![0.0; self.cells_per_replicate()];
        for i in 0..self.master.steps() {
            if noisy {
                noise.fill_row(i, &mut row)?;
            }
            let step = |s: &mut Stepper, slice: Option<&[f64]>| match s.step(&self.coeffs, slice) {
                Ok(()) => Ok(true),
                Err(Error::BlowUp { .. }) => Ok(false),
                Err(e) => Err(e),
            };
            if !step(&mut master, noisy.then_some(&row[..]))? {
                return Ok(None);
            }
            for (s, (_, lat, off)) in subs.iter_mut().zip(&prep.subs) {
                let slice = &row[*off..*off + lat.cells()];
                if !step(s, noisy.then_some(slice))? {
                    return Ok(None);
                }
            }
            if let Some(ti) = prep.step_to_time[i + 1] {
                let mv = master.values();
                for (di, s) in subs.iter().enumerate() {
                    let sv = s.values();
                    for xi in 0..nx {
                        let diff = mv[prep.master_nodes[xi]] - sv[prep.sub_nodes[di][xi]];
                        out[(di * nt + ti) * nx + xi] = diff.abs().powf(self.p);
                    }
                }
            }
        }
        Ok(Some(out))
    }

    /// Runs all replicates. Replicates execute in parallel on the current
    /// rayon pool; the reduction runs in replicate order, so results do not
    /// depend on the thread count.
    pub fn run(&self) -> Result<McOutcome> {
        let prep = self.prepare()?;
        // Without noise every replicate is the same deterministic solve.
        let per_rep: Vec<Result<Option<Vec<f64>>>> = if self.coeffs.is_noiseless() {
            let one = self.replicate(&prep, 0);
            (0..self.n_reps)
                .map(|_| match &one {
                    Ok(v) => Ok(v.clone()),
                    Err(e) => Err(Error::RunFailure(e.to_string())),
                })
                .collect()
        } else {
            (0..self.n_reps)
                .into_par_iter()
                .map(|r| self.replicate(&prep, r))
                .collect()
        };
        let mut kept = Vec::with_capacity(self.n_reps);
        let mut flagged = 0;
        for rep in per_rep {
            match rep? {
                Some(v) => kept.push(v),
                None => flagged += 1,
            }
        }
        if flagged as f64 > MAX_FLAGGED_FRACTION * self.n_reps as f64 || kept.len() < 2 {
            return Err(Error::RunFailure(format!(
                "{flagged} of {} replicates blew up",
                self.n_reps
            )));
        }
        let nt = self.times.len();
        let nx = self.xs.len();
        let mut records = Vec::with_capacity(self.cells_per_replicate());
        let mut column = vec![0.0; kept.len()];
        for (di, d) in self.domains.iter().enumerate() {
            for (ti, &t) in self.times.iter().enumerate() {
                for (xi, &x) in self.xs.iter().enumerate() {
                    let idx = (di * nt + ti) * nx + xi;
                    for (c, v) in column.iter_mut().zip(&kept) {
                        *c = v[idx];
                    }
                    let (error, std_error) = jackknife_lp(&column, self.p);
                    records.push(LocalizationRecord {
                        bc: d.bc,
                        l: d.l,
                        t,
                        x,
                        p: self.p,
                        error,
                        std_error,
                        bound_al: rate_factor_al(t, x, d.l)?,
                        exact_variance: None,
                        n_effective: kept.len(),
                        seed: self.base_seed,
                    });
                }
            }
        }
        let mut proxy_bounds = Vec::with_capacity(nt * nx);
        for &t in &self.times {
            for &x in &self.xs {
                proxy_bounds.push(ProxyBound {
                    t,
                    x,
                    bound_al: rate_factor_al(t, x, self.master.l())?,
                });
            }
        }
        Ok(McOutcome {
            records,
            flagged,
            l_master: self.master.l(),
            proxy_bounds,
        })
    }
}

/// `(mean(v)^{1/p}, jackknife standard error)` for samples `v = |X|^p`.
pub fn jackknife_lp(values: &[f64], p: f64) -> (f64, f64) {
    let n = values.len();
    let sum: f64 = values.iter().sum();
    let estimate = (sum / n as f64).max(0.0).powf(1.0 / p);
    if n < 2 {
        return (estimate, 0.0);
    }
    let loo = |v: f64| ((sum - v) / (n - 1) as f64).max(0.0).powf(1.0 / p);
    let mean_loo = values.iter().map(|&v| loo(v)).sum::<f64>() / n as f64;
    let ss: f64 = values
        .iter()
        .map(|&v| {
            let d = loo(v) - mean_loo;
            d * d
        })
        .sum();
    (estimate, ((n - 1) as f64 / n as f64 * ss).sqrt())
}

/// Single-domain convenience wrapper around [`McPlan::run`].
#[allow(clippy::too_many_arguments)]
pub fn mc_lp_error(
    bc: BoundaryCondition,
    l: f64,
    times: &[f64],
    xs: &[f64],
    p: f64,
    n_reps: usize,
    base_seed: u64,
    master: LatticeSpec,
    coeffs: &Coefficients,
    u0: &InitialCondition,
) -> Result<Vec<LocalizationRecord>> {
    let plan = McPlan {
        master,
        domains: vec![Domain { bc, l }],
        times: times.to_vec(),
        xs: xs.to_vec(),
        p,
        n_reps,
        base_seed,
        coeffs: coeffs.clone(),
        u0: *u0,
    };
    Ok(plan.run()?.records)
}

/// Runs a multi-domain plan.
pub fn mc_lp_errors(plan: &McPlan) -> Result<McOutcome> {
    plan.run()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jackknife_of_mean_is_standard_error() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        let (est, se) = jackknife_lp(&v, 1.0);
        assert!((est - 3.0).abs() < 1e-15);
        let sd = (2.5f64).sqrt();
        assert!((se - sd / 5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn jackknife_of_zeros() {
        assert_eq!(jackknife_lp(&[0.0; 10], 2.0), (0.0, 0.0));
    }
}
