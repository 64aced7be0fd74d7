use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{prepare_output, Status};
use crate::error::{config, Error, Result};
use crate::kernels::{green, BoundaryCondition, GreenEvaluator};
use crate::numfmt::sci;
use crate::quadrature::Quadrature;
use crate::solver::{
    make_noise, solve, CoefficientSpec, Coefficients, InitialCondition, LatticeSpec, SolutionField,
};

const ORACLE_RULE: Quadrature = Quadrature {
    abs_tol: 1e-14,
    rel_tol: 1e-10,
    max_intervals: 2000,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateOutput {
    pub solution: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub seed: u64,
    #[serde(default)]
    pub replicate: u64,
    pub bc: BoundaryCondition,
    #[serde(rename = "L")]
    pub l: f64,
    pub dx: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Snapshot times; defaults to the final time.
    #[serde(default)]
    pub snapshots: Vec<f64>,
    /// Add the heat-semigroup column `int G(t, x, y) u0(y) dy` when the
    /// coefficients vanish.
    #[serde(default)]
    pub oracle: bool,
    /// Fail when the largest oracle gap exceeds this value.
    #[serde(default)]
    pub oracle_tolerance: Option<f64>,
    pub coefficients: CoefficientSpec,
    pub initial: InitialCondition,
    pub output: SimulateOutput,
}

impl SimulateConfig {
    pub fn validate(&self) -> Result<()> {
        self.coefficients.validate()?;
        self.initial.validate()?;
        if self.oracle && self.coefficients != CoefficientSpec::Zero {
            return Err(config("the oracle column needs zero coefficients"));
        }
        if self.oracle_tolerance.is_some() && !self.oracle {
            return Err(config("oracle_tolerance needs oracle = true"));
        }
        Ok(())
    }

    pub fn snapshot_times(&self) -> Vec<f64> {
        if self.snapshots.is_empty() {
            vec![self.t_end]
        } else {
            self.snapshots.clone()
        }
    }
}

/// `int_{-L}^{L} G_L(t, x, y) u0(y) dy`, or `u0(x)` at `t = 0`.
pub fn semigroup_oracle(ev: &GreenEvaluator, u0: &InitialCondition, t: f64, x: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(u0.eval(x));
    }
    let l = ev.l();
    let mut failure = None;
    let est = ORACLE_RULE.integrate_with_breaks(
        |y| match green(ev, t, x, y) {
            Ok(g) => g * u0.eval(y),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        -l,
        l,
        &[x.clamp(-l, l)],
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(est.value),
    }
}

fn write_solution(
    path: &Path,
    field: &SolutionField,
    steps: &[usize],
    oracle: Option<&[Vec<f64>]>,
) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let lattice = field.lattice;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    let header = if oracle.is_some() {
        "t,x,value,oracle"
    } else {
        "t,x,value"
    };
    writeln!(out, "{header}").map_err(io)?;
    for (s, &i) in steps.iter().enumerate() {
        for j in 0..lattice.nodes() {
            write!(
                out,
                "{},{},{}",
                sci(lattice.time(i)),
                sci(lattice.x(j)),
                sci(field.at(i, j))
            )
            .map_err(io)?;
            if let Some(o) = oracle {
                write!(out, ",{}", sci(o[s][j])).map_err(io)?;
            }
            writeln!(out).map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

pub fn run(cfg: &SimulateConfig) -> Result<Status> {
    cfg.validate()?;
    let lattice = LatticeSpec::new(cfg.l, cfg.dx, cfg.t_end, cfg.dt)?;
    let steps = cfg
        .snapshot_times()
        .iter()
        .map(|&t| lattice.step_index(t))
        .collect::<Result<Vec<_>>>()?;
    let noise = make_noise(cfg.seed, cfg.replicate, lattice)?;
    let coeffs = Coefficients::from(cfg.coefficients);
    let field = solve(cfg.bc, lattice, &coeffs, &cfg.initial, &noise)?;

    let mut status = Status::Pass;
    let oracle = if cfg.oracle {
        let ev = GreenEvaluator::new(cfg.l, cfg.bc)?;
        let mut rows = Vec::with_capacity(steps.len());
        let mut worst: f64 = 0.0;
        for &i in &steps {
            let t = lattice.time(i);
            let row = (0..lattice.nodes())
                .map(|j| semigroup_oracle(&ev, &cfg.initial, t, lattice.x(j)))
                .collect::<Result<Vec<_>>>()?;
            for (j, o) in row.iter().enumerate() {
                worst = worst.max((field.at(i, j) - o).abs());
            }
            rows.push(row);
        }
        println!("largest gap to the semigroup oracle: {worst:.3e}");
        if let Some(tol) = cfg.oracle_tolerance {
            if !(worst <= tol) {
                println!("FAIL oracle gap {worst:.3e} exceeds {tol:.3e}");
                status = Status::Fail;
            }
        }
        Some(rows)
    } else {
        None
    };
    prepare_output(&cfg.output.solution)?;
    write_solution(&cfg.output.solution, &field, &steps, oracle.as_deref())?;
    println!(
        "wrote {} snapshot(s) of {} nodes to {}",
        steps.len(),
        lattice.nodes(),
        cfg.output.solution.display()
    );
    Ok(status)
}
