//! Finite-difference Monte Carlo solver for the stochastic heat equation on
//! `[-L, L]`, with noise coupled across nested domains.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::BoundaryCondition;

pub mod coefficients;
pub mod lattice;
pub mod montecarlo;
pub mod noise;
pub mod scheme;
pub mod variance;

pub use coefficients::{CoefficientSpec, Coefficients, InitialCondition};
pub use lattice::{check_margin, proxy_half_length, LatticeSpec};
pub use montecarlo::{
    jackknife_lp, mc_lp_error, mc_lp_errors, Domain, LocalizationRecord, McOutcome, McPlan,
    ProxyBound,
};
pub use noise::{make_noise, NoiseField};
pub use scheme::Stepper;
pub use variance::{linear_variance_exact, linear_variance_exact_with};

/// Values `u(t_i, x_j)` on every lattice point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionField {
    pub lattice: LatticeSpec,
    pub bc: BoundaryCondition,
    values: Vec<f64>,
}

impl SolutionField {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.lattice.nodes() + j]
    }

    /// Values at step `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.lattice.nodes();
        &self.values[i * n..(i + 1) * n]
    }

    /// Value at a lattice point given in physical coordinates.
    pub fn value(&self, t: f64, x: f64) -> Result<f64> {
        Ok(self.at(self.lattice.step_index(t)?, self.lattice.node_index(x)?))
    }

    /// Writes `t,x,value` rows for each snapshot time.
    pub fn write_csv(&self, path: &Path, times: &[f64]) -> Result<()> {
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let steps = times
            .iter()
            .map(|&t| self.lattice.step_index(t))
            .collect::<Result<Vec<_>>>()?;
        let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        writeln!(out, "t,x,value").map_err(io)?;
        for i in steps {
            for j in 0..self.lattice.nodes() {
                writeln!(
                    out,
                    "{:.16e},{:.16e},{:.16e}",
                    self.lattice.time(i),
                    self.lattice.x(j),
                    self.at(i, j)
                )
                .map_err(io)?;
            }
        }
        out.flush().map_err(io)
    }
}

fn check_noise(lattice: &LatticeSpec, noise: &NoiseField) -> Result<()> {
    let n = noise.lattice();
    let same = n.cells() == lattice.cells()
        && n.steps() == lattice.steps()
        && n.dx() == lattice.dx()
        && n.dt() == lattice.dt()
        && (n.l() - lattice.l()).abs() <= 1e-9 * lattice.l();
    if !same {
        return Err(Error::Shape(format!(
            "noise lattice {n:?} does not match solver lattice {lattice:?}"
        )));
    }
    Ok(())
}

/// Solves on `[-L, L]` with boundary condition `bc`, driven by `noise`.
pub fn solve(
    bc: BoundaryCondition,
    lattice: LatticeSpec,
    coeffs: &Coefficients,
    u0: &InitialCondition,
    noise: &NoiseField,
) -> Result<SolutionField> {
    check_noise(&lattice, noise)?;
    let mut stepper = Stepper::new(bc, lattice, u0);
    let n = lattice.nodes();
    let mut values = Vec::with_capacity((lattice.steps() + 1) * n);
    values.extend_from_slice(stepper.values());
    let mut row = vec![0.0; lattice.cells()];
    let noisy = !coeffs.is_noiseless();
    for i in 0..lattice.steps() {
        if noisy {
            noise.fill_row(i, &mut row)?;
        }
        stepper.step(coeffs, noisy.then_some(&row[..]))?;
        values.extend_from_slice(stepper.values());
    }
    Ok(SolutionField {
        lattice,
        bc,
        values,
    })
}

/// Whole-line stand-in: a Neumann solve on `[-L_master, L_master]`, which
/// must satisfy `L_master >= l_target + 6 sqrt(T)`.
pub fn solve_line_proxy(
    master: LatticeSpec,
    l_target: f64,
    coeffs: &Coefficients,
    u0: &InitialCondition,
    noise: &NoiseField,
) -> Result<SolutionField> {
    check_margin(master.l(), l_target, master.t_end())?;
    solve(BoundaryCondition::Neumann, master, coeffs, u0, noise)
}
