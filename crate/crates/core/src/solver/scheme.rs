use super::coefficients::{Coefficients, InitialCondition};
use super::lattice::LatticeSpec;
use crate::error::{Error, Result};
use crate::kernels::BoundaryCondition;

/// Semi-implicit Euler stepper for one domain.
///
/// Each step solves `(I - dt D) delta = dt D u + sigma(u) eta + dt b(u)` and
/// sets `u += delta`, where `D` is the second-difference operator with the
/// boundary stencil and `eta` the nodal white-noise load. Dirichlet rows pin
/// the value to 0; Neumann rows mirror the ghost value. Solving for the
/// increment keeps `u = const` exact under Neumann conditions.
#[derive(Debug, Clone)]
pub struct Stepper {
    bc: BoundaryCondition,
    lattice: LatticeSpec,
    lambda: f64,
    noise_scale: f64,
    lower: Vec<f64>,
    upper_eliminated: Vec<f64>,
    inv_pivot: Vec<f64>,
    u: Vec<f64>,
    rhs: Vec<f64>,
    step: usize,
}

impl Stepper {
    pub fn new(bc: BoundaryCondition, lattice: LatticeSpec, u0: &InitialCondition) -> Self {
        let n = lattice.nodes();
        let lambda = lattice.dt() / (lattice.dx() * lattice.dx());
        let (left_pinned, right_pinned) = pinned(bc);
        let mut lower = vec![-lambda; n];
        let mut diag = vec![1.0 + 2.0 * lambda; n];
        let mut upper = vec![-lambda; n];
        lower[0] = 0.0;
        upper[n - 1] = 0.0;
        if left_pinned {
            diag[0] = 1.0;
            upper[0] = 0.0;
        } else {
            upper[0] = -2.0 * lambda;
        }
        if right_pinned {
            diag[n - 1] = 1.0;
            lower[n - 1] = 0.0;
        } else {
            lower[n - 1] = -2.0 * lambda;
        }
        let mut upper_eliminated = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut prev = 0.0;
        for j in 0..n {
            let pivot = diag[j] - lower[j] * prev;
            inv_pivot[j] = 1.0 / pivot;
            prev = upper[j] * inv_pivot[j];
            upper_eliminated[j] = prev;
        }
        let u = (0..n).map(|j| u0.eval(lattice.x(j))).collect();
        Self {
            bc,
            lattice,
            lambda,
            noise_scale: (lattice.dt() / lattice.dx()).sqrt(),
            lower,
            upper_eliminated,
            inv_pivot,
            u,
            rhs: vec![0.0; n],
            step: 0,
        }
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    /// Number of completed steps.
    pub fn steps_done(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.lattice.time(self.step)
    }

    pub fn values(&self) -> &[f64] {
        &self.u
    }

    /// Replaces the current values, for example to start from data outside
    /// the initial-condition registry.
    pub fn set_values(&mut self, u: &[f64]) -> Result<()> {
        if u.len() != self.u.len() {
            return Err(Error::Shape(format!(
                "expected {} values, got {}",
                self.u.len(),
                u.len()
            )));
        }
        self.u.copy_from_slice(u);
        Ok(())
    }

    /// Advances one step. `noise` holds one deviate per cell and may be
    /// `None` only when `sigma` vanishes.
    pub fn step(&mut self, coeffs: &Coefficients, noise: Option<&[f64]>) -> Result<()> {
        let n = self.u.len();
        let m = n - 1;
        if let Some(xi) = noise {
            if xi.len() != m {
                return Err(Error::Shape(format!(
                    "noise row has {} cells, lattice has {m}",
                    xi.len()
                )));
            }
        }
        let t = self.time();
        let dt = self.lattice.dt();
        let lambda = self.lambda;
        let (left_pinned, right_pinned) = pinned(self.bc);
        let u = &self.u;
        let load = |j: usize| -> f64 {
            let Some(xi) = noise else { return 0.0 };
            let cells = if j == 0 {
                xi[0]
            } else if j == m {
                xi[m - 1]
            } else {
                0.5 * (xi[j - 1] + xi[j])
            };
            cells * self.noise_scale
        };
        let forcing = |j: usize| -> f64 {
            let x = self.lattice.x(j);
            let s = if noise.is_some() {
                coeffs.sigma(t, x, u[j]) * load(j)
            } else {
                0.0
            };
            s + dt * coeffs.drift(t, x, u[j])
        };
        self.rhs[0] = if left_pinned {
            -u[0]
        } else {
            2.0 * lambda * (u[1] - u[0]) + forcing(0)
        };
        for j in 1..m {
            self.rhs[j] = lambda * (u[j - 1] - 2.0 * u[j] + u[j + 1]) + forcing(j);
        }
        self.rhs[m] = if right_pinned {
            -u[m]
        } else {
            2.0 * lambda * (u[m - 1] - u[m]) + forcing(m)
        };

        let d = &mut self.rhs;
        d[0] *= self.inv_pivot[0];
        for j in 1..n {
            d[j] = (d[j] - self.lower[j] * d[j - 1]) * self.inv_pivot[j];
        }
        for j in (0..m).rev() {
            d[j] -= self.upper_eliminated[j] * d[j + 1];
        }
        let mut finite = true;
        for (uj, dj) in self.u.iter_mut().zip(d.iter()) {
            *uj += dj;
            finite &= uj.is_finite();
        }
        self.step += 1;
        if !finite {
            return Err(Error::BlowUp { step: self.step });
        }
        debug_assert!(!left_pinned || self.u[0] == 0.0);
        debug_assert!(!right_pinned || self.u[m] == 0.0);
        Ok(())
    }
}

fn pinned(bc: BoundaryCondition) -> (bool, bool) {
    match bc {
        BoundaryCondition::Dirichlet => (true, true),
        BoundaryCondition::Mixed => (true, false),
        BoundaryCondition::Neumann => (false, false),
    }
}
