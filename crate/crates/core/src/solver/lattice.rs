use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};

const ALIGN_TOL: f64 = 1e-9;

fn integer_ratio(num: f64, den: f64, what: &str) -> Result<usize> {
    let r = num / den;
    let n = r.round();
    if !(n >= 1.0) || (r - n).abs() > ALIGN_TOL * n.max(1.0) {
        return Err(Error::Alignment(format!(
            "{what}: {num} is not an integer multiple of {den}"
        )));
    }
    if n > (1u64 << 40) as f64 {
        return Err(Error::Capacity(format!(
            "{what}: {n} points exceed the index space"
        )));
    }
    Ok(n as usize)
}

/// Uniform space-time lattice on `[-L, L] x [0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    l: f64,
    dx: f64,
    t_end: f64,
    dt: f64,
    m: usize,
    nt: usize,
}

impl LatticeSpec {
    /// Requires `2L/dx` and `T/dt` to be integers and `dt <= dx`.
    pub fn new(l: f64, dx: f64, t_end: f64, dt: f64) -> Result<Self> {
        for (name, v) in [("L", l), ("dx", dx), ("T", t_end), ("dt", dt)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(config(format!("lattice needs {name} > 0, got {v}")));
            }
        }
        if dt > dx * (1.0 + ALIGN_TOL) {
            return Err(config(format!(
                "lattice needs dt <= dx, got dt = {dt}, dx = {dx}"
            )));
        }
        let m = integer_ratio(2.0 * l, dx, "2L/dx")?;
        let nt = integer_ratio(t_end, dt, "T/dt")?;
        Ok(Self {
            l,
            dx,
            t_end,
            dt,
            m,
            nt,
        })
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of cells; nodes are `0..=m`.
    pub fn cells(&self) -> usize {
        self.m
    }

    pub fn nodes(&self) -> usize {
        self.m + 1
    }

    pub fn steps(&self) -> usize {
        self.nt
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.l + j as f64 * self.dx
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    /// Node index of `x`, which must lie on the lattice.
    pub fn node_index(&self, x: f64) -> Result<usize> {
        let r = (x + self.l) / self.dx;
        let j = r.round();
        if !(j >= 0.0 && j <= self.m as f64) || (r - j).abs() > ALIGN_TOL * (1.0 + j) {
            return Err(Error::Alignment(format!(
                "x = {x} is not a node of the lattice on [-{l}, {l}] with dx = {dx}",
                l = self.l,
                dx = self.dx
            )));
        }
        Ok(j as usize)
    }

    /// Step index of `t`, which must be a multiple of `dt` in `[0, T]`.
    pub fn step_index(&self, t: f64) -> Result<usize> {
        let r = t / self.dt;
        let i = r.round();
        if !(i >= 0.0 && i <= self.nt as f64) || (r - i).abs() > ALIGN_TOL * (1.0 + i) {
            return Err(Error::Alignment(format!(
                "t = {t} is not a step of the lattice with dt = {dt} and T = {te}",
                dt = self.dt,
                te = self.t_end
            )));
        }
        Ok(i as usize)
    }

    /// Position of the left edge of cell 0 in units of `dx / 2`.
    pub(crate) fn left_key(&self) -> i64 {
        (-2.0 * self.l / self.dx).round() as i64
    }

    /// Centered sub-lattice with half-length `l_sub`, sharing `dx`, `dt`, and `T`.
    pub fn restrict(&self, l_sub: f64) -> Result<Self> {
        if !(l_sub > 0.0) || l_sub > self.l * (1.0 + ALIGN_TOL) {
            return Err(Error::Alignment(format!(
                "sub-domain half-length {l_sub} must lie in (0, {}]",
                self.l
            )));
        }
        let shift = (self.l - l_sub) / self.dx;
        if (shift - shift.round()).abs() > ALIGN_TOL * (1.0 + shift.abs()) {
            return Err(Error::Alignment(format!(
                "L_master - L_sub = {} is not a multiple of dx = {}",
                self.l - l_sub,
                self.dx
            )));
        }
        Self::new(l_sub, self.dx, self.t_end, self.dt)
    }

    /// Offset of the sub-lattice's node 0 within this lattice.
    pub fn offset_of(&self, sub: &LatticeSpec) -> Result<usize> {
        self.node_index(-sub.l)
    }
}

/// Smallest lattice-aligned master half-length obeying `L_master >= L_target + 6 sqrt(T)`.
///
/// Alignment means `L_master - L_target` is a multiple of `dx`.
pub fn proxy_half_length(l_target: f64, t_end: f64, dx: f64) -> f64 {
    let margin = 6.0 * t_end.sqrt();
    let k = (margin / dx - ALIGN_TOL).ceil();
    l_target + k * dx
}

/// Checks the margin rule for a proxy domain.
pub fn check_margin(l_master: f64, l_target: f64, t_end: f64) -> Result<()> {
    let need = l_target + 6.0 * t_end.sqrt();
    if l_master < need * (1.0 - ALIGN_TOL) {
        return Err(config(format!(
            "proxy half-length {l_master} violates the margin rule L_master >= {need}"
        )));
    }
    Ok(())
}
