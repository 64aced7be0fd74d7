//! Space-time grids, sampled fields, and the discrete `*` convolution.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{domain, Error, Result};

/// Uniform grid on `]0, T] x [x_min, x_max]` with the origin on a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimeGrid {
    pub t_end: f64,
    pub dt: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    nt: usize,
    nx: usize,
    origin: usize,
}

fn integer_ratio(num: f64, den: f64, what: &str) -> Result<usize> {
    let r = num / den;
    let n = r.round();
    if !(n >= 1.0) || (r - n).abs() > 1e-9 * n.max(1.0) {
        return Err(domain(format!(
            "{what} must be a positive integer, got {r}"
        )));
    }
    Ok(n as usize)
}

impl SpaceTimeGrid {
    pub fn new(t_end: f64, dt: f64, x_min: f64, x_max: f64, dx: f64) -> Result<Self> {
        if !(dt > 0.0 && dx > 0.0 && t_end > 0.0) || !(x_max > x_min) {
            return Err(domain(
                "grid needs positive steps, horizon, and x_min < x_max",
            ));
        }
        let nt = integer_ratio(t_end, dt, "T/dt")?;
        let cells = integer_ratio(x_max - x_min, dx, "(x_max - x_min)/dx")?;
        if x_min > 0.0 || x_max < 0.0 {
            return Err(domain("grid must contain x = 0"));
        }
        let origin = (-x_min / dx).round();
        if (origin - (-x_min / dx)).abs() > 1e-9 * origin.max(1.0) {
            return Err(domain("x = 0 must be a grid node"));
        }
        Ok(Self {
            t_end,
            dt,
            x_min,
            x_max,
            dx,
            nt,
            nx: cells + 1,
            origin: origin as usize,
        })
    }

    /// Grid on `[-half_width, half_width]`.
    pub fn symmetric(t_end: f64, dt: f64, half_width: f64, dx: f64) -> Result<Self> {
        Self::new(t_end, dt, -half_width, half_width, dx)
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Index of the node at `x = 0`.
    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.dx
    }

    /// Time of row `i` under the given sampling.
    pub fn time(&self, i: usize, sampling: Sampling) -> f64 {
        match sampling {
            Sampling::Midpoint => (i as f64 + 0.5) * self.dt,
            Sampling::EndPoint => (i as f64 + 1.0) * self.dt,
        }
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.nt == other.nt
            && self.nx == other.nx
            && self.origin == other.origin
            && (self.dt - other.dt).abs() <= 1e-12 * self.dt
            && (self.dx - other.dx).abs() <= 1e-12 * self.dx
    }
}

/// Which time each row of a field represents: cell midpoints `(i + 1/2) dt`
/// or right cell ends `(i + 1) dt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    Midpoint,
    EndPoint,
}

/// Values on a [`SpaceTimeGrid`], stored row-major by time.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub grid: SpaceTimeGrid,
    pub sampling: Sampling,
    pub data: Vec<f64>,
}

impl GridField {
    pub fn zeros(grid: SpaceTimeGrid, sampling: Sampling) -> Self {
        Self {
            grid,
            sampling,
            data: vec![0.0; grid.nt * grid.nx],
        }
    }

    /// Samples `f(t, x)` at the grid's rows and nodes.
    pub fn sample<F>(grid: SpaceTimeGrid, sampling: Sampling, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let mut data = vec![0.0; grid.nt * grid.nx];
        data.par_chunks_mut(grid.nx)
            .enumerate()
            .for_each(|(i, row)| {
                let t = grid.time(i, sampling);
                for (k, v) in row.iter_mut().enumerate() {
                    *v = f(t, grid.x(k));
                }
            });
        Self {
            grid,
            sampling,
            data,
        }
    }

    pub fn at(&self, i: usize, k: usize) -> f64 {
        self.data[i * self.grid.nx + k]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.grid.nx..(i + 1) * self.grid.nx]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `self + c * other`, requiring matching grids and sampling.
    pub fn axpy(&mut self, c: f64, other: &GridField) -> Result<()> {
        self.check_compatible(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> GridField {
        GridField {
            grid: self.grid,
            sampling: self.sampling,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    fn check_compatible(&self, other: &GridField) -> Result<()> {
        if !self.grid.same_shape(&other.grid) {
            return Err(Error::Shape("fields live on different grids".into()));
        }
        if self.sampling != other.sampling {
            return Err(Error::Shape("fields use different time sampling".into()));
        }
        Ok(())
    }

    /// Re-samples an end-point field at cell midpoints by averaging
    /// neighbouring rows. The first cell has no left neighbour and takes the
    /// value at `dt`, which keeps positivity and spatial mass.
    pub fn to_midpoint(&self) -> GridField {
        if self.sampling == Sampling::Midpoint {
            return self.clone();
        }
        let nx = self.grid.nx;
        let nt = self.grid.nt;
        let mut data = vec![0.0; nt * nx];
        data[..nx].copy_from_slice(&self.data[..nx]);
        for i in 1..nt {
            for k in 0..nx {
                data[i * nx + k] = 0.5 * (self.data[(i - 1) * nx + k] + self.data[i * nx + k]);
            }
        }
        GridField {
            grid: self.grid,
            sampling: Sampling::Midpoint,
            data,
        }
    }
}

/// Discrete space-time convolution `(f * g)(t_n, x_k)` with `t_n = (n + 1) dt`:
/// `dt dx sum_{j <= n} sum_l f[n - j][k - l + o] g[j][l]`, where `o` is the
/// origin index. Values outside the grid count as zero.
///
/// Inputs must be sampled at midpoints; the result is sampled at end points.
pub fn convolve_st(f: &GridField, g: &GridField) -> Result<GridField> {
    check_convolvable(f, g)?;
    let work = f.grid.nt * f.grid.nt * f.grid.nx;
    if work <= 200_000 {
        convolve_st_direct(f, g)
    } else {
        Ok(Convolver::new(g)?.apply(f)?)
    }
}

fn check_convolvable(f: &GridField, g: &GridField) -> Result<()> {
    f.check_compatible(g)?;
    if f.sampling != Sampling::Midpoint {
        return Err(Error::Shape(
            "convolution inputs must be midpoint-sampled".into(),
        ));
    }
    Ok(())
}

/// Direct evaluation of [`convolve_st`], parallel over output rows.
pub fn convolve_st_direct(f: &GridField, g: &GridField) -> Result<GridField> {
    check_convolvable(f, g)?;
    let grid = f.grid;
    let (nt, nx, o) = (grid.nt, grid.nx, grid.origin as isize);
    let scale = grid.dt * grid.dx;
    let mut out = vec![0.0; nt * nx];
    out.par_chunks_mut(nx).enumerate().for_each(|(n, row)| {
        for (k, slot) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..=n {
                let fr = f.row(n - j);
                let gr = g.row(j);
                for (l, &gv) in gr.iter().enumerate() {
                    let idx = k as isize - l as isize + o;
                    if idx >= 0 && (idx as usize) < nx {
                        acc += fr[idx as usize] * gv;
                    }
                }
            }
            *slot = scale * acc;
        }
    });
    Ok(GridField {
        grid,
        sampling: Sampling::EndPoint,
        data: out,
    })
}

fn fast_size(min: usize) -> usize {
    let mut n = min.max(1);
    loop {
        let mut m = n;
        for p in [2, 3, 5] {
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        if m == 1 {
            return n;
        }
        n += 1;
    }
}

/// FFT-based convolution against a fixed kernel field, reusable across inputs.
pub struct Convolver {
    grid: SpaceTimeGrid,
    pt: usize,
    px: usize,
    fwd_t: Arc<dyn Fft<f64>>,
    inv_t: Arc<dyn Fft<f64>>,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    kernel_hat: Vec<Complex64>,
}

impl Convolver {
    pub fn new(kernel: &GridField) -> Result<Self> {
        if kernel.sampling != Sampling::Midpoint {
            return Err(Error::Shape(
                "convolution kernel must be midpoint-sampled".into(),
            ));
        }
        let grid = kernel.grid;
        let pt = fast_size(2 * grid.nt - 1);
        let px = fast_size(2 * grid.nx - 1);
        let mut planner = FftPlanner::<f64>::new();
        let mut conv = Self {
            grid,
            pt,
            px,
            fwd_t: planner.plan_fft_forward(pt),
            inv_t: planner.plan_fft_inverse(pt),
            fwd_x: planner.plan_fft_forward(px),
            inv_x: planner.plan_fft_inverse(px),
            kernel_hat: Vec::new(),
        };
        conv.kernel_hat = conv.forward(kernel);
        Ok(conv)
    }

    /// Padded 2-D transform, returned in column-major (space-index outer) layout.
    fn forward(&self, field: &GridField) -> Vec<Complex64> {
        let (nt, pt, px) = (self.grid.nt, self.pt, self.px);
        let mut rows = vec![Complex64::new(0.0, 0.0); nt * px];
        rows.par_chunks_mut(px).enumerate().for_each(|(i, row)| {
            for (slot, &v) in row.iter_mut().zip(field.row(i)) {
                *slot = Complex64::new(v, 0.0);
            }
            self.fwd_x.process(row);
        });
        let mut cols = vec![Complex64::new(0.0, 0.0); px * pt];
        cols.par_chunks_mut(pt).enumerate().for_each(|(k, col)| {
            for i in 0..nt {
                col[i] = rows[i * px + k];
            }
            self.fwd_t.process(col);
        });
        cols
    }

    /// `field * kernel` in the sense of [`convolve_st`].
    pub fn apply(&self, field: &GridField) -> Result<GridField> {
        if !self.grid.same_shape(&field.grid) || field.sampling != Sampling::Midpoint {
            return Err(Error::Shape(
                "field does not match the convolver grid".into(),
            ));
        }
        let (nt, nx, pt, px, o) = (
            self.grid.nt,
            self.grid.nx,
            self.pt,
            self.px,
            self.grid.origin,
        );
        let mut cols = self.forward(field);
        cols.par_chunks_mut(pt)
            .zip(self.kernel_hat.par_chunks(pt))
            .for_each(|(col, ker)| {
                for (a, b) in col.iter_mut().zip(ker) {
                    *a *= b;
                }
                self.inv_t.process(col);
            });
        let scale = self.grid.dt * self.grid.dx / (pt * px) as f64;
        let mut data = vec![0.0; nt * nx];
        data.par_chunks_mut(nx).enumerate().for_each(|(n, out)| {
            let mut row: Vec<Complex64> = (0..px).map(|k| cols[k * pt + n]).collect();
            self.inv_x.process(&mut row);
            for (k, slot) in out.iter_mut().enumerate() {
                *slot = row[k + o].re * scale;
            }
        });
        Ok(GridField {
            grid: self.grid,
            sampling: Sampling::EndPoint,
            data,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> SpaceTimeGrid {
        SpaceTimeGrid::symmetric(0.2, 0.02, 1.0, 0.1).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(SpaceTimeGrid::new(1.0, 0.3, -1.0, 1.0, 0.1).is_err());
        assert!(SpaceTimeGrid::new(1.0, 0.1, 0.05, 1.05, 0.1).is_err());
        assert!(SpaceTimeGrid::new(1.0, 0.1, -0.05, 0.95, 0.1).is_err());
        let g = small_grid();
        assert_eq!((g.nt(), g.nx(), g.origin()), (10, 21, 10));
    }

    #[test]
    fn delta_column_shifts_in_time() {
        let grid = small_grid();
        let f = GridField::sample(grid, Sampling::Midpoint, |t, x| {
            (t + 1.0) * (-(x * x)).exp()
        });
        let mut delta = GridField::zeros(grid, Sampling::Midpoint);
        delta.data[grid.origin()] = 1.0 / (grid.dt * grid.dx);
        let out = convolve_st_direct(&f, &delta).unwrap();
        for (a, b) in out.data.iter().zip(&f.data) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn fft_matches_direct_and_commutes() {
        let grid = SpaceTimeGrid::new(0.3, 0.02, -1.0, 1.4, 0.1).unwrap();
        let f = GridField::sample(grid, Sampling::Midpoint, |t, x| (t * 3.0).sin() + x * x);
        let g = GridField::sample(grid, Sampling::Midpoint, |t, x| {
            (-(x - 0.2).powi(2) / t).exp()
        });
        let direct = convolve_st_direct(&f, &g).unwrap();
        let swapped = convolve_st_direct(&g, &f).unwrap();
        let fft = Convolver::new(&g).unwrap().apply(&f).unwrap();
        let scale = direct.max_abs();
        for ((a, b), c) in direct.data.iter().zip(&swapped.data).zip(&fft.data) {
            assert!((a - b).abs() <= 1e-12 * scale);
            assert!((a - c).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = GridField::zeros(small_grid(), Sampling::Midpoint);
        let b = GridField::zeros(
            SpaceTimeGrid::symmetric(0.2, 0.02, 1.0, 0.05).unwrap(),
            Sampling::Midpoint,
        );
        assert!(matches!(convolve_st(&a, &b), Err(Error::Shape(_))));
        let c = GridField::zeros(small_grid(), Sampling::EndPoint);
        assert!(matches!(convolve_st(&c, &c), Err(Error::Shape(_))));
    }

    #[test]
    fn midpoint_conversion_is_exact_for_linear_in_time() {
        let grid = small_grid();
        let node = GridField::sample(grid, Sampling::EndPoint, |t, x| 2.0 * t + x.abs());
        let mid = node.to_midpoint();
        let exact = GridField::sample(grid, Sampling::Midpoint, |t, x| 2.0 * t + x.abs());
        let nx = grid.nx();
        for (a, b) in mid.data[nx..].iter().zip(&exact.data[nx..]) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(mid.row(0), node.row(0));
    }
}
