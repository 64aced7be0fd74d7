use std::f64::consts::PI;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lattice::LatticeSpec;
use crate::error::{Error, Result};

/// Keeps negative cell keys addressable as unsigned word positions.
const KEY_OFFSET: i64 = 1 << 50;
const WORDS_PER_DEVIATE: u128 = 4;

/// Space-time white noise on a lattice, as one standard normal per cell and step.
///
/// The deviate of cell `[x_j, x_j + dx] x [t_i, t_i + dt]` depends only on
/// `(seed, replicate, i, x_j)`, so restricted views and parallel replicates
/// see identical values on shared cells. The increment of `W` over the cell
/// is the deviate times `sqrt(dt dx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseField {
    seed: u64,
    replicate: u64,
    master: LatticeSpec,
    window: LatticeSpec,
}

/// Noise over the whole master lattice for one replicate.
pub fn make_noise(seed: u64, replicate: u64, master: LatticeSpec) -> Result<NoiseField> {
    let left = master.left_key();
    if left.unsigned_abs() >= (KEY_OFFSET as u64) / 2 {
        return Err(Error::Capacity(format!(
            "lattice half-length {} / dx {} overflows the noise index space",
            master.l(),
            master.dx()
        )));
    }
    Ok(NoiseField {
        seed,
        replicate,
        master,
        window: master,
    })
}

impl NoiseField {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replicate(&self) -> u64 {
        self.replicate
    }

    pub fn master(&self) -> &LatticeSpec {
        &self.master
    }

    /// The lattice this view covers.
    pub fn lattice(&self) -> &LatticeSpec {
        &self.window
    }

    /// View over the centered sub-lattice of half-length `l_sub`.
    pub fn restrict(&self, l_sub: f64) -> Result<NoiseField> {
        let window = self.window.restrict(l_sub)?;
        Ok(NoiseField {
            window,
            ..self.clone()
        })
    }

    fn rng(&self, step: usize, first_cell: usize) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.replicate.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        let left = self.window.left_key();
        let parity = left.rem_euclid(2);
        let n = (left - parity) / 2 + first_cell as i64 + KEY_OFFSET;
        rng.set_stream(2 * step as u64 + parity as u64);
        rng.set_word_pos(WORDS_PER_DEVIATE * n as u128);
        rng
    }

    fn check_step(&self, step: usize) -> Result<()> {
        if step >= self.window.steps() {
            return Err(Error::Shape(format!(
                "noise step {step} outside 0..{}",
                self.window.steps()
            )));
        }
        Ok(())
    }

    /// Fills `out` with the deviates of every cell of step `step`.
    pub fn fill_row(&self, step: usize, out: &mut [f64]) -> Result<()> {
        self.check_step(step)?;
        if out.len() != self.window.cells() {
            return Err(Error::Shape(format!(
                "noise row has {} cells, buffer has {}",
                self.window.cells(),
                out.len()
            )));
        }
        let mut rng = self.rng(step, 0);
        for v in out.iter_mut() {
            *v = standard_normal(&mut rng);
        }
        Ok(())
    }

    /// Deviate of a single cell.
    pub fn deviate(&self, step: usize, cell: usize) -> Result<f64> {
        self.check_step(step)?;
        if cell >= self.window.cells() {
            return Err(Error::Shape(format!(
                "noise cell {cell} outside 0..{}",
                self.window.cells()
            )));
        }
        Ok(standard_normal(&mut self.rng(step, cell)))
    }
}

/// Box-Muller cosine branch. Consumes exactly two `u64`, which keeps every
/// deviate at a fixed word position.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    let u1 = ((rng.next_u64() >> 11) as f64 + 1.0) * SCALE;
    let u2 = (rng.next_u64() >> 11) as f64 * SCALE;
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}
