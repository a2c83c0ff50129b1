//! Brownian increments from counter-based per-path streams.
//!
//! Path `i` draws from a ChaCha8 stream keyed by `(seed, i)`, so the array is
//! identical regardless of how paths are scheduled across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::grid::TimeGrid;
use crate::error::{Error, Result};

/// Stream ids with the top bit set are reserved for auxiliary draws (initial
/// states) so they never collide with increment streams.
const AUX_STREAM: u64 = 1 << 63;

pub(crate) fn path_stream(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64);
    rng
}

pub(crate) fn aux_stream(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(AUX_STREAM | path as u64);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct BrownianDriver {
    increments: Vec<f64>,
    n_paths: usize,
    n_steps: usize,
    dim_w: usize,
    dt: f64,
    seed: u64,
}

impl BrownianDriver {
    /// Wraps externally supplied increments (e.g. a lattice surrogate).
    /// Layout is `[path][step][component]`.
    pub fn from_increments(
        increments: Vec<f64>,
        n_paths: usize,
        grid: &TimeGrid,
        dim_w: usize,
        seed: u64,
    ) -> Result<Self> {
        if n_paths == 0 || dim_w == 0 {
            return Err(Error::InvalidParameter("driver needs at least one path and one Brownian component".into()));
        }
        let expected = n_paths * grid.n_steps() * dim_w;
        if increments.len() != expected {
            return Err(Error::DimensionMismatch(format!("expected {expected} increments, got {}", increments.len())));
        }
        Ok(Self { increments, n_paths, n_steps: grid.n_steps(), dim_w, dt: grid.dt(), seed })
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dim_w(&self) -> usize {
        self.dim_w
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.n_paths, self.n_steps, self.dim_w]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.increments
    }

    /// Increment `Δw_k` of path `i`, length `dim_w`.
    #[inline]
    pub fn increment(&self, path: usize, step: usize) -> &[f64] {
        let start = (path * self.n_steps + step) * self.dim_w;
        &self.increments[start..start + self.dim_w]
    }

    pub fn path(&self, path: usize) -> &[f64] {
        let len = self.n_steps * self.dim_w;
        &self.increments[path * len..(path + 1) * len]
    }

    pub(crate) fn compatible_with(&self, grid: &TimeGrid) -> bool {
        self.n_steps == grid.n_steps() && (self.dt - grid.dt()).abs() <= 1e-15 * grid.dt()
    }
}

/// Draws `Δw ~ N(0, Δt)` per path, step and component.
pub fn sample_brownian(grid: &TimeGrid, n_paths: usize, dim_w: usize, seed: u64) -> Result<BrownianDriver> {
    if n_paths == 0 || dim_w == 0 {
        return Err(Error::InvalidParameter("driver needs at least one path and one Brownian component".into()));
    }
    let per_path = grid.n_steps() * dim_w;
    let scale = grid.dt().sqrt();
    let mut increments = vec![0.0; n_paths * per_path];
    increments.par_chunks_mut(per_path).enumerate().for_each(|(i, chunk)| {
        let mut rng = path_stream(seed, i);
        for v in chunk.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v = scale * z;
        }
    });
    Ok(BrownianDriver { increments, n_paths, n_steps: grid.n_steps(), dim_w, dt: grid.dt(), seed })
}

/// Uniform `[0, 1)` draw from an arbitrary generator; used by samplers.
pub fn unit_uniform(rng: &mut dyn RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
