//! Closed-form initial-data families for the PDE runs.
//!
//! All families are smooth and compatible with the zero-flux boundary:
//! the perturbations are built from cos(k pi x / Lx) (and the matching
//! y-factor in 2D), whose normal derivative vanishes at the walls.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Field, Grid};

/// Number of cosine modes drawn by the random-smooth family.
pub const RANDOM_MODES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// Spatially uniform (u0, v0).
    Constant { u0: f64, v0: f64 },
    /// base * (1 + epsilon cos(2 pi mode x / Lx)) in x (times the analogous
    /// cosine in y for 2D grids), applied to both components.
    CosinePerturbed { u_base: f64, v_base: f64, epsilon: f64, mode: u32 },
    /// base + truncated cosine series with seeded coefficients drawn
    /// uniformly from [-epsilon, epsilon], one independent series per
    /// component and per axis.
    RandomSmooth { u_base: f64, v_base: f64, epsilon: f64, seed: u64 },
}

impl InitialData {
    /// Evaluate the family on a grid. Fails if either component can dip
    /// below zero: the model assumes nonnegative data.
    pub fn materialize(&self, grid: &Grid) -> Result<(Field, Field)> {
        let (u, v) = match *self {
            InitialData::Constant { u0, v0 } => {
                (Field::constant(grid, u0), Field::constant(grid, v0))
            }
            InitialData::CosinePerturbed { u_base, v_base, epsilon, mode } => {
                let shape = cosine_bump(grid, mode);
                let u = scaled(grid, &shape, u_base, epsilon);
                let v = scaled(grid, &shape, v_base, epsilon);
                (u, v)
            }
            InitialData::RandomSmooth { u_base, v_base, epsilon, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let u = random_series(grid, u_base, epsilon, &mut rng);
                let v = random_series(grid, v_base, epsilon, &mut rng);
                (u, v)
            }
        };
        for (name, field) in [("u0", &u), ("v0", &v)] {
            let min = field.min();
            if !min.is_finite() || min < 0.0 {
                return Err(Error::validation(format!(
                    "initial data {name} dips to {min:.6e}; the model requires nonnegative data (reduce epsilon or raise the base level)"
                )));
            }
        }
        Ok((u, v))
    }
}

fn cosine_bump(grid: &Grid, mode: u32) -> Field {
    let kx = 2.0 * PI * mode as f64 / grid.lx();
    let ky = 2.0 * PI * mode as f64 / grid.ly();
    let two_d = grid.dimension() == 2;
    Field::from_fn(grid, |x, y| {
        let fx = (kx * x).cos();
        if two_d {
            fx * (ky * y).cos()
        } else {
            fx
        }
    })
}

fn scaled(grid: &Grid, shape: &Field, base: f64, epsilon: f64) -> Field {
    Field::from_values(
        grid,
        shape.values().iter().map(|s| base * (1.0 + epsilon * s)).collect(),
    )
    .expect("shape sampled on the same grid")
}

fn random_series(grid: &Grid, base: f64, epsilon: f64, rng: &mut ChaCha8Rng) -> Field {
    let coeff = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..RANDOM_MODES)
            .map(|_| if epsilon > 0.0 { rng.random_range(-epsilon..=epsilon) } else { 0.0 })
            .collect()
    };
    let cx = coeff(rng);
    let cy = if grid.dimension() == 2 { coeff(rng) } else { Vec::new() };
    let lx = grid.lx();
    let ly = grid.ly();
    Field::from_fn(grid, |x, y| {
        let mut s = base;
        for (k, c) in cx.iter().enumerate() {
            s += c * ((k + 1) as f64 * PI * x / lx).cos();
        }
        for (k, c) in cy.iter().enumerate() {
            s += c * ((k + 1) as f64 * PI * y / ly).cos();
        }
        s
    })
}
