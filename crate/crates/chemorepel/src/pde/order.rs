//! Grid-refinement order checks for the spatial discretization.
//!
//! Two entry points: a pure-diffusion check against the exact cosine-decay
//! solution (the reaction-free limit lies outside the validated model
//! parameter domain, so it runs a dedicated scalar stepper on the same
//! stencil and solver), and a full-system Richardson self-convergence check
//! under grid doubling. Both refine with dt proportional to dx squared, so
//! the first-order time error scales like the second-order space error and
//! the observed order lands near two on smooth data.

use crate::error::{Error, Result};
use crate::initial::InitialData;
use crate::model::{Grid, ModelParams, SourceSpec};
use crate::pde::{solve_helmholtz, step, PdeState, SchemeConfig};

/// Coarsest grid in the refinement ladder.
const BASE_CELLS: usize = 32;
/// dt = DT_FACTOR·dx² on each level.
const DT_FACTOR: f64 = 0.2;
/// Horizon for the pure-diffusion check; e^{−π²·0.1} ≈ 0.37 leaves a strong
/// signal in the decaying mode.
const DIFFUSION_T_FINAL: f64 = 0.1;
/// Horizon for the full-system check; long enough for the coupling terms to
/// act, short enough that the transient has not flattened out.
const FULL_T_FINAL: f64 = 0.5;

fn require_levels(refinement_levels: usize) -> Result<()> {
    if refinement_levels < 3 {
        return Err(Error::Inconclusive(format!(
            "order estimation needs at least 3 refinement levels, got {refinement_levels}"
        )));
    }
    Ok(())
}

/// Observed order from a ladder of error measures, one per level. Errors
/// must decrease strictly; the returned order comes from the finest pair.
fn observed_order(errors: &[f64]) -> Result<f64> {
    for pair in errors.windows(2) {
        if !(pair[1] < pair[0]) {
            return Err(Error::Inconclusive(format!(
                "errors are not monotone under refinement: {errors:?}"
            )));
        }
    }
    let n = errors.len();
    Ok((errors[n - 2] / errors[n - 1]).log2())
}

fn steps_for(t_final: f64, dt_nominal: f64) -> (usize, f64) {
    let steps = (t_final / dt_nominal).round().max(1.0) as usize;
    (steps, t_final / steps as f64)
}

/// Convergence order of the diffusion discretization alone, measured against
/// the exact heat-decay solution u(x,t) = 1 + e^{−dπ²t}·cos(πx) on grids
/// N, 2N, 4N, ... with backward-Euler steps dt ∝ dx².
pub fn diffusion_order_check(d: f64, refinement_levels: usize) -> Result<f64> {
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::validation(format!("diffusion coefficient must be > 0, got {d}")));
    }
    require_levels(refinement_levels)?;
    let pi = std::f64::consts::PI;
    let mut errors = Vec::with_capacity(refinement_levels);
    for level in 0..refinement_levels {
        let n = BASE_CELLS << level;
        let grid = Grid::line(n)?;
        let dx = grid.dx();
        let (steps, dt) = steps_for(DIFFUSION_T_FINAL, DT_FACTOR * dx * dx);
        let mut u: Vec<f64> = (0..n)
            .map(|i| {
                let (x, _) = grid.cell_center(i);
                1.0 + (pi * x).cos()
            })
            .collect();
        for _ in 0..steps {
            u = solve_helmholtz(&grid, 1.0, dt * d, &u, &u)?;
        }
        let decay = (-d * pi * pi * DIFFUSION_T_FINAL).exp();
        let mut err: f64 = 0.0;
        for (i, &val) in u.iter().enumerate() {
            let (x, _) = grid.cell_center(i);
            err = err.max((val - (1.0 + decay * (pi * x).cos())).abs());
        }
        errors.push(err);
    }
    observed_order(&errors)
}

/// Average fine-grid cell pairs down to the coarse grid (the exact
/// finite-volume restriction in 1D).
fn restrict_halving(fine: &[f64]) -> Vec<f64> {
    fine.chunks_exact(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect()
}

fn full_system_solution(
    n: usize,
    params: &ModelParams,
    spec: &SourceSpec,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let grid = Grid::line(n)?;
    let dx = grid.dx();
    let (steps, dt) = steps_for(FULL_T_FINAL, DT_FACTOR * dx * dx);
    let data = InitialData::CosinePerturbed { u_base: 0.5, v_base: 0.8, epsilon: 0.2, mode: 1 };
    let (u0, v0) = data.materialize(&grid)?;
    let mut state = PdeState::new(u0, v0, &grid)?;
    let cfg = SchemeConfig { adaptive_dt: false, ..SchemeConfig::new(dt)? };
    for _ in 0..steps {
        state = step(&state, &grid, params, spec, &cfg)?.state;
    }
    Ok((state.u.values().to_vec(), state.v.values().to_vec()))
}

/// Richardson self-convergence order of the coupled scheme on a fixed smooth
/// scenario (cosine-perturbed data, caller-chosen parameters, grids
/// N, 2N, 4N, ... with dt ∝ dx²). Successive solutions are compared after
/// restriction to the coarser grid; the error measure is the larger of the
/// two componentwise sup norms.
pub fn spatial_order_check(
    params: &ModelParams,
    spec: &SourceSpec,
    refinement_levels: usize,
) -> Result<f64> {
    require_levels(refinement_levels)?;
    let mut solutions = Vec::with_capacity(refinement_levels);
    for level in 0..refinement_levels {
        solutions.push(full_system_solution(BASE_CELLS << level, params, spec)?);
    }
    let mut diffs = Vec::with_capacity(refinement_levels - 1);
    for pair in solutions.windows(2) {
        let (coarse_u, coarse_v) = &pair[0];
        let ru = restrict_halving(&pair[1].0);
        let rv = restrict_halving(&pair[1].1);
        let du = coarse_u.iter().zip(&ru).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
        let dv = coarse_v.iter().zip(&rv).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
        diffs.push(du.max(dv));
    }
    observed_order(&diffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_diffusion_is_second_order() {
        let order = diffusion_order_check(1.0, 3).unwrap();
        assert!((order - 2.0).abs() <= 0.2, "observed order {order}");
    }

    #[test]
    fn full_system_is_at_least_three_halves_order() {
        let params = ModelParams::new(1.0, 0.5, 2.0, 1.0).unwrap();
        let spec = SourceSpec::constant(1.0).unwrap();
        let order = spatial_order_check(&params, &spec, 3).unwrap();
        assert!(order >= 1.5, "observed order {order}");
    }

    #[test]
    fn too_few_levels_is_inconclusive() {
        match diffusion_order_check(1.0, 1) {
            Err(Error::Inconclusive(_)) => {}
            other => panic!("expected inconclusive, got {other:?}"),
        }
        let params = ModelParams::new(1.0, 0.5, 2.0, 1.0).unwrap();
        let spec = SourceSpec::constant(1.0).unwrap();
        assert!(matches!(spatial_order_check(&params, &spec, 2), Err(Error::Inconclusive(_))));
    }

    #[test]
    fn non_monotone_errors_are_inconclusive() {
        assert!(matches!(observed_order(&[1e-3, 2e-3, 1e-4]), Err(Error::Inconclusive(_))));
        assert!(matches!(observed_order(&[1e-3, 1e-3, 1e-4]), Err(Error::Inconclusive(_))));
    }

    #[test]
    fn observed_order_of_a_clean_quadratic_ladder() {
        let order = observed_order(&[4e-2, 1e-2, 2.5e-3]).unwrap();
        assert!((order - 2.0).abs() <= 1e-12);
    }
}
