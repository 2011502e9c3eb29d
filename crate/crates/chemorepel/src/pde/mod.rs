//! Finite-volume IMEX discretization of the full reaction-advection system
//! with zero-flux boundaries on unit-measure grids.
//!
//! Each step first advances the chemical implicitly in diffusion and decay
//! (the source explicit), then the cells: diffusion implicit, the
//! conservative chemotactic flux and reaction explicit, with the reaction
//! coupling evaluated against the fresh chemical. Upwinding the face flux by
//! the sign of the face velocity keeps the update an M-matrix and the
//! densities nonnegative under the advective CFL bound, which is re-checked
//! every step against the fresh chemical gradient.

pub mod linsolve;
pub mod order;

pub use linsolve::{conjugate_gradient, solve_tridiagonal};
pub use order::{diffusion_order_check, spatial_order_check};

use std::time::Instant;

use crate::diagnostics::{record, CumulativeAccumulator, CumulativeIntegrals, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::model::{integral, neumann_laplacian_into, Field, Grid, ModelParams, SourceSpec};
use crate::ode::{integrate_ode, OdeState};
use crate::tol::{CG_REL, NONNEG_SLACK, ODE_ABS_VERIFY, ODE_REL_VERIFY};

/// Cap on CFL-driven halvings of one nominal step.
const MAX_HALVINGS: u32 = 40;
/// Tolerance factor for the split identity max|w+z−v| ≤ tol·(1+max|v|).
const SPLIT_GAP_TOL: f64 = 1e-10;
/// Hard cap on steps per run, guarding runaway halving loops.
const MAX_RUN_STEPS: u64 = 50_000_000;

/// Discrete solution state. `w` and `z` are the optional split components
/// of the chemical; when present they satisfy w + z = v to solver tolerance.
#[derive(Debug, Clone)]
pub struct PdeState {
    pub u: Field,
    pub v: Field,
    pub w: Option<Field>,
    pub z: Option<Field>,
    pub t: f64,
}

impl PdeState {
    /// Wrap validated nonnegative initial data at t = 0.
    pub fn new(u: Field, v: Field, grid: &Grid) -> Result<PdeState> {
        for (f, name) in [(&u, "u"), (&v, "v")] {
            if f.len() != grid.cell_count() {
                return Err(Error::shape(format!(
                    "{name} has {} values but the grid has {} cells",
                    f.len(),
                    grid.cell_count()
                )));
            }
            if !f.min().is_finite() || !f.max().is_finite() {
                return Err(Error::numeric(format!("{name} contains non-finite values")));
            }
            if f.min() < 0.0 {
                return Err(Error::validation(format!(
                    "initial {name} must be nonnegative, min = {:e}",
                    f.min()
                )));
            }
        }
        Ok(PdeState { u, v, w: None, z: None, t: 0.0 })
    }

    /// Attach split components w = z = v/2.
    pub fn with_split(mut self) -> PdeState {
        let mut half = self.v.clone();
        for val in half.values_mut() {
            *val *= 0.5;
        }
        self.w = Some(half.clone());
        self.z = Some(half);
        self
    }

    /// Largest violation of the split identity, when tracking is on.
    pub fn split_gap(&self) -> Option<f64> {
        let (w, z) = (self.w.as_ref()?, self.z.as_ref()?);
        let gap = w
            .values()
            .iter()
            .zip(z.values())
            .zip(self.v.values())
            .map(|((wi, zi), vi)| (wi + zi - vi).abs())
            .fold(0.0, f64::max);
        Some(gap)
    }
}

/// Time-stepping controls. Diffusion and decay are always implicit
/// (backward Euler); advection is always explicit first-order upwind.
#[derive(Debug, Clone, Copy)]
pub struct SchemeConfig {
    /// Nominal time step.
    pub dt: f64,
    /// Fraction of the advective CFL bound the step may use, in (0, 1].
    pub cfl_safety: f64,
    /// Carry the w/z split components along the run.
    pub track_split: bool,
    /// Halve dt (up to a cap) when the CFL bound is violated instead of
    /// aborting.
    pub adaptive_dt: bool,
    /// Abort the run (keeping partial results) past this wall-clock budget.
    pub wall_limit_secs: Option<f64>,
}

impl SchemeConfig {
    pub fn new(dt: f64) -> Result<SchemeConfig> {
        let cfg = SchemeConfig {
            dt,
            cfl_safety: 0.5,
            track_split: false,
            adaptive_dt: true,
            wall_limit_secs: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::validation(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::validation(format!(
                "cfl_safety must lie in (0, 1], got {}",
                self.cfl_safety
            )));
        }
        if let Some(w) = self.wall_limit_secs {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::validation(format!("wall limit must be >= 0, got {w}")));
            }
        }
        Ok(())
    }
}

/// Result of one accepted step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: PdeState,
    /// Step actually taken (≤ the nominal dt when halving kicked in).
    pub dt_used: f64,
    pub halvings: u32,
}

/// Solve (shift·I − kappa·Δ_h) x = rhs with the zero-Neumann stencil:
/// direct tridiagonal elimination in 1D, conjugate gradients in 2D.
pub(crate) fn solve_helmholtz(
    grid: &Grid,
    shift: f64,
    kappa: f64,
    rhs: &[f64],
    guess: &[f64],
) -> Result<Vec<f64>> {
    if grid.dimension() == 1 {
        let n = grid.nx();
        let w = kappa / (grid.dx() * grid.dx());
        let off = vec![-w; n.saturating_sub(1)];
        let mut diag = vec![shift + 2.0 * w; n];
        diag[0] = shift + w;
        diag[n - 1] = shift + w;
        solve_tridiagonal(&off, &diag, &off, rhs)
    } else {
        let mut x = guess.to_vec();
        let mut lap = vec![0.0; rhs.len()];
        let mut apply = |v: &[f64], out: &mut [f64]| {
            neumann_laplacian_into(v, grid, &mut lap);
            for i in 0..v.len() {
                out[i] = shift * v[i] - kappa * lap[i];
            }
        };
        conjugate_gradient(&mut apply, rhs, &mut x, CG_REL, 10 * rhs.len() + 200)?;
        Ok(x)
    }
}

/// Conservative upwind divergence of the chemotactic flux chi·u·∇v.
/// Face flux is chi·(face gradient of v)·(upwind-donor u); the donor cell
/// sits downstream of the transport velocity −chi·∇v. Boundary faces carry
/// zero flux.
fn chemotaxis_term(u: &[f64], v_new: &[f64], grid: &Grid, chi: f64, out: &mut [f64]) {
    out.fill(0.0);
    if chi == 0.0 {
        return;
    }
    let (nx, ny) = (grid.nx(), grid.ny());
    let inv_dx = 1.0 / grid.dx();
    for j in 0..ny {
        for i in 0..nx - 1 {
            let a = grid.index(i, j);
            let b = grid.index(i + 1, j);
            let speed = chi * (v_new[b] - v_new[a]) * inv_dx;
            let donor = if speed > 0.0 { u[b] } else { u[a] };
            let flux = speed * donor;
            out[a] += flux * inv_dx;
            out[b] -= flux * inv_dx;
        }
    }
    if grid.dimension() == 2 {
        let inv_dy = 1.0 / grid.dy();
        for j in 0..ny - 1 {
            for i in 0..nx {
                let a = grid.index(i, j);
                let b = grid.index(i, j + 1);
                let speed = chi * (v_new[b] - v_new[a]) * inv_dy;
                let donor = if speed > 0.0 { u[b] } else { u[a] };
                let flux = speed * donor;
                out[a] += flux * inv_dy;
                out[b] -= flux * inv_dy;
            }
        }
    }
}

/// Largest stable step for the explicit upwind flux against the fresh
/// chemical gradient: safety·dx/max|chi ∂v/∂n|, per axis.
fn cfl_max_dt(v_new: &[f64], grid: &Grid, chi: f64, safety: f64) -> f64 {
    if chi == 0.0 {
        return f64::INFINITY;
    }
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut bound = f64::INFINITY;
    let mut max_gx: f64 = 0.0;
    let inv_dx = 1.0 / grid.dx();
    for j in 0..ny {
        for i in 0..nx - 1 {
            let g = (v_new[grid.index(i + 1, j)] - v_new[grid.index(i, j)]) * inv_dx;
            max_gx = max_gx.max((chi * g).abs());
        }
    }
    if max_gx > 0.0 {
        bound = bound.min(safety * grid.dx() / max_gx);
    }
    if grid.dimension() == 2 {
        let mut max_gy: f64 = 0.0;
        let inv_dy = 1.0 / grid.dy();
        for j in 0..ny - 1 {
            for i in 0..nx {
                let g = (v_new[grid.index(i, j + 1)] - v_new[grid.index(i, j)]) * inv_dy;
                max_gy = max_gy.max((chi * g).abs());
            }
        }
        if max_gy > 0.0 {
            bound = bound.min(safety * grid.dy() / max_gy);
        }
    }
    bound
}

fn check_step_field(values: &[f64], name: &str, t: f64) -> Result<()> {
    for (idx, &val) in values.iter().enumerate() {
        if !val.is_finite() {
            return Err(Error::numeric(format!(
                "non-finite {name} = {val} at cell {idx} after step to t = {t:.6e}"
            )));
        }
        if val < -NONNEG_SLACK {
            return Err(Error::numeric(format!(
                "positivity lost: {name} = {val:.6e} at cell {idx} after step to t = {t:.6e}"
            )));
        }
    }
    Ok(())
}

/// Advance one IMEX step of nominal size cfg.dt (possibly halved under the
/// CFL bound when adaptive stepping is on). Split components, when present,
/// advance with the same implicit operator as the chemical.
pub fn step(
    state: &PdeState,
    grid: &Grid,
    params: &ModelParams,
    spec: &SourceSpec,
    cfg: &SchemeConfig,
) -> Result<StepOutcome> {
    cfg.validate()?;
    let n = grid.cell_count();
    if state.u.len() != n || state.v.len() != n {
        return Err(Error::shape("state fields do not match the grid"));
    }
    let t = state.t;
    let f_now = spec.sample(grid, t)?;
    let u = state.u.values();
    let v = state.v.values();
    let (r, a, d, chi) = (params.r(), params.a(), params.d(), params.chi());

    let mut dt = cfg.dt;
    let mut halvings = 0u32;
    loop {
        // chemical update: implicit diffusion and decay, explicit source
        let rhs_v: Vec<f64> = (0..n).map(|i| v[i] + dt * (a * u[i] + f_now.values()[i])).collect();
        let v_new = solve_helmholtz(grid, 1.0 + dt, dt, &rhs_v, v)?;

        let max_dt = cfl_max_dt(&v_new, grid, chi, cfg.cfl_safety);
        if dt > max_dt {
            if cfg.adaptive_dt && halvings < MAX_HALVINGS {
                dt *= 0.5;
                halvings += 1;
                continue;
            }
            return Err(Error::Cfl { t, dt, max_dt });
        }

        // cell update: implicit diffusion, explicit flux and reaction
        let mut adv = vec![0.0; n];
        chemotaxis_term(u, &v_new, grid, chi, &mut adv);
        let rhs_u: Vec<f64> = (0..n)
            .map(|i| {
                let reaction = r * u[i] * (1.0 - u[i]) - u[i] * v_new[i];
                u[i] + dt * (adv[i] + reaction)
            })
            .collect();
        let u_new = solve_helmholtz(grid, 1.0, dt * d, &rhs_u, u)?;

        let t_next = t + dt;
        check_step_field(&u_new, "u", t_next)?;
        check_step_field(&v_new, "v", t_next)?;

        let (w_new, z_new) = match (&state.w, &state.z) {
            (Some(w), Some(z)) => {
                let rhs_w: Vec<f64> =
                    (0..n).map(|i| w.values()[i] + dt * a * u[i]).collect();
                let rhs_z: Vec<f64> =
                    (0..n).map(|i| z.values()[i] + dt * f_now.values()[i]).collect();
                let w_next = solve_helmholtz(grid, 1.0 + dt, dt, &rhs_w, w.values())?;
                let z_next = solve_helmholtz(grid, 1.0 + dt, dt, &rhs_z, z.values())?;
                let v_scale = 1.0 + v_new.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                for i in 0..n {
                    let gap = (w_next[i] + z_next[i] - v_new[i]).abs();
                    if gap > SPLIT_GAP_TOL * v_scale {
                        return Err(Error::numeric(format!(
                            "split identity violated at cell {i}: |w+z-v| = {gap:.3e}"
                        )));
                    }
                }
                (Some(w_next), Some(z_next))
            }
            _ => (None, None),
        };

        let next = PdeState {
            u: Field::from_values(grid, u_new)?,
            v: Field::from_values(grid, v_new)?,
            w: w_new.map(|vals| Field::from_values(grid, vals)).transpose()?,
            z: z_new.map(|vals| Field::from_values(grid, vals)).transpose()?,
            t: t_next,
        };
        return Ok(StepOutcome { state: next, dt_used: dt, halvings });
    }
}

/// Strict split-stepping entry point: requires tracking enabled and both
/// split components present.
pub fn step_split(
    state: &PdeState,
    grid: &Grid,
    params: &ModelParams,
    spec: &SourceSpec,
    cfg: &SchemeConfig,
) -> Result<StepOutcome> {
    if !cfg.track_split {
        return Err(Error::domain("split stepping requires track_split"));
    }
    if state.w.is_none() || state.z.is_none() {
        return Err(Error::domain("state carries no split components"));
    }
    step(state, grid, params, spec, cfg)
}

/// Discrete mass balance over one step: the conservative flux and Neumann
/// stencil make ∫u^{n+1} − ∫u^n − dt·∫(r u^n(1−u^n) − u^n v^{n+1}) vanish to
/// solver tolerance.
pub fn mass_balance_residual(
    before: &PdeState,
    after: &PdeState,
    grid: &Grid,
    params: &ModelParams,
    dt: f64,
) -> Result<f64> {
    let m0 = integral(&before.u, grid)?;
    let m1 = integral(&after.u, grid)?;
    let u0 = before.u.values();
    let v1 = after.v.values();
    if u0.len() != v1.len() {
        return Err(Error::shape("states live on different grids"));
    }
    let r = params.r();
    let mut reaction = 0.0;
    for i in 0..u0.len() {
        reaction += r * u0[i] * (1.0 - u0[i]) - u0[i] * v1[i];
    }
    reaction *= grid.cell_measure();
    Ok((m1 - m0 - dt * reaction).abs())
}

/// One sampled point of a run: the homogeneous reference state, the
/// diagnostics row, and the running integrals up to that time.
#[derive(Debug, Clone)]
pub struct RunSample {
    pub reference: OdeState,
    pub record: DiagnosticsRecord,
    pub cumulative: CumulativeIntegrals,
}

/// Everything a finished (or aborted) run hands back. `failure` holds the
/// abort cause when the run stopped early; the samples gathered so far stay
/// valid either way.
#[derive(Debug)]
pub struct RunOutcome {
    pub samples: Vec<RunSample>,
    pub final_state: PdeState,
    pub failure: Option<Error>,
    pub steps: u64,
}

impl RunOutcome {
    /// Series of (t, value) pairs extracted from the records.
    pub fn series(&self, pick: impl Fn(&DiagnosticsRecord) -> f64) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.record.t, pick(&s.record))).collect()
    }
}

/// Advance the system to `t_end`, sampling diagnostics every `sample_every`
/// time units (plus the initial state and the exact final time). The
/// homogeneous reference trajectory is co-integrated from the initial
/// masses. Step-level failures abort the run but keep the partial samples.
pub fn run(
    initial: PdeState,
    grid: &Grid,
    params: &ModelParams,
    spec: &SourceSpec,
    cfg: &SchemeConfig,
    t_end: f64,
    sample_every: f64,
) -> Result<RunOutcome> {
    cfg.validate()?;
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::validation(format!("t_end must be > 0, got {t_end}")));
    }
    if !(sample_every.is_finite() && sample_every > 0.0 && sample_every <= t_end) {
        return Err(Error::validation(format!(
            "sample_every must lie in (0, t_end], got {sample_every}"
        )));
    }
    if initial.t != 0.0 {
        return Err(Error::domain(format!("runs start at t = 0, got t = {}", initial.t)));
    }

    let mut state =
        if cfg.track_split && initial.w.is_none() { initial.with_split() } else { initial };

    // sample schedule: k·sample_every capped by t_end, then t_end itself
    let mut targets: Vec<f64> = Vec::new();
    let mut k = 1u64;
    loop {
        let tk = k as f64 * sample_every;
        if tk >= t_end - 0.5 * sample_every.min(cfg.dt) {
            break;
        }
        targets.push(tk);
        k += 1;
    }
    targets.push(t_end);

    let ode_init =
        OdeState::new(integral(&state.u, grid)?, integral(&state.v, grid)?, 0.0)?;
    let ode_traj =
        integrate_ode(&ode_init, params, spec, t_end, &targets, ODE_REL_VERIFY, ODE_ABS_VERIFY)?;
    debug_assert_eq!(ode_traj.samples.len(), targets.len() + 1);

    let time_tol = 0.5 * cfg.dt;
    let snap = 1e-6 * cfg.dt;
    let mut acc = CumulativeAccumulator::new();
    let mut samples = Vec::with_capacity(targets.len() + 1);

    let rec0 = record(&state.u, &state.v, 0.0, &ode_traj.samples[0], spec, grid, time_tol)?;
    let cum0 = acc.push(&rec0, spec.inhomogeneity_l1(grid, 0.0)?)?;
    samples.push(RunSample { reference: ode_traj.samples[0], record: rec0, cumulative: cum0 });

    let clock = Instant::now();
    let mut steps: u64 = 0;
    let mut failure: Option<Error> = None;

    'outer: for (idx, &target) in targets.iter().enumerate() {
        while state.t < target - snap {
            if let Some(limit) = cfg.wall_limit_secs {
                if clock.elapsed().as_secs_f64() >= limit {
                    failure = Some(Error::Timeout { limit_secs: limit, t: state.t });
                    break 'outer;
                }
            }
            if steps >= MAX_RUN_STEPS {
                failure =
                    Some(Error::numeric(format!("step budget exhausted at t = {:.6e}", state.t)));
                break 'outer;
            }
            let mut local = *cfg;
            local.dt = cfg.dt.min(target - state.t);
            match step(&state, grid, params, spec, &local) {
                Ok(out) => {
                    state = out.state;
                    steps += 1;
                }
                Err(e) => {
                    failure = Some(e);
                    break 'outer;
                }
            }
        }
        state.t = target;
        let reference = ode_traj.samples[idx + 1];
        let rec = record(&state.u, &state.v, state.t, &reference, spec, grid, time_tol)?;
        let cum = acc.push(&rec, spec.inhomogeneity_l1(grid, state.t)?)?;
        samples.push(RunSample { reference, record: rec, cumulative: cum });
    }

    Ok(RunOutcome { samples, final_state: state, failure, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PeriodicSignal;

    fn params(d: f64, chi: f64, r: f64, a: f64) -> ModelParams {
        ModelParams::new(d, chi, r, a).unwrap()
    }

    fn uniform_state(grid: &Grid, u0: f64, v0: f64) -> PdeState {
        PdeState::new(Field::constant(grid, u0), Field::constant(grid, v0), grid).unwrap()
    }

    #[test]
    fn zero_state_is_a_fixed_point() {
        let g = Grid::line(16).unwrap();
        let p = params(1.0, 1.0, 2.0, 1.0);
        let spec = SourceSpec::constant(0.0).unwrap();
        let cfg = SchemeConfig::new(1e-2).unwrap();
        let mut state = uniform_state(&g, 0.0, 0.0);
        for _ in 0..10 {
            state = step(&state, &g, &p, &spec, &cfg).unwrap().state;
        }
        assert_eq!(state.u.max(), 0.0);
        assert_eq!(state.v.max(), 0.0);
    }

    #[test]
    fn uniform_equilibrium_is_stationary() {
        let g = Grid::line(32).unwrap();
        let p = params(1.0, 1.0, 2.0, 1.0);
        let spec = SourceSpec::constant(1.0).unwrap();
        let cfg = SchemeConfig::new(1e-2).unwrap();
        let mut state = uniform_state(&g, 1.0 / 3.0, 4.0 / 3.0);
        for _ in 0..20 {
            let next = step(&state, &g, &p, &spec, &cfg).unwrap().state;
            let du = next
                .u
                .values()
                .iter()
                .zip(state.u.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            let dv = next
                .v
                .values()
                .iter()
                .zip(state.v.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(du <= 1e-10 && dv <= 1e-10, "drift per step: du={du:e} dv={dv:e}");
            state = next;
        }
    }

    #[test]
    fn uniform_data_follows_the_mean_system() {
        // spatially constant data with homogeneous supply: the PDE collapses
        // to the mean system; first order in dt
        let g = Grid::line(8).unwrap();
        let p = params(1.0, 1.0, 2.0, 1.0);
        let spec = SourceSpec::constant(1.0).unwrap();
        let mut errs = Vec::new();
        for dt in [2e-3, 1e-3] {
            let cfg = SchemeConfig::new(dt).unwrap();
            let out = run(uniform_state(&g, 0.5, 0.5), &g, &p, &spec, &cfg, 1.0, 0.5).unwrap();
            assert!(out.failure.is_none());
            let last = out.samples.last().unwrap();
            // stays spatially constant
            let spread = out.final_state.u.max() - out.final_state.u.min();
            assert!(spread <= 1e-12, "uniformity lost: {spread:e}");
            errs.push((last.record.mass_u - last.reference.u_tilde).abs());
        }
        assert!(errs[0] > errs[1], "no improvement under dt halving: {errs:?}");
        let ratio = errs[0] / errs[1];
        assert!(ratio >= 1.7, "convergence in dt below first order: ratio {ratio}");
    }

    #[test]
    fn positivity_and_mass_balance_over_random_data() {
        let g = Grid::line(48).unwrap();
        let p = params(0.5, 3.0, 2.0, 1.0);
        let sig = PeriodicSignal { mean_level: 1.0, amplitude: 0.25, period: 1.0, phase: 0.0 };
        let spec = SourceSpec::homogeneous_periodic(sig).unwrap();
        let init = crate::initial::InitialData::RandomSmooth {
            u_base: 0.6,
            v_base: 0.9,
            epsilon: 0.15,
            seed: 7,
        }
        .materialize(&g)
        .unwrap();
        let cfg = SchemeConfig::new(1e-3).unwrap();
        let mut state = PdeState::new(init.0, init.1, &g).unwrap();
        for _ in 0..50 {
            let out = step(&state, &g, &p, &spec, &cfg).unwrap();
            let res = mass_balance_residual(&state, &out.state, &g, &p, out.dt_used).unwrap();
            let m = integral(&state.u, &g).unwrap();
            assert!(res <= 1e-12 * (1.0 + m), "mass residual {res:e}");
            assert!(out.state.u.min() >= -1e-12);
            assert!(out.state.v.min() >= -1e-12);
            state = out.state;
        }
    }

    #[test]
    fn split_components_track_the_chemical() {
        let g = Grid::line(24).unwrap();
        let p = params(1.0, 1.0, 2.0, 1.0);
        let spec = SourceSpec::constant(1.0).unwrap();
        let cfg = SchemeConfig { track_split: true, ..SchemeConfig::new(1e-2).unwrap() };
        let mut state = uniform_state(&g, 0.4, 0.8).with_split();
        for _ in 0..2000 {
            state = step_split(&state, &g, &p, &spec, &cfg).unwrap().state;
            let gap = state.split_gap().unwrap();
            let scale = 1.0 + state.v.max().abs();
            assert!(gap <= 1e-10 * scale);
        }
        // long-run limits of the split pieces: w -> a·u, z -> f
        let u_end = state.u.values()[0];
        let w_end = state.w.as_ref().unwrap().values()[0];
        let z_end = state.z.as_ref().unwrap().values()[0];
        assert!((w_end - p.a() * u_end).abs() <= 1e-2, "w = {w_end}, a*u = {}", p.a() * u_end);
        assert!((z_end - 1.0).abs() <= 1e-2, "z = {z_end}");
    }

    #[test]
    fn split_heat_decay_superposition() {
        // a = 0, f = 0: w and z halve the chemical and decay identically
        let g = Grid::line(16).unwrap();
        let p = params(1.0, 0.0, 1.0, 0.0);
        let spec = SourceSpec::constant(0.0).unwrap();
        let cfg = SchemeConfig { track_split: true, ..SchemeConfig::new(1e-2).unwrap() };
        let v0 = Field::from_fn(&g, |x, _| 1.0 + 0.3 * (std::f64::consts::PI * x).cos());
        let mut state =
            PdeState::new(Field::constant(&g, 0.0), v0, &g).unwrap().with_split();
        for _ in 0..30 {
            state = step(&state, &g, &p, &spec, &cfg).unwrap().state;
        }
        let w = state.w.as_ref().unwrap();
        let z = state.z.as_ref().unwrap();
        for i in 0..g.cell_count() {
            assert!((w.values()[i] - z.values()[i]).abs() <= 1e-14);
            assert!((w.values()[i] - 0.5 * state.v.values()[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn cfl_violation_without_adaptive_stepping_is_an_error() {
        let g = Grid::line(64).unwrap();
        let p = params(1.0, 50.0, 2.0, 1.0);
        let spec = SourceSpec::constant(1.0).unwrap();
        let v0 = Field::from_fn(&g, |x, _| 1.0 + (std::f64::consts::PI * x).cos());
        let state = PdeState::new(Field::constant(&g, 0.5), v0, &g).unwrap();
        let cfg = SchemeConfig { adaptive_dt: false, ..SchemeConfig::new(0.05).unwrap() };
        match step(&state, &g, &p, &spec, &cfg) {
            Err(Error::Cfl { max_dt, .. }) => assert!(max_dt < 0.05),
            other => panic!("expected CFL error, got {other:?}"),
        }
        // the adaptive path takes the same step by halving
        let cfg_adaptive = SchemeConfig { adaptive_dt: true, ..cfg };
        let out = step(&state, &g, &p, &spec, &cfg_adaptive).unwrap();
        assert!(out.halvings >= 1);
        assert!(out.dt_used < 0.05);
    }

    #[test]
    fn run_samples_on_schedule() {
        let g = Grid::line(8).unwrap();
        let p = params(1.0, 1.0, 2.0, 1.0);
        let spec = SourceSpec::constant(1.0).unwrap();
        let cfg = SchemeConfig::new(1e-2).unwrap();
        let out = run(uniform_state(&g, 0.5, 0.5), &g, &p, &spec, &cfg, 1.0, 0.3).unwrap();
        let times: Vec<f64> = out.samples.iter().map(|s| s.record.t).collect();
        let expected = [0.0, 0.3, 0.6, 0.9, 1.0];
        assert_eq!(times.len(), expected.len(), "times: {times:?}");
        for (got, want) in times.iter().zip(expected) {
            assert!((got - want).abs() <= 1e-12, "times: {times:?}");
        }
        assert!(out.failure.is_none());
        assert_eq!(out.final_state.t, 1.0);
        // cumulative integrals are monotone along the run
        for pair in out.samples.windows(2) {
            assert!(pair[1].cumulative.int_k1 >= pair[0].cumulative.int_k1);
        }
    }

    #[test]
    fn wall_clock_guard_keeps_partial_results() {
        let g = Grid::line(8).unwrap();
        let p = params(1.0, 1.0, 2.0, 1.0);
        let spec = SourceSpec::constant(1.0).unwrap();
        let cfg =
            SchemeConfig { wall_limit_secs: Some(0.0), ..SchemeConfig::new(1e-3).unwrap() };
        let out = run(uniform_state(&g, 0.5, 0.5), &g, &p, &spec, &cfg, 5.0, 1.0).unwrap();
        assert!(matches!(out.failure, Some(Error::Timeout { .. })));
        assert!(!out.samples.is_empty());
    }

    #[test]
    fn two_dimensional_equilibrium_is_stationary() {
        let g = Grid::rect(8, 8, 1.0).unwrap();
        let p = params(1.0, 1.0, 2.0, 1.0);
        let spec = SourceSpec::constant(1.0).unwrap();
        let cfg = SchemeConfig { track_split: true, ..SchemeConfig::new(1e-2).unwrap() };
        let state = uniform_state(&g, 1.0 / 3.0, 4.0 / 3.0).with_split();
        let next = step(&state, &g, &p, &spec, &cfg).unwrap().state;
        for (a, b) in next.u.values().iter().zip(state.u.values()) {
            assert!((a - b).abs() <= 1e-10);
        }
        for (a, b) in next.v.values().iter().zip(state.v.values()) {
            assert!((a - b).abs() <= 1e-10);
        }
        assert!(next.split_gap().unwrap() <= 1e-10 * (1.0 + next.v.max()));
    }

    #[test]
    fn two_dimensional_perturbation_decays() {
        // mild cosine bump on a 2D grid relaxes toward the equilibrium
        let g = Grid::rect(16, 16, 1.0).unwrap();
        let p = params(1.0, 1.0, 4.0, 1.0);
        let spec = SourceSpec::constant(1.0).unwrap();
        let cfg = SchemeConfig::new(1e-2).unwrap();
        let (u_star, v_star) = (3.0 / 5.0, 8.0 / 5.0);
        let u0 = Field::from_fn(&g, |x, y| {
            u_star
                * (1.0
                    + 0.1
                        * (std::f64::consts::TAU * x).cos()
                        * (std::f64::consts::TAU * y).cos())
        });
        let state = PdeState::new(u0, Field::constant(&g, v_star), &g).unwrap();
        let out = run(state, &g, &p, &spec, &cfg, 20.0, 5.0).unwrap();
        assert!(out.failure.is_none());
        let first_k1 = out.samples[0].record.k1;
        let last_k1 = out.samples.last().unwrap().record.k1;
        assert!(last_k1 < 1e-8 * first_k1.max(1e-30), "k1 did not decay: {last_k1:e}");
    }

    #[test]
    fn step_split_requires_the_components() {
        let g = Grid::line(8).unwrap();
        let p = params(1.0, 1.0, 2.0, 1.0);
        let spec = SourceSpec::constant(1.0).unwrap();
        let cfg = SchemeConfig { track_split: true, ..SchemeConfig::new(1e-2).unwrap() };
        let state = uniform_state(&g, 0.5, 0.5);
        assert!(step_split(&state, &g, &p, &spec, &cfg).is_err());
    }
}
