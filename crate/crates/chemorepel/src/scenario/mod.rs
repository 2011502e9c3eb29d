//! Scenario orchestration: turn a parsed config into runs, graded checks
//! and output files.
//!
//! Every scenario produces a [`ScenarioReport`] listing named checks with a
//! pass/fail/inconclusive verdict, the measured value and the bound it was
//! held against. Numerical aborts (CFL breakdown, stiffness, wall-clock
//! budget) are recorded in the report and downgrade all verdicts to
//! inconclusive; they do not discard the samples gathered so far. Config
//! and domain errors, including a growth rate below the persistence
//! threshold, abort the scenario instead: there is nothing meaningful to
//! grade.

pub mod config;
pub mod output;
pub mod sweep;

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use crate::diagnostics::{friedman_tello_tail_test, CumulativeIntegrals, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::initial::InitialData;
use crate::model::{Field, Grid};
use crate::ode::{
    check_apriori_bounds, equilibrium_constant_f, find_periodic_orbit_a_pos, integrate_ode,
    period_map, periodic_initials_a0, r_min_a0, r_min_a_pos, OdeState, BOUND_SLACK,
};
use crate::pde::{self, PdeState, RunOutcome, SchemeConfig};
use crate::tol::{ODE_ABS_VERIFY, ODE_REL_VERIFY};

pub use config::{
    parse_config, CheckSettings, PointCheck, RunSettings, ScenarioConfig, ScenarioKind,
    SweepAxis, SweepSpec,
};
pub use sweep::{PointClass, PointOutcome};

/// Grade of one named check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// The run could not support a verdict (aborted early, probe gave up).
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// One graded check: the measured value against the bound it must respect.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub verdict: Verdict,
    pub value: f64,
    pub tol: f64,
}

impl CheckResult {
    /// Pass iff value <= tol.
    pub(crate) fn bounded(name: &'static str, value: f64, tol: f64) -> CheckResult {
        let ok = value <= tol;
        CheckResult { name, verdict: if ok { Verdict::Pass } else { Verdict::Fail }, value, tol }
    }

    /// Pass iff value >= tol (floors: persistence witnesses, mass lower
    /// bounds).
    pub(crate) fn floored(name: &'static str, value: f64, tol: f64) -> CheckResult {
        let ok = value >= tol;
        CheckResult { name, verdict: if ok { Verdict::Pass } else { Verdict::Fail }, value, tol }
    }

    pub(crate) fn graded(name: &'static str, ok: bool, value: f64, tol: f64) -> CheckResult {
        CheckResult { name, verdict: if ok { Verdict::Pass } else { Verdict::Fail }, value, tol }
    }

    fn inconclusive(name: &'static str, value: f64, tol: f64) -> CheckResult {
        CheckResult { name, verdict: Verdict::Inconclusive, value, tol }
    }
}

/// Everything one scenario run reports back.
#[derive(Debug)]
pub struct ScenarioReport {
    pub scenario: ScenarioKind,
    pub checks: Vec<CheckResult>,
    /// Free-form context lines (equilibrium coordinates, thresholds, step
    /// counts) written to the report before the checks.
    pub notes: Vec<(String, String)>,
    /// Files the scenario wrote, report.txt included.
    pub files: Vec<PathBuf>,
    pub wall_secs: f64,
    /// Seed of the initial data when the family has one.
    pub seed: Option<u64>,
    /// Numerical abort recorded during the run, if any.
    pub failure: Option<Error>,
}

impl ScenarioReport {
    fn new(scenario: ScenarioKind) -> ScenarioReport {
        ScenarioReport {
            scenario,
            checks: Vec::new(),
            notes: Vec::new(),
            files: Vec::new(),
            wall_secs: 0.0,
            seed: None,
            failure: None,
        }
    }

    fn note(&mut self, key: &str, value: impl std::fmt::Display) {
        self.notes.push((key.to_string(), value.to_string()));
    }

    /// Process exit code: 3 for a numerical abort, 1 for a failed check,
    /// 0 otherwise. Inconclusive checks without an abort map to 0; the
    /// report text still says inconclusive, so callers that require a
    /// verdict can tell.
    pub fn exit_code(&self) -> u8 {
        if self.failure.as_ref().is_some_and(|e| e.is_numerical()) {
            3
        } else if self.checks.iter().any(|c| c.verdict == Verdict::Fail) {
            1
        } else {
            0
        }
    }

    /// Plain-text rendering: metadata lines, notes, then one line per check.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario: {}", self.scenario.name());
        let _ = writeln!(out, "wall_secs: {:.3}", self.wall_secs);
        match self.seed {
            Some(s) => { let _ = writeln!(out, "seed: {s}"); }
            None => { let _ = writeln!(out, "seed: none"); }
        }
        match &self.failure {
            Some(e) => { let _ = writeln!(out, "failure: {e}"); }
            None => { let _ = writeln!(out, "failure: none"); }
        }
        for (key, value) in &self.notes {
            let _ = writeln!(out, "{key}: {value}");
        }
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{}: {} value={:.6e} tol={:e}",
                c.name,
                c.verdict.as_str(),
                c.value,
                c.tol
            );
        }
        out
    }
}

/// Run a scenario end to end: dispatch, downgrade verdicts on a recorded
/// abort, and write report.txt into the output directory.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    fs::create_dir_all(&cfg.output_dir)?;
    let clock = Instant::now();
    let mut report = match cfg.kind {
        ScenarioKind::SteadyState => steady_state(cfg),
        ScenarioKind::OdeOnly => ode_only(cfg),
        ScenarioKind::Convergence => convergence(cfg),
        ScenarioKind::PeriodicA0 => periodic_a0(cfg),
        ScenarioKind::PeriodicProbeAPos => periodic_probe(cfg),
        ScenarioKind::Sweep => sweep::run_sweep(cfg),
    }?;
    if report.failure.is_some() {
        // an aborted run supports no verdict either way
        for check in &mut report.checks {
            check.verdict = Verdict::Inconclusive;
        }
    }
    report.wall_secs = clock.elapsed().as_secs_f64();
    report.seed = cfg.seed();
    let path = cfg.output_dir.join("report.txt");
    fs::write(&path, report.render())?;
    report.files.push(path);
    Ok(report)
}

/// Downgrade a numerical failure to a recorded abort; propagate the rest.
fn soften<T>(result: Result<T>, report: &mut ScenarioReport) -> Result<Option<T>> {
    match result {
        Ok(v) => Ok(Some(v)),
        Err(e) if e.is_numerical() => {
            report.failure = Some(e);
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn aborted_checks(names: &[(&'static str, f64)]) -> Vec<CheckResult> {
    names.iter().map(|&(name, tol)| CheckResult::inconclusive(name, f64::NAN, tol)).collect()
}

pub(crate) fn scheme_config(run: &RunSettings) -> SchemeConfig {
    SchemeConfig {
        dt: run.dt.expect("PDE scenarios always carry dt"),
        cfl_safety: run.cfl_safety,
        track_split: run.track_split,
        adaptive_dt: run.adaptive_dt,
        wall_limit_secs: run.wall_limit_secs,
    }
}

/// Mean-system initial state from a constant initial family. The parser
/// guarantees the family for every scenario that calls this.
fn mean_initial(initial: &InitialData) -> Result<OdeState> {
    match *initial {
        InitialData::Constant { u0, v0 } => OdeState::new(u0, v0, 0.0),
        _ => Err(Error::validation("this scenario takes constant initial data")),
    }
}

/// Sample times k*sample_every strictly inside (0, t_end), then t_end.
fn sample_times(t_end: f64, sample_every: f64) -> Vec<f64> {
    let mut times = Vec::new();
    let mut k = 1u64;
    loop {
        let tk = k as f64 * sample_every;
        if tk >= t_end - 0.5 * sample_every {
            break;
        }
        times.push(tk);
        k += 1;
    }
    times.push(t_end);
    times
}

/// `intervals` equispaced times ending exactly at t_end (t = 0 is implicit:
/// the integrator always returns the initial sample).
pub(crate) fn uniform_times(t_end: f64, intervals: usize) -> Vec<f64> {
    (1..=intervals).map(|k| t_end * (k as f64 / intervals as f64)).collect()
}

pub(crate) fn sup_distance(u: &Field, v: &Field, target: (f64, f64)) -> f64 {
    let du = u.values().iter().fold(0.0f64, |m, &x| m.max((x - target.0).abs()));
    let dv = v.values().iter().fold(0.0f64, |m, &x| m.max((x - target.1).abs()));
    du.max(dv)
}

/// Write series.csv plus final-state snapshots and register them.
fn write_pde_outputs(
    report: &mut ScenarioReport,
    cfg: &ScenarioConfig,
    grid: &Grid,
    outcome: &RunOutcome,
) -> Result<()> {
    let records: Vec<DiagnosticsRecord> = outcome.samples.iter().map(|s| s.record).collect();
    let cumulative: Vec<CumulativeIntegrals> =
        outcome.samples.iter().map(|s| s.cumulative).collect();
    let series = cfg.output_dir.join("series.csv");
    output::write_series(&records, &cumulative, &series)?;
    report.files.push(series);
    let t = outcome.final_state.t;
    for (name, field) in
        [("snapshot_u.txt", &outcome.final_state.u), ("snapshot_v.txt", &outcome.final_state.v)]
    {
        let path = cfg.output_dir.join(name);
        output::write_snapshot(field.values(), grid, t, &path)?;
        report.files.push(path);
    }
    Ok(())
}

/// Constant-supply dichotomy: integrate the full system and measure the
/// final sup-distance to the equilibrium the mean-system theory predicts.
fn steady_state(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(ScenarioKind::SteadyState);
    let grid = cfg.grid.as_ref().expect("parser requires a grid");
    let params = cfg.params.as_ref().expect("parser requires params");
    let spec = cfg.source.as_ref().expect("parser requires a source");
    let f0 = spec.ftilde_mean();

    let eq = equilibrium_constant_f(params, f0)?;
    // interior exists exactly when f0 < r, and is then the attractor
    let target = eq.interior.unwrap_or(eq.trivial);
    report.note("target_u", format!("{:.6e}", target.0));
    report.note("target_v", format!("{:.6e}", target.1));

    let (u, v) = cfg.initial.materialize(grid)?;
    let state = PdeState::new(u, v, grid)?;
    let sample_every = cfg.run.sample_every.expect("parser requires sample_every");
    let run = pde::run(state, grid, params, spec, &scheme_config(&cfg.run), cfg.run.t_end, sample_every);
    let Some(outcome) = soften(run, &mut report)? else {
        report.checks = aborted_checks(&[("target_linf", cfg.checks.target_linf)]);
        return Ok(report);
    };

    let dist = sup_distance(&outcome.final_state.u, &outcome.final_state.v, target);
    report.checks.push(CheckResult::bounded("target_linf", dist, cfg.checks.target_linf));
    report.note("steps", outcome.steps);
    write_pde_outputs(&mut report, cfg, grid, &outcome)?;
    report.failure = outcome.failure;
    Ok(report)
}

/// Mean system only: a-priori upper bounds and the persistence floor.
fn ode_only(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(ScenarioKind::OdeOnly);
    let params = cfg.params.as_ref().expect("parser requires params");
    let spec = cfg.source.as_ref().expect("parser requires a source");
    let initial = mean_initial(&cfg.initial)?;
    let r_min = if params.a() > 0.0 {
        r_min_a_pos(&initial, params, spec)
    } else {
        r_min_a0(spec)
    };
    report.note("r_min", format!("{:.6e}", r_min));

    let times = sample_times(cfg.run.t_end, cfg.run.sample_every.expect("parser requires it"));
    let run = integrate_ode(&initial, params, spec, cfg.run.t_end, &times, ODE_REL_VERIFY, ODE_ABS_VERIFY);
    let Some(traj) = soften(run, &mut report)? else {
        report.checks = aborted_checks(&[
            ("u_upper_bound", BOUND_SLACK),
            ("v_upper_bound", BOUND_SLACK),
            ("u_persistence", cfg.checks.u_floor),
        ]);
        return Ok(report);
    };

    let bounds = check_apriori_bounds(&traj, params, spec)?;
    report.checks.push(CheckResult::graded(
        "u_upper_bound",
        bounds.u_bound_ok,
        bounds.u_excess,
        BOUND_SLACK,
    ));
    report.checks.push(CheckResult::graded(
        "v_upper_bound",
        bounds.v_bound_ok,
        bounds.v_excess,
        BOUND_SLACK,
    ));
    report.checks.push(CheckResult::floored(
        "u_persistence",
        bounds.u_lower_observed,
        cfg.checks.u_floor,
    ));
    let last = traj.final_state();
    report.note("final_u", format!("{:.6e}", last.u_tilde));
    report.note("final_v", format!("{:.6e}", last.v_tilde));

    let path = cfg.output_dir.join("ode_series.csv");
    output::write_ode_series(&traj.samples, &path)?;
    report.files.push(path);
    Ok(report)
}

/// Straight-line slope of a sampled series over its trailing window, with
/// the left endpoint interpolated onto the sample grid.
pub(crate) fn last_window_slope(series: &[(f64, f64)], window: f64) -> Option<f64> {
    let &(t_end, y_end) = series.last()?;
    let t0 = t_end - window;
    if t0 < series.first()?.0 {
        return None;
    }
    let idx = series.partition_point(|&(t, _)| t < t0);
    let y0 = if idx == 0 {
        series[0].1
    } else if series[idx].0 == t0 {
        series[idx].1
    } else {
        let (ta, ya) = series[idx - 1];
        let (tb, yb) = series[idx];
        ya + (yb - ya) * (t0 - ta) / (tb - ta)
    };
    Some((y_end - y0) / window)
}

/// Long-time convergence under an inhomogeneous supply: windowed decay of
/// the deviation functionals, final L2 closeness to the mean system, a
/// plateau of the running ∫k1 and a mass floor.
fn convergence(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(ScenarioKind::Convergence);
    let grid = cfg.grid.as_ref().expect("parser requires a grid");
    let params = cfg.params.as_ref().expect("parser requires params");
    let spec = cfg.source.as_ref().expect("parser requires a source");
    let checks = &cfg.checks;
    let names: [(&'static str, f64); 6] = [
        ("ft_k1", checks.ft_tol),
        ("ft_k2", checks.ft_tol),
        ("ft_k3", checks.ft_tol),
        ("l2_final", checks.l2_final),
        ("k1_integral_plateau", checks.k1_slope),
        ("mass_lower", checks.mass_floor),
    ];

    let (u, v) = cfg.initial.materialize(grid)?;
    let state = PdeState::new(u, v, grid)?;
    let sample_every = cfg.run.sample_every.expect("parser requires sample_every");
    let run = pde::run(state, grid, params, spec, &scheme_config(&cfg.run), cfg.run.t_end, sample_every);
    let Some(outcome) = soften(run, &mut report)? else {
        report.checks = aborted_checks(&names);
        return Ok(report);
    };
    report.note("steps", outcome.steps);
    write_pde_outputs(&mut report, cfg, grid, &outcome)?;

    if outcome.failure.is_some() {
        // too short a span for the tail test; verdicts are downgraded anyway
        report.checks = aborted_checks(&names);
        report.failure = outcome.failure;
        return Ok(report);
    }

    for (name, pick) in [
        ("ft_k1", (|r: &DiagnosticsRecord| r.k1) as fn(&DiagnosticsRecord) -> f64),
        ("ft_k2", |r: &DiagnosticsRecord| r.k2),
        ("ft_k3", |r: &DiagnosticsRecord| r.k3),
    ] {
        let series = outcome.series(pick);
        let Some(tail) = soften(
            friedman_tello_tail_test(&series, checks.ft_window, checks.ft_tol),
            &mut report,
        )?
        else {
            report.checks.push(CheckResult::inconclusive(name, f64::NAN, checks.ft_tol));
            continue;
        };
        let value = tail.tail_mean.max(tail.cumulative_slope);
        report.checks.push(CheckResult::graded(name, tail.decaying, value, checks.ft_tol));
    }

    let last = outcome.samples.last().expect("run always samples t_end").record;
    let l2 = last.l2_u_err_sq.sqrt() + last.l2_v_err_sq.sqrt();
    report.checks.push(CheckResult::bounded("l2_final", l2, checks.l2_final));

    let int_k1: Vec<(f64, f64)> =
        outcome.samples.iter().map(|s| (s.record.t, s.cumulative.int_k1)).collect();
    match last_window_slope(&int_k1, checks.ft_window) {
        Some(slope) => report
            .checks
            .push(CheckResult::bounded("k1_integral_plateau", slope, checks.k1_slope)),
        None => report
            .checks
            .push(CheckResult::inconclusive("k1_integral_plateau", f64::NAN, checks.k1_slope)),
    }

    let min_mass =
        outcome.samples.iter().map(|s| s.record.mass_u).fold(f64::INFINITY, f64::min);
    report.checks.push(CheckResult::floored("mass_lower", min_mass, checks.mass_floor));

    report.failure = outcome.failure;
    Ok(report)
}

/// Closed-form periodic orbit for a = 0: verify the period-map fixed point
/// and that a generic trajectory contracts toward the orbit.
fn periodic_a0(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(ScenarioKind::PeriodicA0);
    let params = cfg.params.as_ref().expect("parser requires params");
    let spec = cfg.source.as_ref().expect("parser requires a source");
    let checks = &cfg.checks;
    let names: [(&'static str, f64); 2] = [
        ("period_residual", checks.period_residual),
        ("orbit_attracts", checks.orbit_contraction),
    ];
    report.note("r_min", format!("{:.6e}", r_min_a0(spec)));

    // a threshold violation (r below the supply mean) is a hard error: the
    // scenario's premise fails, not its numerics
    let (u0, v0) = match periodic_initials_a0(params, spec) {
        Ok(pair) => pair,
        Err(e @ (Error::Threshold(_) | Error::Domain(_))) => return Err(e),
        Err(e) => {
            let _ = soften::<()>(Err(e), &mut report)?;
            report.checks = aborted_checks(&names);
            return Ok(report);
        }
    };
    report.note("orbit_u0", format!("{:.16e}", u0));
    report.note("orbit_v0", format!("{:.16e}", v0));

    let Some((u1, v1)) = soften(period_map(params, spec, u0, v0), &mut report)? else {
        report.checks = aborted_checks(&names);
        return Ok(report);
    };
    let residual = (u1 - u0).hypot(v1 - v0);
    report.checks.push(CheckResult::bounded(
        "period_residual",
        residual,
        checks.period_residual,
    ));

    let t_per = spec.period().unwrap_or(1.0);
    let orbit_start = OdeState::new(u0, v0, 0.0)?;
    let orbit = match soften(
        integrate_ode(&orbit_start, params, spec, t_per, &uniform_times(t_per, 200), ODE_REL_VERIFY, ODE_ABS_VERIFY),
        &mut report,
    )? {
        Some(traj) => traj,
        None => {
            report.checks.push(CheckResult::inconclusive(
                "orbit_attracts",
                f64::NAN,
                checks.orbit_contraction,
            ));
            return Ok(report);
        }
    };
    let orbit_path = cfg.output_dir.join("orbit.csv");
    output::write_ode_series(&orbit.samples, &orbit_path)?;
    report.files.push(orbit_path);

    // attraction: co-integrate a generic state and the orbit over [0, t_end]
    // and require the gap at t_end to have contracted against t_end/2
    let generic_init = mean_initial(&cfg.initial)?;
    let times = uniform_times(cfg.run.t_end, 400);
    let pair = soften(
        integrate_ode(&generic_init, params, spec, cfg.run.t_end, &times, ODE_REL_VERIFY, ODE_ABS_VERIFY),
        &mut report,
    )?
    .zip(soften(
        integrate_ode(&orbit_start, params, spec, cfg.run.t_end, &times, ODE_REL_VERIFY, ODE_ABS_VERIFY),
        &mut report,
    )?);
    let Some((generic, reference)) = pair else {
        report.checks.push(CheckResult::inconclusive(
            "orbit_attracts",
            f64::NAN,
            checks.orbit_contraction,
        ));
        return Ok(report);
    };

    let gap = |i: usize| {
        let g = generic.samples[i];
        let o = reference.samples[i];
        (g.u_tilde - o.u_tilde).hypot(g.v_tilde - o.v_tilde)
    };
    let d_half = gap(200);
    let d_end = gap(400);
    report.note("gap_half", format!("{:.6e}", d_half));
    report.note("gap_end", format!("{:.6e}", d_end));
    let ratio = if d_half > 0.0 { d_end / d_half } else { 0.0 };
    let attracted = d_end <= 1e-10 || ratio <= checks.orbit_contraction;
    report.checks.push(CheckResult::graded(
        "orbit_attracts",
        attracted,
        ratio,
        checks.orbit_contraction,
    ));

    let series_path = cfg.output_dir.join("ode_series.csv");
    output::write_ode_series(&generic.samples, &series_path)?;
    report.files.push(series_path);
    Ok(report)
}

/// Period-map fixed-point probe for a > 0. A probe that gives up is
/// inconclusive, not a failure: no claim is made either way.
fn periodic_probe(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(ScenarioKind::PeriodicProbeAPos);
    let params = cfg.params.as_ref().expect("parser requires params");
    let spec = cfg.source.as_ref().expect("parser requires a source");
    let checks = &cfg.checks;
    let guess = mean_initial(&cfg.initial)?;
    report.note("r_min", format!("{:.6e}", r_min_a_pos(&guess, params, spec)));

    let max_iters = u32::try_from(checks.max_iters).unwrap_or(u32::MAX);
    let run = find_periodic_orbit_a_pos(params, spec, &guess, max_iters, checks.probe_tol);
    let Some(probe) = soften(run, &mut report)? else {
        report.checks = aborted_checks(&[("probe_residual", checks.probe_tol)]);
        return Ok(report);
    };

    report.note("iterations", probe.iterations);
    report.note("orbit_u0", format!("{:.16e}", probe.u0));
    report.note("orbit_v0", format!("{:.16e}", probe.v0));
    let verdict = if probe.converged { Verdict::Pass } else { Verdict::Inconclusive };
    report.checks.push(CheckResult {
        name: "probe_residual",
        verdict,
        value: probe.residual,
        tol: checks.probe_tol,
    });

    if probe.converged {
        let t_per = spec.period().unwrap_or(1.0);
        let start = OdeState::new(probe.u0, probe.v0, 0.0)?;
        if let Some(orbit) = soften(
            integrate_ode(&start, params, spec, t_per, &uniform_times(t_per, 200), ODE_REL_VERIFY, ODE_ABS_VERIFY),
            &mut report,
        )? {
            let path = cfg.output_dir.join("orbit.csv");
            output::write_ode_series(&orbit.samples, &path)?;
            report.files.push(path);
        }
    }
    Ok(report)
}
