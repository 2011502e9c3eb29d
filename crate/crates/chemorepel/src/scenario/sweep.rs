//! Parameter sweeps over the (r, f0) or (r, a) plane.
//!
//! Every lattice point integrates its own constant-supply system to t_end
//! and is classified by which equilibrium the final state sits nearer to.
//! For f0 sweeps the observed interior/trivial boundary is then compared
//! row by row against the predicted critical line f0 = r. Points that abort
//! numerically are marked failed in the map and make the boundary check
//! inconclusive instead of sinking the whole sweep.

use std::fs;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::initial::InitialData;
use crate::model::{Grid, ModelParams, SourceSpec};
use crate::ode::{equilibrium_constant_f, integrate_ode, OdeState};
use crate::pde::{self, PdeState};
use crate::scenario::config::{PointCheck, RunSettings, SweepAxis, SweepSpec};
use crate::scenario::{
    scheme_config, sup_distance, CheckResult, ScenarioConfig, ScenarioKind, ScenarioReport,
};
use crate::tol::{ODE_ABS_SWEEP, ODE_REL_SWEEP};

/// Long-time destination of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointClass {
    Interior,
    Trivial,
    /// The point aborted numerically and carries no distances.
    Failed,
}

impl PointClass {
    pub fn name(&self) -> &'static str {
        match self {
            PointClass::Interior => "interior",
            PointClass::Trivial => "trivial",
            PointClass::Failed => "failed",
        }
    }
}

/// One classified lattice point. `axis` is f0 or a, depending on the sweep.
#[derive(Debug, Clone)]
pub struct PointOutcome {
    pub r: f64,
    pub axis: f64,
    pub class: PointClass,
    pub dist_interior: Option<f64>,
    pub dist_trivial: Option<f64>,
}

/// Nearer equilibrium wins; without an interior one the point is trivial.
fn classify(dist_interior: Option<f64>, dist_trivial: f64) -> PointClass {
    match dist_interior {
        Some(di) if di < dist_trivial => PointClass::Interior,
        _ => PointClass::Trivial,
    }
}

/// Integrate one point and measure its distances to both equilibria.
fn grade_point(
    sweep: &SweepSpec,
    run: &RunSettings,
    initial: &InitialData,
    grid: Option<&Grid>,
    r: f64,
    axis: f64,
) -> Result<PointOutcome> {
    let (a, f0) = match sweep.axis {
        SweepAxis::F0 => (sweep.fixed_a.expect("f0 sweeps fix a"), axis),
        SweepAxis::A => (axis, sweep.fixed_f0.expect("a sweeps fix f0")),
    };
    let params = ModelParams::new(sweep.d, sweep.chi, r, a)?;
    let spec = SourceSpec::constant(f0)?;
    let eq = equilibrium_constant_f(&params, f0)?;

    let (dist_interior, dist_trivial) = match sweep.point_check {
        PointCheck::Ode => {
            let InitialData::Constant { u0, v0 } = *initial else {
                return Err(Error::validation("ode sweeps take constant initial data"));
            };
            let init = OdeState::new(u0, v0, 0.0)?;
            let traj =
                integrate_ode(&init, &params, &spec, run.t_end, &[], ODE_REL_SWEEP, ODE_ABS_SWEEP)?;
            let fin = traj.final_state();
            let dist = |target: (f64, f64)| {
                (fin.u_tilde - target.0).hypot(fin.v_tilde - target.1)
            };
            (eq.interior.map(dist), dist(eq.trivial))
        }
        PointCheck::Pde => {
            let grid = grid.expect("parser requires a grid for pde sweeps");
            let (u, v) = initial.materialize(grid)?;
            let state = PdeState::new(u, v, grid)?;
            // only the final state matters: sample once, at t_end
            let out = pde::run(
                state,
                grid,
                &params,
                &spec,
                &scheme_config(run),
                run.t_end,
                run.t_end,
            )?;
            if let Some(e) = out.failure {
                return Err(e);
            }
            let fin = &out.final_state;
            (
                eq.interior.map(|t| sup_distance(&fin.u, &fin.v, t)),
                sup_distance(&fin.u, &fin.v, eq.trivial),
            )
        }
    };
    Ok(PointOutcome {
        r,
        axis,
        class: classify(dist_interior, dist_trivial),
        dist_interior,
        dist_trivial: Some(dist_trivial),
    })
}

/// Largest row-wise gap between the observed class boundary and the
/// predicted line f0 = r. Each row's crossing is placed midway between the
/// last interior and first trivial point, or at the range edge when one
/// class covers the whole row.
fn boundary_max_deviation(sweep: &SweepSpec, points: &[PointOutcome]) -> f64 {
    let mut max_dev = 0.0f64;
    for i in 0..sweep.r_steps {
        let r = sweep.r_value(i);
        let row = &points[i * sweep.axis_steps..(i + 1) * sweep.axis_steps];
        let est = match row.iter().position(|p| p.class == PointClass::Trivial) {
            Some(0) => sweep.axis_min,
            Some(j) => 0.5 * (sweep.axis_value(j - 1) + sweep.axis_value(j)),
            None => sweep.axis_max,
        };
        let expected = r.clamp(sweep.axis_min, sweep.axis_max);
        max_dev = max_dev.max((est - expected).abs());
    }
    max_dev
}

/// Run the whole lattice (row-major in r, parallel across points), write
/// sweep_map.csv and grade the boundary for f0 sweeps.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(ScenarioKind::Sweep);
    let sweep = cfg.sweep.as_ref().expect("parser requires a sweep spec");
    let total = sweep.r_steps * sweep.axis_steps;
    report.note("lattice", format!("{} x {}", sweep.r_steps, sweep.axis_steps));

    let results: Vec<Result<PointOutcome>> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / sweep.axis_steps, idx % sweep.axis_steps);
            grade_point(
                sweep,
                &cfg.run,
                &cfg.initial,
                cfg.grid.as_ref(),
                sweep.r_value(i),
                sweep.axis_value(j),
            )
        })
        .collect();

    let mut points = Vec::with_capacity(total);
    let mut failed = 0usize;
    let mut first_failure: Option<String> = None;
    for (idx, result) in results.into_iter().enumerate() {
        match result {
            Ok(p) => points.push(p),
            Err(e) if e.is_numerical() => {
                failed += 1;
                if first_failure.is_none() {
                    first_failure = Some(e.to_string());
                }
                let (i, j) = (idx / sweep.axis_steps, idx % sweep.axis_steps);
                points.push(PointOutcome {
                    r: sweep.r_value(i),
                    axis: sweep.axis_value(j),
                    class: PointClass::Failed,
                    dist_interior: None,
                    dist_trivial: None,
                });
            }
            Err(e) => return Err(e),
        }
    }
    if failed > 0 {
        report.note("failed_points", failed);
        if let Some(msg) = first_failure {
            report.note("first_point_failure", msg);
        }
    }

    let axis_name = match sweep.axis {
        SweepAxis::F0 => "f0",
        SweepAxis::A => "a",
    };
    let mut text = format!("r,{axis_name},class,dist_interior,dist_trivial\n");
    for p in &points {
        let fmt_opt = |d: Option<f64>| d.map(|v| format!("{v:.16e}")).unwrap_or_default();
        text.push_str(&format!(
            "{:.16e},{:.16e},{},{},{}\n",
            p.r,
            p.axis,
            p.class.name(),
            fmt_opt(p.dist_interior),
            fmt_opt(p.dist_trivial),
        ));
    }
    let map_path = cfg.output_dir.join("sweep_map.csv");
    fs::write(&map_path, text)?;
    report.files.push(map_path);

    // only f0 shares the r axis's units; a sweeps are map-only
    if sweep.axis == SweepAxis::F0 {
        let cell = (sweep.axis_max - sweep.axis_min) / (sweep.axis_steps - 1) as f64;
        let tol = cfg.checks.boundary_cells * cell;
        let dev = boundary_max_deviation(sweep, &points);
        let check = if failed > 0 {
            CheckResult::inconclusive("boundary_max_deviation", dev, tol)
        } else {
            CheckResult::bounded("boundary_max_deviation", dev, tol)
        };
        report.checks.push(check);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{parse_config, run_scenario, Verdict};
    use tempfile::tempdir;

    fn spec_for(r_steps: usize, axis_steps: usize) -> SweepSpec {
        SweepSpec {
            axis: SweepAxis::F0,
            point_check: PointCheck::Ode,
            d: 1.0,
            chi: 1.0,
            fixed_a: Some(0.5),
            fixed_f0: None,
            r_min: 0.5,
            r_max: 2.5,
            r_steps,
            axis_min: 0.5,
            axis_max: 2.5,
            axis_steps,
        }
    }

    fn point(r: f64, axis: f64, class: PointClass) -> PointOutcome {
        PointOutcome { r, axis, class, dist_interior: None, dist_trivial: None }
    }

    #[test]
    fn classification_prefers_the_nearer_equilibrium() {
        assert_eq!(classify(Some(0.1), 0.5), PointClass::Interior);
        assert_eq!(classify(Some(0.5), 0.1), PointClass::Trivial);
        assert_eq!(classify(None, 0.1), PointClass::Trivial);
        // ties break trivial: the interior distance must win strictly
        assert_eq!(classify(Some(0.3), 0.3), PointClass::Trivial);
    }

    #[test]
    fn boundary_estimate_lands_between_the_classes() {
        let spec = spec_for(1, 5);
        // crossing between f0 = 1.0 and f0 = 1.5 in a row at r = 0.5: the
        // expected boundary clamps to the range edge
        let row = vec![
            point(0.5, 0.5, PointClass::Interior),
            point(0.5, 1.0, PointClass::Interior),
            point(0.5, 1.5, PointClass::Trivial),
            point(0.5, 2.0, PointClass::Trivial),
            point(0.5, 2.5, PointClass::Trivial),
        ];
        let dev = boundary_max_deviation(&spec, &row);
        assert!((dev - (1.25 - 0.5)).abs() <= 1e-12, "dev = {dev}");
    }

    #[test]
    fn uniform_rows_fall_back_to_the_range_edges() {
        let spec = spec_for(1, 3);
        let all_interior = vec![
            point(2.5, 0.5, PointClass::Interior),
            point(2.5, 1.5, PointClass::Interior),
            point(2.5, 2.5, PointClass::Interior),
        ];
        // estimate 2.5 (axis_max), expected 2.5: no deviation
        assert_eq!(boundary_max_deviation(&spec_row(2.5, &spec), &all_interior), 0.0);
        let all_trivial = vec![
            point(0.5, 0.5, PointClass::Trivial),
            point(0.5, 1.5, PointClass::Trivial),
            point(0.5, 2.5, PointClass::Trivial),
        ];
        assert_eq!(boundary_max_deviation(&spec_row(0.5, &spec), &all_trivial), 0.0);
    }

    fn spec_row(r: f64, base: &SweepSpec) -> SweepSpec {
        SweepSpec { r_min: r, r_max: r + 1.0, r_steps: 1, ..base.clone() }
    }

    const ODE_SWEEP: &str = "[scenario]\n\
        type = sweep\n\
        sweep_axis = f0\n\
        sweep_min = 0.5\n\
        sweep_max = 2.5\n\
        sweep_steps = 5\n\
        r_min = 0.5\n\
        r_max = 2.5\n\
        r_steps = 5\n\
        [params]\n\
        d = 1.0\n\
        chi = 1.0\n\
        a = 0.5\n\
        [initial]\n\
        family = constant\n\
        u0 = 0.5\n\
        v0 = 0.5\n\
        [run]\n\
        t_end = 150.0\n";

    #[test]
    fn ode_sweep_traces_the_dichotomy_boundary() {
        let dir = tempdir().unwrap();
        let mut cfg = parse_config(ODE_SWEEP).unwrap();
        cfg.output_dir = dir.path().to_path_buf();
        let report = run_scenario(&cfg).unwrap();
        assert_eq!(report.exit_code(), 0, "report:\n{}", report.render());
        assert_eq!(report.checks.len(), 1);
        assert_eq!(report.checks[0].name, "boundary_max_deviation");
        assert_eq!(report.checks[0].verdict, Verdict::Pass);

        let map = std::fs::read_to_string(dir.path().join("sweep_map.csv")).unwrap();
        let lines: Vec<&str> = map.lines().collect();
        assert_eq!(lines[0], "r,f0,class,dist_interior,dist_trivial");
        assert_eq!(lines.len(), 26);
        // row-major: the first five rows share r = 0.5 and walk f0 upward,
        // crossing from interior (f0 < r) to trivial
        assert!(lines[5].contains(",trivial,"), "r=0.5, f0=2.5: {}", lines[5]);
        assert!(lines[21].contains(",interior,"), "r=2.5, f0=0.5: {}", lines[21]);
        // the f0 = r diagonal itself has no interior equilibrium
        let diag = lines[1 + 2 * 5 + 2]; // r = 1.5, f0 = 1.5
        assert!(diag.contains(",trivial,"), "diagonal point: {diag}");
    }

    const PDE_SWEEP: &str = "[scenario]\n\
        type = sweep\n\
        sweep_axis = f0\n\
        point_check = pde\n\
        sweep_min = 0.5\n\
        sweep_max = 2.5\n\
        sweep_steps = 2\n\
        r_min = 1.0\n\
        r_max = 2.0\n\
        r_steps = 2\n\
        [params]\n\
        d = 1.0\n\
        chi = 1.0\n\
        a = 0.5\n\
        [grid]\n\
        dim = 1\n\
        n = 16\n\
        [initial]\n\
        family = constant\n\
        u0 = 0.5\n\
        v0 = 0.5\n\
        [run]\n\
        t_end = 40.0\n\
        dt = 0.01\n";

    #[test]
    fn pde_sweep_classifies_by_field_distance() {
        let dir = tempdir().unwrap();
        let mut cfg = parse_config(PDE_SWEEP).unwrap();
        cfg.output_dir = dir.path().to_path_buf();
        let report = run_scenario(&cfg).unwrap();
        assert_eq!(report.exit_code(), 0, "report:\n{}", report.render());
        assert_eq!(report.checks[0].verdict, Verdict::Pass);
        let map = std::fs::read_to_string(dir.path().join("sweep_map.csv")).unwrap();
        let classes: Vec<&str> =
            map.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
        // f0 = 0.5 is below both growth rates, f0 = 2.5 above both
        assert_eq!(classes, ["interior", "trivial", "interior", "trivial"]);
    }

    #[test]
    fn aborted_points_leave_the_boundary_inconclusive() {
        let dir = tempdir().unwrap();
        let text = PDE_SWEEP.replace("dt = 0.01\n", "dt = 0.01\nwall_limit_secs = 0.0\n");
        let mut cfg = parse_config(&text).unwrap();
        cfg.output_dir = dir.path().to_path_buf();
        let report = run_scenario(&cfg).unwrap();
        assert_eq!(report.checks[0].verdict, Verdict::Inconclusive);
        assert_eq!(report.exit_code(), 0, "soft point failures keep exit 0");
        assert!(report.notes.iter().any(|(k, v)| k == "failed_points" && v == "4"));
        let map = std::fs::read_to_string(dir.path().join("sweep_map.csv")).unwrap();
        // failed points carry empty distance fields
        let line = map.lines().nth(1).unwrap();
        assert!(line.ends_with(",failed,,"), "line: {line}");
    }

    #[test]
    fn a_axis_sweep_writes_a_map_without_checks() {
        let dir = tempdir().unwrap();
        let text = "[scenario]\n\
            type = sweep\n\
            sweep_axis = a\n\
            sweep_min = 0.0\n\
            sweep_max = 1.0\n\
            sweep_steps = 2\n\
            r_min = 1.0\n\
            r_max = 2.0\n\
            r_steps = 3\n\
            [params]\n\
            d = 1.0\n\
            chi = 1.0\n\
            [source]\n\
            kind = constant\n\
            f0 = 1.0\n\
            [initial]\n\
            family = constant\n\
            u0 = 0.5\n\
            v0 = 0.5\n\
            [run]\n\
            t_end = 100.0\n";
        let mut cfg = parse_config(text).unwrap();
        cfg.output_dir = dir.path().to_path_buf();
        let report = run_scenario(&cfg).unwrap();
        assert_eq!(report.exit_code(), 0, "report:\n{}", report.render());
        assert!(report.checks.is_empty());
        let map = std::fs::read_to_string(dir.path().join("sweep_map.csv")).unwrap();
        assert_eq!(map.lines().next().unwrap(), "r,a,class,dist_interior,dist_trivial");
        assert_eq!(map.lines().count(), 7);
    }
}
