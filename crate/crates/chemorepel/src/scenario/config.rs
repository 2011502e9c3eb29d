//! Strict line-oriented scenario configuration.
//!
//! The format is `key = value` lines grouped under `[section]` headers,
//! UTF-8, with `#` starting a comment. Section names and keys are fixed per
//! scenario; unknown keys and unknown sections are parse errors carrying the
//! offending line number, so misspellings never fall back to defaults.
//! Defaults exist only for the optional keys called out in the reference
//! table in the README.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::initial::InitialData;
use crate::model::{DecaySignal, Field, Grid, ModelParams, PeriodicSignal, SourceSpec};

/// Which scenario a config drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    SteadyState,
    OdeOnly,
    Convergence,
    PeriodicA0,
    PeriodicProbeAPos,
    Sweep,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::SteadyState => "steady_state",
            ScenarioKind::OdeOnly => "ode_only",
            ScenarioKind::Convergence => "convergence",
            ScenarioKind::PeriodicA0 => "periodic_a0",
            ScenarioKind::PeriodicProbeAPos => "periodic_probe_a_pos",
            ScenarioKind::Sweep => "sweep",
        }
    }

    fn from_name(name: &str, line: usize) -> Result<ScenarioKind> {
        match name {
            "steady_state" => Ok(ScenarioKind::SteadyState),
            "ode_only" => Ok(ScenarioKind::OdeOnly),
            "convergence" => Ok(ScenarioKind::Convergence),
            "periodic_a0" => Ok(ScenarioKind::PeriodicA0),
            "periodic_probe_a_pos" => Ok(ScenarioKind::PeriodicProbeAPos),
            "sweep" => Ok(ScenarioKind::Sweep),
            other => Err(Error::Config {
                line,
                msg: format!(
                    "unknown scenario type '{other}' (expected steady_state, ode_only, \
                     convergence, periodic_a0, periodic_probe_a_pos or sweep)"
                ),
            }),
        }
    }

    /// Scenarios that advance the PDE (and therefore need a grid and dt).
    pub fn is_pde(&self) -> bool {
        matches!(self, ScenarioKind::SteadyState | ScenarioKind::Convergence)
    }
}

/// Swept second coordinate of a sweep scenario; r is always the first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    F0,
    A,
}

/// Per-point check a sweep runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointCheck {
    Ode,
    Pde,
}

/// Fully resolved sweep description.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub point_check: PointCheck,
    pub d: f64,
    pub chi: f64,
    /// Fixed a for f0-axis sweeps.
    pub fixed_a: Option<f64>,
    /// Fixed f0 for a-axis sweeps.
    pub fixed_f0: Option<f64>,
    pub r_min: f64,
    pub r_max: f64,
    pub r_steps: usize,
    pub axis_min: f64,
    pub axis_max: f64,
    pub axis_steps: usize,
}

impl SweepSpec {
    pub fn r_value(&self, i: usize) -> f64 {
        lattice(self.r_min, self.r_max, self.r_steps, i)
    }

    pub fn axis_value(&self, j: usize) -> f64 {
        lattice(self.axis_min, self.axis_max, self.axis_steps, j)
    }
}

fn lattice(min: f64, max: f64, steps: usize, i: usize) -> f64 {
    if steps == 1 {
        min
    } else {
        min + (max - min) * i as f64 / (steps - 1) as f64
    }
}

/// Validated `[run]` settings. PDE-only keys are `None` for ODE scenarios.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub t_end: f64,
    pub dt: Option<f64>,
    pub sample_every: Option<f64>,
    pub track_split: bool,
    pub cfl_safety: f64,
    pub adaptive_dt: bool,
    pub wall_limit_secs: Option<f64>,
}

/// Check thresholds and iteration caps from `[tolerances]`, with defaults
/// resolved. Only the keys a scenario consumes may appear in its config.
#[derive(Debug, Clone)]
pub struct CheckSettings {
    /// steady_state: final sup-distance to the predicted equilibrium.
    pub target_linf: f64,
    /// ode_only: persistence witness floor for min ũ.
    pub u_floor: f64,
    /// convergence: window of the tail test (default: 10% of the horizon).
    pub ft_window: f64,
    /// convergence: tail-mean and slope tolerance of the tail test.
    pub ft_tol: f64,
    /// convergence: final ||u−ũ|| + ||v−ṽ|| bound.
    pub l2_final: f64,
    /// convergence: last-window slope bound for the running ∫k1.
    pub k1_slope: f64,
    /// convergence: floor for min ∫u over the run.
    pub mass_floor: f64,
    /// periodic_a0: period-map residual bound.
    pub period_residual: f64,
    /// periodic_a0: required shrink factor of the orbit distance between
    /// t_end/2 and t_end.
    pub orbit_contraction: f64,
    /// periodic_probe_a_pos: residual target of the fixed-point probe.
    pub probe_tol: f64,
    /// periodic_probe_a_pos: iteration cap of the probe.
    pub max_iters: usize,
    /// sweep: allowed boundary deviation in sweep cells.
    pub boundary_cells: f64,
}

/// A parsed, validated scenario configuration.
///
/// `params` is `None` only for sweeps (where r and one more coordinate vary
/// per point), `source` additionally for f0-axis sweeps, and `grid` for
/// scenarios that never touch the PDE.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub output_dir: PathBuf,
    pub params: Option<ModelParams>,
    pub source: Option<SourceSpec>,
    pub grid: Option<Grid>,
    pub initial: InitialData,
    pub run: RunSettings,
    pub checks: CheckSettings,
    pub sweep: Option<SweepSpec>,
}

impl ScenarioConfig {
    /// Replace the seed of a random-smooth initial family (CLI override).
    /// Other families have no randomness and are returned unchanged.
    pub fn with_seed(mut self, seed: u64) -> ScenarioConfig {
        if let InitialData::RandomSmooth { seed: s, .. } = &mut self.initial {
            *s = seed;
        }
        self
    }

    /// Seed recorded in reports, when the initial family has one.
    pub fn seed(&self) -> Option<u64> {
        match self.initial {
            InitialData::RandomSmooth { seed, .. } => Some(seed),
            _ => None,
        }
    }
}

const SECTION_NAMES: [&str; 7] =
    ["scenario", "params", "source", "grid", "initial", "run", "tolerances"];

struct Entry {
    line: usize,
    value: String,
    taken: bool,
}

/// One parsed section: ordered key table plus consumption tracking, so the
/// strict-keys rule can point at the exact unconsumed line.
struct Section {
    name: &'static str,
    present: bool,
    entries: BTreeMap<String, Entry>,
}

impl Section {
    fn new(name: &'static str) -> Section {
        Section { name, present: false, entries: BTreeMap::new() }
    }

    fn take_raw(&mut self, key: &str) -> Option<(usize, String)> {
        let entry = self.entries.get_mut(key)?;
        entry.taken = true;
        Some((entry.line, entry.value.clone()))
    }

    fn take_f64(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take_raw(key) {
            None => Ok(None),
            Some((line, value)) => value.parse::<f64>().map(Some).map_err(|_| Error::Config {
                line,
                msg: format!("key '{key}' in [{}] expects a number, got '{value}'", self.name),
            }),
        }
    }

    fn require_f64(&mut self, key: &str) -> Result<f64> {
        self.take_f64(key)?.ok_or_else(|| {
            Error::validation(format!("[{}] is missing required key '{key}'", self.name))
        })
    }

    fn take_usize(&mut self, key: &str) -> Result<Option<usize>> {
        match self.take_raw(key) {
            None => Ok(None),
            Some((line, value)) => value.parse::<usize>().map(Some).map_err(|_| Error::Config {
                line,
                msg: format!(
                    "key '{key}' in [{}] expects a nonnegative integer, got '{value}'",
                    self.name
                ),
            }),
        }
    }

    fn require_usize(&mut self, key: &str) -> Result<usize> {
        self.take_usize(key)?.ok_or_else(|| {
            Error::validation(format!("[{}] is missing required key '{key}'", self.name))
        })
    }

    fn take_u64(&mut self, key: &str) -> Result<Option<u64>> {
        match self.take_raw(key) {
            None => Ok(None),
            Some((line, value)) => value.parse::<u64>().map(Some).map_err(|_| Error::Config {
                line,
                msg: format!(
                    "key '{key}' in [{}] expects a nonnegative integer, got '{value}'",
                    self.name
                ),
            }),
        }
    }

    fn take_bool(&mut self, key: &str) -> Result<Option<bool>> {
        match self.take_raw(key) {
            None => Ok(None),
            Some((line, value)) => match value.as_str() {
                "true" => Ok(Some(true)),
                "false" => Ok(Some(false)),
                other => Err(Error::Config {
                    line,
                    msg: format!(
                        "key '{key}' in [{}] expects true or false, got '{other}'",
                        self.name
                    ),
                }),
            },
        }
    }

    fn take_string(&mut self, key: &str) -> Option<String> {
        self.take_raw(key).map(|(_, v)| v)
    }

    fn require_string(&mut self, key: &str) -> Result<(usize, String)> {
        self.take_raw(key).ok_or_else(|| {
            Error::validation(format!("[{}] is missing required key '{key}'", self.name))
        })
    }

    fn require_present(&self) -> Result<()> {
        if !self.present {
            return Err(Error::validation(format!("missing [{}] section", self.name)));
        }
        Ok(())
    }

    fn forbid(&self, scenario: &str) -> Result<()> {
        if self.present && !self.entries.is_empty() {
            let line = self.entries.values().map(|e| e.line).min().unwrap_or(0);
            return Err(Error::Config {
                line,
                msg: format!("scenario {scenario} does not take a [{}] section", self.name),
            });
        }
        Ok(())
    }

    /// Strict-keys rule: every entry must have been consumed.
    fn finish(&self) -> Result<()> {
        for (key, entry) in &self.entries {
            if !entry.taken {
                return Err(Error::Config {
                    line: entry.line,
                    msg: format!("unknown key '{key}' in [{}]", self.name),
                });
            }
        }
        Ok(())
    }
}

fn split_sections(text: &str) -> Result<BTreeMap<&'static str, Section>> {
    let mut sections: BTreeMap<&'static str, Section> =
        SECTION_NAMES.iter().map(|&n| (n, Section::new(n))).collect();
    let mut current: Option<&'static str> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|rest| rest.strip_suffix(']')) {
            let name = name.trim();
            match SECTION_NAMES.iter().find(|&&n| n == name) {
                Some(&known) => {
                    sections.get_mut(known).unwrap().present = true;
                    current = Some(known);
                }
                None => {
                    return Err(Error::Config {
                        line: line_no,
                        msg: format!("unknown section [{name}]"),
                    })
                }
            }
            continue;
        }
        let Some(eq) = line.find('=') else {
            return Err(Error::Config {
                line: line_no,
                msg: format!("expected 'key = value' or '[section]', got '{line}'"),
            });
        };
        let key = line[..eq].trim();
        let value = line[eq + 1..].trim();
        if key.is_empty() || value.is_empty() {
            return Err(Error::Config {
                line: line_no,
                msg: "empty key or value".to_string(),
            });
        }
        let Some(section) = current else {
            return Err(Error::Config {
                line: line_no,
                msg: format!("key '{key}' appears before any [section] header"),
            });
        };
        let table = &mut sections.get_mut(section).unwrap().entries;
        if table.contains_key(key) {
            return Err(Error::Config {
                line: line_no,
                msg: format!("duplicate key '{key}' in [{section}]"),
            });
        }
        table.insert(key.to_string(), Entry { line: line_no, value: value.to_string(), taken: false });
    }
    Ok(sections)
}

fn parse_grid(grid: &mut Section) -> Result<Grid> {
    grid.require_present()?;
    let dim = grid.require_usize("dim")?;
    match dim {
        1 => {
            let n = grid.require_usize("n")?;
            Grid::line(n)
        }
        2 => {
            let nx = grid.require_usize("nx")?;
            let ny = grid.require_usize("ny")?;
            let lx = grid.take_f64("lx")?.unwrap_or(1.0);
            Grid::rect(nx, ny, lx)
        }
        other => Err(Error::validation(format!("grid dim must be 1 or 2, got {other}"))),
    }
}

fn parse_periodic_signal(source: &mut Section) -> Result<PeriodicSignal> {
    Ok(PeriodicSignal {
        mean_level: source.require_f64("mean")?,
        amplitude: source.require_f64("amplitude")?,
        period: source.require_f64("period")?,
        phase: source.take_f64("phase")?.unwrap_or(0.0),
    })
}

/// Build the source. Separable sources bind their spatial factor
/// q(x) = cos(2π·q_mode·x/Lx) (times the matching y-cosine in 2D) to the
/// scenario grid, so they are only available to PDE scenarios.
fn parse_source(source: &mut Section, grid: Option<&Grid>) -> Result<SourceSpec> {
    source.require_present()?;
    let (line, kind) = source.require_string("kind")?;
    match kind.as_str() {
        "constant" => SourceSpec::constant(source.require_f64("f0")?),
        "homogeneous_periodic" => SourceSpec::homogeneous_periodic(parse_periodic_signal(source)?),
        "separable_perturbed" => {
            let ftilde = parse_periodic_signal(source)?;
            let p = DecaySignal {
                scale: source.require_f64("p_scale")?,
                rate: source.require_f64("p_rate")?,
            };
            let mode = source.require_usize("q_mode")? as f64;
            let Some(grid) = grid else {
                return Err(Error::validation(
                    "separable_perturbed sources need a PDE scenario with a [grid] section",
                ));
            };
            let tau = std::f64::consts::TAU;
            let q = Field::from_fn(grid, |x, y| {
                let qx = (tau * mode * x / grid.lx()).cos();
                if grid.dimension() == 2 {
                    qx * (tau * mode * y / grid.ly()).cos()
                } else {
                    qx
                }
            });
            SourceSpec::separable(ftilde, p, q, grid)
        }
        other => Err(Error::Config {
            line,
            msg: format!(
                "unknown source kind '{other}' (expected constant, homogeneous_periodic \
                 or separable_perturbed)"
            ),
        }),
    }
}

fn parse_initial(initial: &mut Section) -> Result<InitialData> {
    initial.require_present()?;
    let (line, family) = initial.require_string("family")?;
    match family.as_str() {
        "constant" => Ok(InitialData::Constant {
            u0: initial.require_f64("u0")?,
            v0: initial.require_f64("v0")?,
        }),
        "cosine_perturbed" => Ok(InitialData::CosinePerturbed {
            u_base: initial.require_f64("u_base")?,
            v_base: initial.require_f64("v_base")?,
            epsilon: initial.require_f64("epsilon")?,
            mode: initial.require_usize("mode")? as u32,
        }),
        "random_smooth" => Ok(InitialData::RandomSmooth {
            u_base: initial.require_f64("u_base")?,
            v_base: initial.require_f64("v_base")?,
            epsilon: initial.require_f64("epsilon")?,
            seed: initial.take_u64("seed")?.unwrap_or(0),
        }),
        other => Err(Error::Config {
            line,
            msg: format!(
                "unknown initial family '{other}' (expected constant, cosine_perturbed \
                 or random_smooth)"
            ),
        }),
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::validation(format!("{name} must be > 0, got {v}")));
    }
    Ok(v)
}

fn parse_run(run: &mut Section, kind: ScenarioKind) -> Result<RunSettings> {
    let needs_t_end = kind != ScenarioKind::PeriodicProbeAPos;
    if needs_t_end {
        run.require_present()?;
    }
    let t_end = match run.take_f64("t_end")? {
        Some(v) => positive("t_end", v)?,
        None if needs_t_end => {
            return Err(Error::validation("[run] is missing required key 't_end'"))
        }
        None => 0.0,
    };
    let pde = kind.is_pde() || kind == ScenarioKind::Sweep;
    let dt = run.take_f64("dt")?;
    let sample_every = run.take_f64("sample_every")?;
    if let Some(dt) = dt {
        positive("dt", dt)?;
        if !pde {
            return Err(Error::validation(format!(
                "scenario {} does not take dt (no PDE stepping)",
                kind.name()
            )));
        }
    }
    if let Some(se) = sample_every {
        positive("sample_every", se)?;
    }
    match kind {
        ScenarioKind::SteadyState | ScenarioKind::Convergence => {
            if dt.is_none() {
                return Err(Error::validation("[run] is missing required key 'dt'"));
            }
            if sample_every.is_none() {
                return Err(Error::validation("[run] is missing required key 'sample_every'"));
            }
        }
        ScenarioKind::OdeOnly => {
            if sample_every.is_none() {
                return Err(Error::validation("[run] is missing required key 'sample_every'"));
            }
        }
        ScenarioKind::PeriodicA0 | ScenarioKind::PeriodicProbeAPos => {
            if sample_every.is_some() {
                return Err(Error::validation(format!(
                    "scenario {} computes its own sampling; drop sample_every",
                    kind.name()
                )));
            }
        }
        ScenarioKind::Sweep => {
            if sample_every.is_some() {
                return Err(Error::validation(
                    "sweep points keep only final states; drop sample_every",
                ));
            }
        }
    }
    let track_split = run.take_bool("track_split")?.unwrap_or(false);
    if track_split && !pde {
        return Err(Error::validation(format!(
            "scenario {} has no split fields to track",
            kind.name()
        )));
    }
    let cfl_safety = run.take_f64("cfl_safety")?.unwrap_or(0.5);
    if !(cfl_safety > 0.0 && cfl_safety <= 1.0) {
        return Err(Error::validation(format!(
            "cfl_safety must lie in (0, 1], got {cfl_safety}"
        )));
    }
    let adaptive_dt = run.take_bool("adaptive_dt")?.unwrap_or(true);
    let wall_limit_secs = run.take_f64("wall_limit_secs")?;
    if let Some(w) = wall_limit_secs {
        if !(w.is_finite() && w >= 0.0) {
            return Err(Error::validation(format!("wall_limit_secs must be >= 0, got {w}")));
        }
    }
    Ok(RunSettings { t_end, dt, sample_every, track_split, cfl_safety, adaptive_dt, wall_limit_secs })
}

/// Tolerance keys each scenario accepts; anything else is rejected.
fn allowed_tolerance_keys(kind: ScenarioKind) -> &'static [&'static str] {
    match kind {
        ScenarioKind::SteadyState => &["target_linf"],
        ScenarioKind::OdeOnly => &["u_floor"],
        ScenarioKind::Convergence => &["ft_window", "ft_tol", "l2_final", "k1_slope", "mass_floor"],
        ScenarioKind::PeriodicA0 => &["period_residual", "orbit_contraction"],
        ScenarioKind::PeriodicProbeAPos => &["probe_tol", "max_iters"],
        ScenarioKind::Sweep => &["boundary_cells"],
    }
}

impl CheckSettings {
    /// Stock thresholds; the tail-test window scales with the horizon.
    pub fn defaults(t_end: f64) -> CheckSettings {
        CheckSettings {
            target_linf: 1e-3,
            u_floor: 1e-3,
            ft_window: 0.1 * t_end,
            ft_tol: 1e-4,
            l2_final: 1e-2,
            k1_slope: 1e-5,
            mass_floor: 1e-3,
            period_residual: 1e-8,
            orbit_contraction: 0.5,
            probe_tol: 1e-8,
            max_iters: 200,
            boundary_cells: 1.0,
        }
    }
}

fn parse_checks(tol: &mut Section, kind: ScenarioKind, t_end: f64) -> Result<CheckSettings> {
    let allowed = allowed_tolerance_keys(kind);
    let mut checks = CheckSettings::defaults(t_end);
    for &key in allowed {
        if key == "max_iters" {
            if let Some(v) = tol.take_usize("max_iters")? {
                if v == 0 {
                    return Err(Error::validation("max_iters must be >= 1"));
                }
                checks.max_iters = v;
            }
            continue;
        }
        if let Some(v) = tol.take_f64(key)? {
            positive(key, v)?;
            match key {
                "target_linf" => checks.target_linf = v,
                "u_floor" => checks.u_floor = v,
                "ft_window" => checks.ft_window = v,
                "ft_tol" => checks.ft_tol = v,
                "l2_final" => checks.l2_final = v,
                "k1_slope" => checks.k1_slope = v,
                "mass_floor" => checks.mass_floor = v,
                "period_residual" => checks.period_residual = v,
                "orbit_contraction" => checks.orbit_contraction = v,
                "probe_tol" => checks.probe_tol = v,
                "boundary_cells" => checks.boundary_cells = v,
                _ => unreachable!("key list above is exhaustive"),
            }
        }
    }
    if kind == ScenarioKind::Convergence && t_end < 3.0 * checks.ft_window {
        return Err(Error::validation(format!(
            "the tail test needs t_end >= 3 windows: t_end = {t_end}, ft_window = {}",
            checks.ft_window
        )));
    }
    Ok(checks)
}

fn parse_sweep(scenario: &mut Section, params: &mut Section, source: &mut Section) -> Result<SweepSpec> {
    let (axis_line, axis_name) = scenario.require_string("sweep_axis")?;
    let axis = match axis_name.as_str() {
        "f0" => SweepAxis::F0,
        "a" => SweepAxis::A,
        other => {
            return Err(Error::Config {
                line: axis_line,
                msg: format!("sweep_axis must be f0 or a, got '{other}'"),
            })
        }
    };
    let point_check = match scenario.take_string("point_check").as_deref() {
        None | Some("ode") => PointCheck::Ode,
        Some("pde") => PointCheck::Pde,
        Some(other) => {
            return Err(Error::validation(format!(
                "point_check must be ode or pde, got '{other}'"
            )))
        }
    };
    let r_min = positive("r_min", scenario.require_f64("r_min")?)?;
    let r_max = scenario.require_f64("r_max")?;
    let r_steps = scenario.require_usize("r_steps")?;
    let axis_min = scenario.require_f64("sweep_min")?;
    let axis_max = scenario.require_f64("sweep_max")?;
    let axis_steps = scenario.require_usize("sweep_steps")?;
    if r_max < r_min || axis_max < axis_min {
        return Err(Error::validation("sweep ranges must have max >= min"));
    }
    if r_steps < 2 || axis_steps < 2 {
        return Err(Error::validation("sweep needs at least 2 steps per axis"));
    }
    params.require_present()?;
    let d = positive("d", params.require_f64("d")?)?;
    let chi = params.require_f64("chi")?;
    if params.take_raw("r").is_some() {
        return Err(Error::validation("sweeps take r from the sweep range; drop [params] r"));
    }
    let (fixed_a, fixed_f0) = match axis {
        SweepAxis::F0 => {
            let a = params.require_f64("a")?;
            if a < 0.0 {
                return Err(Error::validation(format!("a must be >= 0, got {a}")));
            }
            source.forbid("sweep over f0")?;
            if axis_min < 0.0 {
                return Err(Error::validation("f0 sweep range must be nonnegative"));
            }
            (Some(a), None)
        }
        SweepAxis::A => {
            if params.take_raw("a").is_some() {
                return Err(Error::validation(
                    "a-axis sweeps take a from the sweep range; drop [params] a",
                ));
            }
            if axis_min < 0.0 {
                return Err(Error::validation("a sweep range must be nonnegative"));
            }
            let spec = parse_source(source, None)?;
            let SourceSpec::Constant(f0) = spec else {
                return Err(Error::validation("a-axis sweeps need a constant source"));
            };
            (None, Some(f0))
        }
    };
    Ok(SweepSpec {
        axis,
        point_check,
        d,
        chi,
        fixed_a,
        fixed_f0,
        r_min,
        r_max,
        r_steps,
        axis_min,
        axis_max,
        axis_steps,
    })
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut sections = split_sections(text)?;
    let mut scenario = sections.remove("scenario").unwrap();
    let mut params = sections.remove("params").unwrap();
    let mut source = sections.remove("source").unwrap();
    let mut grid_sec = sections.remove("grid").unwrap();
    let mut initial_sec = sections.remove("initial").unwrap();
    let mut run_sec = sections.remove("run").unwrap();
    let mut tol_sec = sections.remove("tolerances").unwrap();

    scenario.require_present()?;
    let (type_line, type_name) = scenario.require_string("type")?;
    let kind = ScenarioKind::from_name(&type_name, type_line)?;
    let output_dir = PathBuf::from(scenario.take_string("output_dir").unwrap_or_else(|| "out".into()));

    let run = parse_run(&mut run_sec, kind)?;
    let checks = parse_checks(&mut tol_sec, kind, run.t_end)?;
    let initial = parse_initial(&mut initial_sec)?;

    let needs_grid = kind.is_pde()
        || (kind == ScenarioKind::Sweep && {
            // peeking: point_check decides whether sweeps build grids; read
            // without consuming so parse_sweep sees it too
            matches!(
                scenario.entries.get("point_check").map(|e| e.value.as_str()),
                Some("pde")
            )
        });
    let grid = if needs_grid {
        Some(parse_grid(&mut grid_sec)?)
    } else {
        grid_sec.forbid(kind.name())?;
        None
    };

    let (params_v, source_v, sweep) = if kind == ScenarioKind::Sweep {
        let sweep = parse_sweep(&mut scenario, &mut params, &mut source)?;
        (None, None, Some(sweep))
    } else {
        params.require_present()?;
        let model = ModelParams::new(
            params.require_f64("d")?,
            params.require_f64("chi")?,
            params.require_f64("r")?,
            params.require_f64("a")?,
        )?;
        let spec = parse_source(&mut source, grid.as_ref())?;
        (Some(model), Some(spec), None)
    };

    // scenario-specific cross-field rules
    match kind {
        ScenarioKind::SteadyState => {
            if !matches!(source_v, Some(SourceSpec::Constant(_))) {
                return Err(Error::validation(
                    "steady_state studies the constant-supply dichotomy; use a constant source",
                ));
            }
        }
        ScenarioKind::OdeOnly | ScenarioKind::PeriodicA0 | ScenarioKind::PeriodicProbeAPos => {
            if matches!(source_v, Some(SourceSpec::SeparablePerturbed { .. })) {
                return Err(Error::validation(format!(
                    "scenario {} is spatially homogeneous; separable sources do not apply",
                    kind.name()
                )));
            }
            if !matches!(initial, InitialData::Constant { .. }) {
                return Err(Error::validation(format!(
                    "scenario {} takes constant initial data (the mean-system state)",
                    kind.name()
                )));
            }
        }
        _ => {}
    }
    if kind == ScenarioKind::PeriodicA0 {
        let a = params_v.as_ref().map(|p| p.a()).unwrap_or(0.0);
        if a != 0.0 {
            return Err(Error::validation(format!("periodic_a0 requires a = 0, got a = {a}")));
        }
    }
    if kind == ScenarioKind::PeriodicProbeAPos {
        let a = params_v.as_ref().map(|p| p.a()).unwrap_or(0.0);
        if a <= 0.0 {
            return Err(Error::validation(format!(
                "periodic_probe_a_pos requires a > 0, got a = {a}"
            )));
        }
    }
    if let Some(sweep_spec) = &sweep {
        match sweep_spec.point_check {
            PointCheck::Pde => {
                if run.dt.is_none() {
                    return Err(Error::validation("[run] is missing required key 'dt'"));
                }
            }
            PointCheck::Ode => {
                if run.dt.is_some() {
                    return Err(Error::validation(
                        "sweeps with point_check = ode do not take dt (no PDE stepping)",
                    ));
                }
                if !matches!(initial, InitialData::Constant { .. }) {
                    return Err(Error::validation(
                        "sweeps with point_check = ode take constant initial data",
                    ));
                }
            }
        }
    }

    for section in [&scenario, &params, &source, &grid_sec, &initial_sec, &run_sec, &tol_sec] {
        section.finish()?;
    }

    Ok(ScenarioConfig {
        kind,
        output_dir,
        params: params_v,
        source: source_v,
        grid,
        initial,
        run,
        checks,
        sweep,
    })
}
