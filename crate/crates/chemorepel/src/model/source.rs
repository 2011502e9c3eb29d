use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::model::field::{check_field, integral, Field};
use crate::model::grid::Grid;

/// Samples per period used by the construction-time nonnegativity scan.
const NONNEG_SAMPLES: usize = 2048;

/// f̃(t) = mean_level + amplitude * sin(2π (t + phase) / period)
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSignal {
    pub mean_level: f64,
    pub amplitude: f64,
    pub period: f64,
    pub phase: f64,
}

impl PeriodicSignal {
    pub fn eval(&self, t: f64) -> f64 {
        self.mean_level + self.amplitude * (TAU * (t + self.phase) / self.period).sin()
    }

    /// Exact sup norm of the sinusoid.
    pub fn sup_norm(&self) -> f64 {
        self.mean_level + self.amplitude.abs()
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mean", self.mean_level),
            ("amplitude", self.amplitude),
            ("period", self.period),
            ("phase", self.phase),
        ] {
            if !v.is_finite() {
                return Err(Error::domain(format!("periodic signal {name} must be finite")));
            }
        }
        if self.period <= 0.0 {
            return Err(Error::domain(format!(
                "periodic signal period must be > 0, got {}",
                self.period
            )));
        }
        Ok(())
    }
}

/// p(t) = scale * exp(-rate * t), integrable and square-integrable on (0, ∞).
#[derive(Debug, Clone, PartialEq)]
pub struct DecaySignal {
    pub scale: f64,
    pub rate: f64,
}

impl DecaySignal {
    pub fn eval(&self, t: f64) -> f64 {
        self.scale * (-self.rate * t).exp()
    }
}

/// Declarative description of the supply term f(x, t) and its spatially
/// homogeneous limit f̃(t).
///
/// The family is closed under three shapes: a constant, a homogeneous
/// sinusoid, and the separable form f̃(t) + p(t) q(x) whose perturbation
/// decays exponentially, so the inhomogeneous part is integrable in time by
/// construction. Construction scans one period (and the q bounds) and fails
/// if f can go negative.
#[derive(Debug, Clone)]
pub enum SourceSpec {
    Constant(f64),
    HomogeneousPeriodic(PeriodicSignal),
    SeparablePerturbed { ftilde: PeriodicSignal, p: DecaySignal, q: Field },
}

impl SourceSpec {
    pub fn constant(f0: f64) -> Result<SourceSpec> {
        if !f0.is_finite() || f0 < 0.0 {
            return Err(Error::domain(format!("constant source level must be >= 0, got {f0}")));
        }
        Ok(SourceSpec::Constant(f0))
    }

    pub fn homogeneous_periodic(ftilde: PeriodicSignal) -> Result<SourceSpec> {
        ftilde.validate()?;
        scan_nonnegative(&ftilde, None)?;
        Ok(SourceSpec::HomogeneousPeriodic(ftilde))
    }

    /// `q` is bound to `grid`; evaluation against another grid is a shape error.
    pub fn separable(
        ftilde: PeriodicSignal,
        p: DecaySignal,
        q: Field,
        grid: &Grid,
    ) -> Result<SourceSpec> {
        ftilde.validate()?;
        if !(p.rate.is_finite() && p.rate > 0.0) {
            return Err(Error::domain(format!(
                "decay rate must be > 0 for an integrable perturbation, got {}",
                p.rate
            )));
        }
        if !p.scale.is_finite() {
            return Err(Error::domain("decay scale must be finite"));
        }
        check_field(&q, grid, "source q")?;
        scan_nonnegative(&ftilde, Some((&p, q.min(), q.max())))?;
        Ok(SourceSpec::SeparablePerturbed { ftilde, p, q })
    }

    /// f at one cell. Constant sources ignore the cell index.
    pub fn eval(&self, cell_index: usize, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::domain(format!("source evaluated at negative time {t}")));
        }
        match self {
            SourceSpec::Constant(f0) => Ok(*f0),
            SourceSpec::HomogeneousPeriodic(sig) => Ok(sig.eval(t)),
            SourceSpec::SeparablePerturbed { ftilde, p, q } => {
                let values = q.values();
                let qv = values.get(cell_index).ok_or_else(|| {
                    Error::shape(format!(
                        "cell index {cell_index} out of range for source grid of {} cells",
                        values.len()
                    ))
                })?;
                Ok(ftilde.eval(t) + p.eval(t) * qv)
            }
        }
    }

    /// The spatially homogeneous limit f̃(t).
    pub fn eval_homogeneous(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::domain(format!("source evaluated at negative time {t}")));
        }
        match self {
            SourceSpec::Constant(f0) => Ok(*f0),
            SourceSpec::HomogeneousPeriodic(sig) => Ok(sig.eval(t)),
            SourceSpec::SeparablePerturbed { ftilde, .. } => Ok(ftilde.eval(t)),
        }
    }

    /// Period of f̃ where one is declared; constants have none.
    pub fn period(&self) -> Option<f64> {
        match self {
            SourceSpec::Constant(_) => None,
            SourceSpec::HomogeneousPeriodic(sig) => Some(sig.period),
            SourceSpec::SeparablePerturbed { ftilde, .. } => Some(ftilde.period),
        }
    }

    /// Period-average of f̃ (closed form: the sine integrates away).
    pub fn ftilde_mean(&self) -> f64 {
        match self {
            SourceSpec::Constant(f0) => *f0,
            SourceSpec::HomogeneousPeriodic(sig) => sig.mean_level,
            SourceSpec::SeparablePerturbed { ftilde, .. } => ftilde.mean_level,
        }
    }

    /// Sup norm of f̃ in closed form.
    pub fn ftilde_sup(&self) -> f64 {
        match self {
            SourceSpec::Constant(f0) => *f0,
            SourceSpec::HomogeneousPeriodic(sig) => sig.sup_norm(),
            SourceSpec::SeparablePerturbed { ftilde, .. } => ftilde.sup_norm(),
        }
    }

    pub fn ftilde_signal(&self) -> Option<&PeriodicSignal> {
        match self {
            SourceSpec::Constant(_) => None,
            SourceSpec::HomogeneousPeriodic(sig) => Some(sig),
            SourceSpec::SeparablePerturbed { ftilde, .. } => Some(ftilde),
        }
    }

    /// Materialize f(·, t) on a grid.
    pub fn sample(&self, grid: &Grid, t: f64) -> Result<Field> {
        if t < 0.0 {
            return Err(Error::domain(format!("source evaluated at negative time {t}")));
        }
        match self {
            SourceSpec::Constant(f0) => Ok(Field::constant(grid, *f0)),
            SourceSpec::HomogeneousPeriodic(sig) => Ok(Field::constant(grid, sig.eval(t))),
            SourceSpec::SeparablePerturbed { ftilde, p, q } => {
                check_field(q, grid, "source q")?;
                let ft = ftilde.eval(t);
                let pt = p.eval(t);
                let values = q.values().iter().map(|qv| ft + pt * qv).collect();
                Field::from_values(grid, values)
            }
        }
    }

    /// ∫ |f(·, t) − f̃(t)| over the grid; zero for homogeneous sources.
    pub fn inhomogeneity_l1(&self, grid: &Grid, t: f64) -> Result<f64> {
        match self {
            SourceSpec::SeparablePerturbed { p, q, .. } => {
                check_field(q, grid, "source q")?;
                let pt = p.eval(t).abs();
                let abs_q = Field::from_values(grid, q.values().iter().map(|v| v.abs()).collect())?;
                Ok(pt * integral(&abs_q, grid)?)
            }
            _ => Ok(0.0),
        }
    }
}

/// Scan f̃ (plus the extremal q arm when present) over one period.
/// The decay factor shrinks across later periods, so the first period
/// together with bare f̃ bounds all t >= 0 from below.
fn scan_nonnegative(
    ftilde: &PeriodicSignal,
    perturbation: Option<(&DecaySignal, f64, f64)>,
) -> Result<()> {
    let period = ftilde.period;
    for k in 0..=NONNEG_SAMPLES {
        let t = period * k as f64 / NONNEG_SAMPLES as f64;
        let base = ftilde.eval(t);
        let worst = match perturbation {
            None => base,
            Some((p, q_min, q_max)) => {
                let pt = p.eval(t);
                base + (pt * q_min).min(pt * q_max)
            }
        };
        if worst < 0.0 || base < 0.0 {
            return Err(Error::domain(format!(
                "source takes negative value {:.6e} at t = {:.6} within the first period",
                worst.min(base),
                t
            )));
        }
    }
    Ok(())
}
