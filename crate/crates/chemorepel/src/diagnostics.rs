//! Monitored functionals and the windowed decay test.
//!
//! Everything the runs report flows through here: the variance-type
//! functionals k1, k2, k3 that measure distance to the spatially homogeneous
//! reference, the entropy-type functionals F1, F2, gradient and Laplacian
//! norms, and their running time integrals. The windowed tail test turns
//! "k is time-integrable with bounded slope, hence k → 0" into a statement
//! checkable at a finite horizon: both the tail mean and the windowed
//! integral slope must drop below a tolerance.

use crate::error::{Error, Result};
use crate::model::{grad_l2_sq, integral, l2_norm_sq, neumann_laplacian, Field, Grid, SourceSpec};
use crate::ode::OdeState;

/// Cell values at or below this are treated as a positivity failure for the
/// logarithmic functional F1.
pub const F1_POSITIVITY_FLOOR: f64 = 1e-300;

/// One sampled row of monitored quantities.
///
/// `f1` and `f2` are `None` when their logarithms are undefined for the
/// sampled state (a positivity failure); this is recorded, never fatal.
/// `l2_u_err_sq` is computed by direct summation and equals `k1 + k2` up to
/// rounding; `l2_v_err_sq` likewise coincides with `k3` by definition. Both
/// routes are kept so the decomposition stays an observable cross-check.
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass_u: f64,
    pub mass_v: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub f1: Option<f64>,
    pub f2: Option<f64>,
    pub grad_u_sq: f64,
    pub grad_v_sq: f64,
    pub lap_v_sq: f64,
    pub l2_u_err_sq: f64,
    pub l2_v_err_sq: f64,
    pub f_inhomogeneity_sq: f64,
}

/// Running trapezoid integrals of the monitored nonnegative functionals.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CumulativeIntegrals {
    pub int_k1: f64,
    pub int_k2: f64,
    pub int_k3: f64,
    pub int_grad_u: f64,
    pub int_grad_v: f64,
    pub int_lap_v: f64,
    pub int_f_l1: f64,
}

/// Trapezoid accumulator over diagnostics samples; owned by one run.
#[derive(Debug, Default)]
pub struct CumulativeAccumulator {
    last: Option<(f64, [f64; 7])>,
    totals: CumulativeIntegrals,
}

impl CumulativeAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fold in one sample; `f_l1` is the L¹ inhomogeneity ∫|f − f̃| at the
    /// sample time. Returns the updated running totals.
    pub fn push(&mut self, rec: &DiagnosticsRecord, f_l1: f64) -> Result<CumulativeIntegrals> {
        let vals = [rec.k1, rec.k2, rec.k3, rec.grad_u_sq, rec.grad_v_sq, rec.lap_v_sq, f_l1];
        if let Some((t_prev, prev)) = self.last {
            if rec.t <= t_prev {
                return Err(Error::domain(format!(
                    "cumulative samples must advance in time: {} after {t_prev}",
                    rec.t
                )));
            }
            let h = rec.t - t_prev;
            let acc = [
                &mut self.totals.int_k1,
                &mut self.totals.int_k2,
                &mut self.totals.int_k3,
                &mut self.totals.int_grad_u,
                &mut self.totals.int_grad_v,
                &mut self.totals.int_lap_v,
                &mut self.totals.int_f_l1,
            ];
            for (slot, (p, c)) in acc.into_iter().zip(prev.iter().zip(vals.iter())) {
                *slot += 0.5 * h * (p + c);
            }
        }
        self.last = Some((rec.t, vals));
        Ok(self.totals)
    }

    pub fn totals(&self) -> CumulativeIntegrals {
        self.totals
    }
}

/// Spatial variance ∫u² − (∫u)², clamped at zero against rounding.
pub fn k1(u: &Field, grid: &Grid) -> Result<f64> {
    let mass = integral(u, grid)?;
    let sq = l2_norm_sq(u, grid)?;
    Ok((sq - mass * mass).max(0.0))
}

/// Squared gap between the field mass and the reference mean.
pub fn k2(mass_u: f64, u_tilde: f64) -> f64 {
    let d = mass_u - u_tilde;
    d * d
}

/// Squared L² distance of the chemical to the reference mean ∫(v − ṽ)².
pub fn k3(v: &Field, grid: &Grid, v_tilde: f64) -> Result<f64> {
    if !v_tilde.is_finite() {
        return Err(Error::domain(format!("reference mean must be finite, got {v_tilde}")));
    }
    let mass = integral(v, grid)?;
    let sq = l2_norm_sq(v, grid)?;
    // expand ∫(v−ṽ)² = ∫v² − 2ṽ∫v + ṽ² on the unit-measure grid
    Ok((sq - 2.0 * v_tilde * mass + v_tilde * v_tilde).max(0.0))
}

fn h_entropy(s: f64) -> f64 {
    s - 1.0 - s.ln()
}

/// Entropy distance ∫ h(u/ũ) with h(s) = s − 1 − ln s; zero iff u ≡ ũ.
pub fn lyapunov_f1(u: &Field, grid: &Grid, u_tilde: f64) -> Result<f64> {
    if !(u_tilde.is_finite() && u_tilde > F1_POSITIVITY_FLOOR) {
        return Err(Error::domain(format!(
            "reference mean must exceed the positivity floor, got {u_tilde:e}"
        )));
    }
    let mut acc = 0.0;
    for (idx, &val) in u.values().iter().enumerate() {
        if !(val > F1_POSITIVITY_FLOOR) {
            return Err(Error::domain(format!(
                "entropy functional undefined: cell {idx} holds {val:e}"
            )));
        }
        acc += h_entropy(val / u_tilde);
    }
    // h is convex with minimum 0; the sum can only dip below zero by rounding
    Ok((acc * grid.cell_measure()).max(0.0))
}

/// Log-mass gap ln(∫u) − ln ũ; sign-indefinite, zero iff the masses agree.
pub fn lyapunov_f2(mass_u: f64, u_tilde: f64) -> Result<f64> {
    if !(mass_u > 0.0 && u_tilde > 0.0 && mass_u.is_finite() && u_tilde.is_finite()) {
        return Err(Error::domain(format!(
            "log-mass gap needs positive masses, got ({mass_u:e}, {u_tilde:e})"
        )));
    }
    Ok(mass_u.ln() - u_tilde.ln())
}

/// Discrete ∫(Δ_h v)² with the solver's zero-Neumann stencil.
pub fn laplacian_l2_sq(v: &Field, grid: &Grid) -> Result<f64> {
    if grid.nx() < 3 || (grid.dimension() == 2 && grid.ny() < 3) {
        return Err(Error::domain(
            "Laplacian norm needs at least 3 cells per axis to be meaningful",
        ));
    }
    let lap = neumann_laplacian(v, grid)?;
    Ok(lap.iter().map(|l| l * l).sum::<f64>() * grid.cell_measure())
}

/// Verdict of the windowed decay test.
#[derive(Debug, Clone, Copy)]
pub struct TailTest {
    pub decaying: bool,
    pub tail_mean: f64,
    pub cumulative: f64,
    pub cumulative_slope: f64,
}

/// Windowed surrogate for "time-integrable with bounded slope implies decay":
/// requires both the mean of k over the trailing window and the windowed
/// integral slope to fall below `slope_tol`. A merely pointwise-decaying but
/// non-integrable series (such as 1/(1+t)) fails by design.
pub fn friedman_tello_tail_test(
    series: &[(f64, f64)],
    window: f64,
    slope_tol: f64,
) -> Result<TailTest> {
    if !(window.is_finite() && window > 0.0) {
        return Err(Error::domain(format!("window must be > 0, got {window}")));
    }
    if !(slope_tol.is_finite() && slope_tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be > 0, got {slope_tol}")));
    }
    if series.len() < 2 {
        return Err(Error::domain("tail test needs at least two samples"));
    }
    for pair in series.windows(2) {
        if !(pair[1].0 > pair[0].0) {
            return Err(Error::domain(format!(
                "series times must increase strictly: {} then {}",
                pair[0].0, pair[1].0
            )));
        }
    }
    for &(t, k) in series {
        if !k.is_finite() || k < 0.0 {
            return Err(Error::domain(format!("series values must be >= 0, got {k} at t = {t}")));
        }
    }
    let t0 = series[0].0;
    let t1 = series[series.len() - 1].0;
    if t1 - t0 < 3.0 * window {
        return Err(Error::domain(format!(
            "series span {} is shorter than three windows ({})",
            t1 - t0,
            3.0 * window
        )));
    }

    let mut cumulative = 0.0;
    for pair in series.windows(2) {
        cumulative += 0.5 * (pair[1].0 - pair[0].0) * (pair[0].1 + pair[1].1);
    }

    let t_cut = t1 - window;
    let mut tail_sum = 0.0;
    let mut tail_count = 0usize;
    for &(t, k) in series {
        if t >= t_cut {
            tail_sum += k;
            tail_count += 1;
        }
    }
    let tail_mean = tail_sum / tail_count as f64;

    // windowed integral, with the left end interpolated onto t_cut
    let mut windowed = 0.0;
    for pair in series.windows(2) {
        let (ta, ka) = pair[0];
        let (tb, kb) = pair[1];
        if tb <= t_cut {
            continue;
        }
        let (ta, ka) = if ta < t_cut {
            (t_cut, ka + (kb - ka) * (t_cut - ta) / (tb - ta))
        } else {
            (ta, ka)
        };
        windowed += 0.5 * (tb - ta) * (ka + kb);
    }
    let cumulative_slope = windowed / window;

    Ok(TailTest {
        decaying: tail_mean <= slope_tol && cumulative_slope <= slope_tol,
        tail_mean,
        cumulative,
        cumulative_slope,
    })
}

/// Assemble the full record for one sampled state against the homogeneous
/// reference (ũ, ṽ). The reference must carry the same time stamp within
/// `time_tol` (half a time step in practice).
#[allow(clippy::too_many_arguments)]
pub fn record(
    u: &Field,
    v: &Field,
    t: f64,
    reference: &OdeState,
    spec: &SourceSpec,
    grid: &Grid,
    time_tol: f64,
) -> Result<DiagnosticsRecord> {
    if (t - reference.t).abs() > time_tol {
        return Err(Error::domain(format!(
            "state at t = {t} paired with reference at t = {} (tolerance {time_tol})",
            reference.t
        )));
    }
    let mass_u = integral(u, grid)?;
    let mass_v = integral(v, grid)?;
    let (u_tilde, v_tilde) = (reference.u_tilde, reference.v_tilde);

    let k1_val = k1(u, grid)?;
    let k2_val = k2(mass_u, u_tilde);
    let k3_val = k3(v, grid, v_tilde)?;

    let f1 = if u_tilde > F1_POSITIVITY_FLOOR && u.min() > F1_POSITIVITY_FLOOR {
        Some(lyapunov_f1(u, grid, u_tilde)?)
    } else {
        None
    };
    let f2 = if mass_u > 0.0 && u_tilde > 0.0 { Some(lyapunov_f2(mass_u, u_tilde)?) } else { None };

    // direct summation route for the L2 errors; k1 + k2 must reproduce the
    // u-error up to rounding
    let measure = grid.cell_measure();
    let l2_u_err_sq =
        u.values().iter().map(|&x| (x - u_tilde) * (x - u_tilde)).sum::<f64>() * measure;
    let l2_v_err_sq =
        v.values().iter().map(|&x| (x - v_tilde) * (x - v_tilde)).sum::<f64>() * measure;

    let f_t = spec.sample(grid, t)?;
    let f_inhomogeneity_sq = k1(&f_t, grid)?;

    Ok(DiagnosticsRecord {
        t,
        mass_u,
        mass_v,
        k1: k1_val,
        k2: k2_val,
        k3: k3_val,
        f1,
        f2,
        grad_u_sq: grad_l2_sq(u, grid)?,
        grad_v_sq: grad_l2_sq(v, grid)?,
        lap_v_sq: laplacian_l2_sq(v, grid)?,
        l2_u_err_sq,
        l2_v_err_sq,
        f_inhomogeneity_sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DecaySignal, PeriodicSignal};
    use proptest::prelude::*;

    const H_AT_2: f64 = 0.306_852_819_440_054_7;
    const F1_TWO_CELLS: f64 = 0.143_841_036_225_890_45;
    const PI4_HALF: f64 = 48.704_545_517_001_21;

    #[test]
    fn k1_vanishes_on_constants() {
        let g = Grid::line(10).unwrap();
        assert_eq!(k1(&Field::constant(&g, 3.3), &g).unwrap(), 0.0);
    }

    #[test]
    fn k1_two_cell_example() {
        let g = Grid::line(2).unwrap();
        let f = Field::from_values(&g, vec![0.0, 2.0]).unwrap();
        assert_eq!(k1(&f, &g).unwrap(), 1.0);
    }

    #[test]
    fn k1_of_cosine_perturbation_matches_the_analytic_variance() {
        // u = 1 + eps*cos(pi x): variance eps^2/2 + O(dx^2)
        let g = Grid::line(512).unwrap();
        let eps = 0.3;
        let f = Field::from_fn(&g, |x, _| 1.0 + eps * (std::f64::consts::PI * x).cos());
        let got = k1(&f, &g).unwrap();
        assert!((got - eps * eps / 2.0).abs() <= 1e-5, "got {got}");
    }

    #[test]
    fn k2_examples() {
        assert_eq!(k2(1.0, 1.0), 0.0);
        assert!((k2(0.4, 0.3) - 0.01).abs() <= 1e-17);
        assert_eq!(k2(0.7, 0.2), k2(0.2, 0.7));
    }

    #[test]
    fn k3_constant_offsets() {
        let g = Grid::line(6).unwrap();
        let v = Field::constant(&g, 1.5);
        assert_eq!(k3(&v, &g, 1.5).unwrap(), 0.0);
        assert!((k3(&v, &g, 1.4).unwrap() - 0.01).abs() <= 1e-15);
    }

    #[test]
    fn k3_decomposes_into_variance_plus_mass_gap() {
        let g = Grid::line(64).unwrap();
        let v = Field::from_fn(&g, |x, _| 0.8 + 0.2 * (7.0 * x).sin());
        let v_tilde = 0.55;
        let mass = integral(&v, &g).unwrap();
        let variance = k1(&v, &g).unwrap();
        let direct = k3(&v, &g, v_tilde).unwrap();
        assert!((direct - (variance + k2(mass, v_tilde))).abs() <= 1e-12);
    }

    #[test]
    fn f1_is_zero_at_the_reference() {
        let g = Grid::line(5).unwrap();
        assert_eq!(lyapunov_f1(&Field::constant(&g, 0.7), &g, 0.7).unwrap(), 0.0);
    }

    #[test]
    fn f1_at_twice_the_reference() {
        let g = Grid::line(4).unwrap();
        let got = lyapunov_f1(&Field::constant(&g, 1.6), &g, 0.8).unwrap();
        assert!((got - H_AT_2).abs() <= 1e-15);
    }

    #[test]
    fn f1_two_cell_example() {
        // cells at 0.5 and 1.5 times the reference; value independent of scale
        for u_tilde in [1.0, 0.8] {
            let g = Grid::line(2).unwrap();
            let f = Field::from_values(&g, vec![0.5 * u_tilde, 1.5 * u_tilde]).unwrap();
            let got = lyapunov_f1(&f, &g, u_tilde).unwrap();
            assert!((got - F1_TWO_CELLS).abs() <= 1e-15, "got {got:.17e}");
        }
    }

    #[test]
    fn f1_rejects_nonpositive_cells() {
        let g = Grid::line(3).unwrap();
        let f = Field::from_values(&g, vec![1.0, 0.0, 1.0]).unwrap();
        let err = lyapunov_f1(&f, &g, 1.0).unwrap_err();
        assert!(err.to_string().contains("cell 1"), "got: {err}");
    }

    #[test]
    fn f2_examples() {
        assert_eq!(lyapunov_f2(1.0, 1.0).unwrap(), 0.0);
        assert!((lyapunov_f2(std::f64::consts::E, 1.0).unwrap() - 1.0).abs() <= 1e-15);
        let a = lyapunov_f2(0.3, 1.7).unwrap();
        let b = lyapunov_f2(1.7, 0.3).unwrap();
        assert!((a + b).abs() <= 1e-16);
        assert!(lyapunov_f2(0.0, 1.0).is_err());
    }

    #[test]
    fn laplacian_norm_of_constant_is_zero() {
        let g = Grid::line(8).unwrap();
        assert_eq!(laplacian_l2_sq(&Field::constant(&g, 2.0), &g).unwrap(), 0.0);
    }

    #[test]
    fn laplacian_norm_needs_three_cells() {
        let g = Grid::line(2).unwrap();
        assert!(laplacian_l2_sq(&Field::constant(&g, 1.0), &g).is_err());
    }

    #[test]
    fn laplacian_norm_of_cosine_converges_to_the_analytic_value() {
        let mut last_gap = f64::INFINITY;
        for n in [64usize, 128, 256] {
            let g = Grid::line(n).unwrap();
            let v = Field::from_fn(&g, |x, _| (std::f64::consts::PI * x).cos());
            let gap = (laplacian_l2_sq(&v, &g).unwrap() - PI4_HALF).abs();
            assert!(gap < last_gap);
            last_gap = gap;
        }
        assert!(last_gap <= PI4_HALF * 1e-3);
    }

    #[test]
    fn tail_test_accepts_exponential_decay() {
        let series: Vec<(f64, f64)> = (0..=300).map(|k| {
            let t = 0.1 * k as f64;
            (t, (-t).exp())
        }).collect();
        let res = friedman_tello_tail_test(&series, 5.0, 1e-3).unwrap();
        assert!(res.decaying);
        assert!((res.cumulative - 1.0).abs() <= 2e-3, "cumulative {}", res.cumulative);
        assert!(res.tail_mean <= 1e-9);
    }

    #[test]
    fn tail_test_rejects_a_constant() {
        let series: Vec<(f64, f64)> = (0..=100).map(|k| (0.3 * k as f64, 0.5)).collect();
        let res = friedman_tello_tail_test(&series, 3.0, 1e-3).unwrap();
        assert!(!res.decaying);
        assert!((res.tail_mean - 0.5).abs() <= 1e-15);
        assert!((res.cumulative - 0.5 * 30.0).abs() <= 1e-12);
    }

    #[test]
    fn tail_test_rejects_slow_nonintegrable_decay() {
        // 1/(1+t) tends to zero pointwise but its integral diverges; the
        // windowed test must say no at moderate horizons
        let series: Vec<(f64, f64)> = (0..=600).map(|k| {
            let t = 0.1 * k as f64;
            (t, 1.0 / (1.0 + t))
        }).collect();
        let res = friedman_tello_tail_test(&series, 6.0, 1e-3).unwrap();
        assert!(!res.decaying);
        assert!(res.tail_mean > 1e-2);
    }

    #[test]
    fn tail_test_input_validation() {
        let ok: Vec<(f64, f64)> = (0..=50).map(|k| (k as f64, 0.0)).collect();
        assert!(friedman_tello_tail_test(&ok, 5.0, 1e-4).is_ok());
        // unsorted
        let mut bad = ok.clone();
        bad.swap(3, 4);
        assert!(friedman_tello_tail_test(&bad, 5.0, 1e-4).is_err());
        // negative value
        let mut neg = ok.clone();
        neg[7].1 = -1e-3;
        assert!(friedman_tello_tail_test(&neg, 5.0, 1e-4).is_err());
        // span shorter than three windows
        assert!(friedman_tello_tail_test(&ok, 20.0, 1e-4).is_err());
    }

    #[test]
    fn cumulative_integrals_are_monotone() {
        let g = Grid::line(16).unwrap();
        let spec = SourceSpec::constant(1.0).unwrap();
        let mut acc = CumulativeAccumulator::new();
        let mut prev = CumulativeIntegrals::default();
        for k in 0..=20 {
            let t = 0.5 * k as f64;
            let u = Field::from_fn(&g, |x, _| 1.0 + 0.1 * (x + t).sin());
            let v = Field::constant(&g, 1.0);
            let reference = OdeState { u_tilde: 1.0, v_tilde: 1.0, t };
            let rec = record(&u, &v, t, &reference, &spec, &g, 1e-9).unwrap();
            let totals = acc.push(&rec, 0.0).unwrap();
            for (now, before) in [
                (totals.int_k1, prev.int_k1),
                (totals.int_k2, prev.int_k2),
                (totals.int_k3, prev.int_k3),
                (totals.int_grad_u, prev.int_grad_u),
                (totals.int_grad_v, prev.int_grad_v),
                (totals.int_lap_v, prev.int_lap_v),
                (totals.int_f_l1, prev.int_f_l1),
            ] {
                assert!(now >= before);
            }
            prev = totals;
        }
        assert!(prev.int_k1 > 0.0);
        // reused accumulator rejects non-advancing time
        let u = Field::constant(&g, 1.0);
        let reference = OdeState { u_tilde: 1.0, v_tilde: 1.0, t: 10.0 };
        let rec = record(&u, &u, 10.0, &reference, &spec, &g, 1e-9).unwrap();
        assert!(acc.push(&rec, 0.0).is_err());
    }

    #[test]
    fn record_at_equilibrium_is_all_zeros() {
        let g = Grid::line(32).unwrap();
        let spec = SourceSpec::constant(1.0).unwrap();
        let u = Field::constant(&g, 1.0 / 3.0);
        let v = Field::constant(&g, 4.0 / 3.0);
        let reference = OdeState { u_tilde: 1.0 / 3.0, v_tilde: 4.0 / 3.0, t: 2.0 };
        let rec = record(&u, &v, 2.0, &reference, &spec, &g, 1e-9).unwrap();
        for (name, val) in [
            ("k1", rec.k1),
            ("k2", rec.k2),
            ("k3", rec.k3),
            ("f1", rec.f1.unwrap()),
            ("f2", rec.f2.unwrap()),
            ("grad_u", rec.grad_u_sq),
            ("grad_v", rec.grad_v_sq),
            ("lap_v", rec.lap_v_sq),
            ("l2_u", rec.l2_u_err_sq),
            ("l2_v", rec.l2_v_err_sq),
            ("f_inhom", rec.f_inhomogeneity_sq),
        ] {
            assert!(val.abs() <= 1e-10, "{name} = {val:e}");
        }
    }

    #[test]
    fn record_flags_f1_as_missing_instead_of_failing() {
        let g = Grid::line(4).unwrap();
        let spec = SourceSpec::constant(0.5).unwrap();
        let u = Field::from_values(&g, vec![0.5, 0.0, 0.5, 0.5]).unwrap();
        let v = Field::constant(&g, 0.5);
        let reference = OdeState { u_tilde: 0.4, v_tilde: 0.5, t: 0.0 };
        let rec = record(&u, &v, 0.0, &reference, &spec, &g, 1e-9).unwrap();
        assert!(rec.f1.is_none());
        assert!(rec.f2.is_some());
    }

    #[test]
    fn record_rejects_mismatched_time_stamps() {
        let g = Grid::line(4).unwrap();
        let spec = SourceSpec::constant(0.5).unwrap();
        let u = Field::constant(&g, 1.0);
        let reference = OdeState { u_tilde: 1.0, v_tilde: 0.5, t: 1.0 };
        assert!(record(&u, &u, 1.2, &reference, &spec, &g, 0.05).is_err());
    }

    #[test]
    fn record_sees_the_source_inhomogeneity() {
        // separable source: the spatial variance of f at t=0 must show up
        let g = Grid::line(64).unwrap();
        let ftilde =
            PeriodicSignal { mean_level: 1.0, amplitude: 0.25, period: 1.0, phase: 0.0 };
        let p = DecaySignal { scale: 1.0, rate: 1.0 };
        let q = Field::from_fn(&g, |x, _| (std::f64::consts::TAU * x).cos());
        let spec = SourceSpec::separable(ftilde, p, q, &g).unwrap();
        let u = Field::constant(&g, 1.0);
        let reference = OdeState { u_tilde: 1.0, v_tilde: 1.0, t: 0.0 };
        let rec = record(&u, &u, 0.0, &reference, &spec, &g, 1e-9).unwrap();
        // variance of cos(2 pi x) is 1/2 at p(0) = 1
        assert!((rec.f_inhomogeneity_sq - 0.5).abs() <= 1e-3, "got {}", rec.f_inhomogeneity_sq);
    }

    proptest! {
        // the orthogonal decomposition ||u - ũ||² = k1 + k2 on random fields
        #[test]
        fn l2_error_decomposes_into_k1_plus_k2(
            vals in proptest::collection::vec(0.1f64..10.0, 64),
            u_tilde in 0.1f64..10.0,
        ) {
            let g = Grid::line(64).unwrap();
            let u = Field::from_values(&g, vals).unwrap();
            let spec = SourceSpec::constant(1.0).unwrap();
            let reference = OdeState { u_tilde, v_tilde: 1.0, t: 0.0 };
            let rec = record(&u, &u, 0.0, &reference, &spec, &g, 1e-9).unwrap();
            let combined = rec.k1 + rec.k2;
            let scale = rec.l2_u_err_sq.max(combined).max(1e-30);
            prop_assert!((rec.l2_u_err_sq - combined).abs() <= 1e-10 * scale);
        }

        // variance is invariant under constant shifts
        #[test]
        fn k1_ignores_constant_shifts(
            vals in proptest::collection::vec(0.0f64..5.0, 32),
            shift in -3.0f64..3.0,
        ) {
            let g = Grid::line(32).unwrap();
            let u = Field::from_values(&g, vals.clone()).unwrap();
            let shifted = Field::from_values(&g, vals.iter().map(|v| v + shift).collect()).unwrap();
            let a = k1(&u, &g).unwrap();
            let b = k1(&shifted, &g).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }
}
