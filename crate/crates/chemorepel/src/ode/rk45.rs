//! Embedded Dormand-Prince 4(5) integrator with PI step-size control.
//!
//! The systems integrated here (two or three coupled scalar equations with
//! logistic reaction and linear relaxation) are nonstiff throughout the
//! parameter ranges of interest, so an explicit pair with error control
//! beats implicit machinery on both cost and simplicity. Dense output works
//! by step-size alignment: the integrator shortens steps to land exactly on
//! each requested output time, so no interpolant is needed and every
//! reported sample is a genuine solution value of the step sequence.

use crate::error::{Error, Result};

// Dormand-Prince 5(4) tableau. The propagated solution is the fifth-order
// one (first-same-as-last: stage 7 doubles as stage 1 of the next step).
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the fifth- and fourth-order weights (error estimator).
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// PI controller constants, after Hairer's DOPRI5.
const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2; // steepest allowed shrink on accept
const FAC_MAX: f64 = 10.0; // steepest allowed growth

/// Fraction of the span below which the step size counts as underflowed.
const UNDERFLOW_FRACTION: f64 = 1e-14;

const MAX_STEPS: u64 = 20_000_000;

#[derive(Debug, Clone, Copy, Default)]
pub struct IntegratorStats {
    pub steps: u64,
    pub rejected: u64,
    pub max_local_error: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Rk45Options {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for Rk45Options {
    fn default() -> Self {
        Rk45Options { rel_tol: crate::tol::ODE_REL_VERIFY, abs_tol: crate::tol::ODE_ABS_VERIFY }
    }
}

impl Rk45Options {
    fn validate(&self) -> Result<()> {
        for (name, v) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(v.is_finite() && v > 0.0 && v <= 1e-2) {
                return Err(Error::domain(format!("{name} must lie in (0, 1e-2], got {v}")));
            }
        }
        Ok(())
    }
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

fn check_finite<const N: usize>(t: f64, y: &[f64; N]) -> Result<()> {
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric(format!("non-finite state at t = {t:.6e}")));
    }
    Ok(())
}

/// Sampled trajectory: one (t, state) pair per output time.
pub type Samples<const N: usize> = Vec<(f64, [f64; N])>;

/// Integrate y' = rhs(t, y) from `t0` to `t_end`, sampling at `output_times`.
///
/// Returns (samples, stats). Samples always start with (t0, y0); a final
/// sample at t_end is appended when the caller did not request it. Output
/// times must be strictly increasing and lie in (t0, t_end].
pub fn integrate<const N: usize>(
    rhs: &dyn Fn(f64, &[f64; N]) -> [f64; N],
    y0: [f64; N],
    t0: f64,
    t_end: f64,
    output_times: &[f64],
    opts: &Rk45Options,
) -> Result<(Samples<N>, IntegratorStats)> {
    opts.validate()?;
    if !(t_end.is_finite() && t_end > t0) {
        return Err(Error::domain(format!("t_end must exceed t0, got [{t0}, {t_end}]")));
    }
    check_finite(t0, &y0)?;
    let mut prev = t0;
    for &tq in output_times {
        if !(tq > prev) || tq > t_end * (1.0 + 1e-12) + 1e-300 {
            return Err(Error::domain(format!(
                "output times must be strictly increasing within ({t0}, {t_end}]; offending time {tq}"
            )));
        }
        prev = tq;
    }

    let span = t_end - t0;
    let mut samples = Vec::with_capacity(output_times.len() + 2);
    samples.push((t0, y0));

    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    check_finite(t, &k1)?;

    let mut h = initial_step(rhs, t0, &y0, &k1, t_end, opts);
    let mut stats = IntegratorStats::default();
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;
    let mut out_idx = 0;

    while t < t_end {
        if stats.steps >= MAX_STEPS {
            return Err(Error::numeric(format!("step budget exhausted at t = {t:.6e}")));
        }
        if h < UNDERFLOW_FRACTION * span {
            return Err(Error::Stiffness { t, h });
        }
        // never step past the end or past the next requested output time
        let mut target: Option<f64> = None;
        let mut hh = h.min(t_end - t);
        if out_idx < output_times.len() {
            let t_out = output_times[out_idx];
            if t + hh >= t_out {
                hh = t_out - t;
                target = Some(t_out);
            }
        } else if t + hh >= t_end {
            target = Some(t_end);
            hh = t_end - t;
        }

        let k2 = rhs(t + C2 * hh, &axpy(&y, hh, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * hh, &axpy(&y, hh, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(t + C4 * hh, &axpy(&y, hh, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(
            t + C5 * hh,
            &axpy(&y, hh, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = rhs(
            t + hh,
            &axpy(&y, hh, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = axpy(&y, hh, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = rhs(t + hh, &y_new);

        // weighted RMS error estimate over the 5th/4th-order difference
        let mut err_sq = 0.0;
        let mut finite = true;
        for i in 0..N {
            let e = hh
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / sc) * (e / sc);
            finite &= e.is_finite() && y_new[i].is_finite();
        }
        let err = (err_sq / N as f64).sqrt();
        stats.steps += 1;

        if finite && err <= 1.0 {
            stats.max_local_error = stats.max_local_error.max(err);
            y = y_new;
            k1 = k7;
            match target {
                Some(t_out) => {
                    t = t_out;
                    if out_idx < output_times.len() && t_out == output_times[out_idx] {
                        samples.push((t, y));
                        out_idx += 1;
                    }
                }
                None => t += hh,
            }
            // PI control: combine the fresh error with the previous one
            let fac11 = err.powf(EXPO1);
            let mut fac = fac11 / facold.powf(BETA);
            fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = hh / fac;
            if last_rejected {
                h_new = h_new.min(hh);
            }
            facold = err.max(1e-4);
            last_rejected = false;
            h = h_new;
        } else {
            stats.rejected += 1;
            last_rejected = true;
            let fac11 = if finite { err.powf(EXPO1) } else { 1.0 / FAC_MIN };
            h = hh / (fac11 / SAFETY).min(1.0 / FAC_MIN);
            if !h.is_finite() || h <= 0.0 {
                return Err(Error::numeric(format!("non-finite right-hand side at t = {t:.6e}")));
            }
        }
    }

    if samples.last().map(|(ts, _)| *ts) != Some(t_end) {
        samples.push((t_end, y));
    }
    Ok((samples, stats))
}

/// Hairer-style starting step: match the scale of y and y' and probe the
/// local second derivative with one Euler step.
fn initial_step<const N: usize>(
    rhs: &dyn Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    t_end: f64,
    opts: &Rk45Options,
) -> f64 {
    let span = t_end - t0;
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for i in 0..N {
        let sc = opts.abs_tol + opts.rel_tol * y0[i].abs();
        d0 += (y0[i] / sc) * (y0[i] / sc);
        d1 += (f0[i] / sc) * (f0[i] / sc);
    }
    d0 = (d0 / N as f64).sqrt();
    d1 = (d1 / N as f64).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);

    let y1 = axpy(y0, h0, &[(1.0, f0)]);
    let f1 = rhs(t0 + h0, &y1);
    let mut d2: f64 = 0.0;
    for i in 0..N {
        let sc = opts.abs_tol + opts.rel_tol * y0[i].abs();
        d2 += ((f1[i] - f0[i]) / sc) * ((f1[i] - f0[i]) / sc);
    }
    d2 = (d2 / N as f64).sqrt() / h0;

    let d_max = d1.max(d2);
    let h1 = if d_max <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d_max).powf(0.2)
    };
    h1.min(100.0 * h0).min(span)
}

/// Fixed-step variant used by the order-verification checks: propagates the
/// fifth-order solution with constant h (the final step is shortened) and no
/// error control.
pub fn integrate_fixed<const N: usize>(
    rhs: &dyn Fn(f64, &[f64; N]) -> [f64; N],
    y0: [f64; N],
    t0: f64,
    t_end: f64,
    h: f64,
) -> Result<[f64; N]> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::domain(format!("fixed step must be > 0, got {h}")));
    }
    if !(t_end > t0) {
        return Err(Error::domain("t_end must exceed t0"));
    }
    let mut t = t0;
    let mut y = y0;
    while t < t_end {
        let hh = h.min(t_end - t);
        let k1 = rhs(t, &y);
        let k2 = rhs(t + C2 * hh, &axpy(&y, hh, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * hh, &axpy(&y, hh, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(t + C4 * hh, &axpy(&y, hh, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(
            t + C5 * hh,
            &axpy(&y, hh, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = rhs(
            t + hh,
            &axpy(&y, hh, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        y = axpy(&y, hh, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        check_finite(t + hh, &y)?;
        t += hh;
    }
    Ok(y)
}
