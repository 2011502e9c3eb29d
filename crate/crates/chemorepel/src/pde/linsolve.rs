//! Linear solvers for the implicit diffusion updates.
//!
//! The 1D operators are tridiagonal and strictly diagonally dominant, so a
//! direct Thomas sweep without pivoting is exact to rounding. The 2D
//! operators are symmetric positive definite five-point stencils applied
//! matrix-free through conjugate gradients with a deterministic, fixed-order
//! reduction.

use crate::error::{Error, Result};

/// Solve a tridiagonal system by forward elimination and back substitution.
/// `sub` and `sup` hold the n−1 off-diagonal entries; the matrix must be
/// nonsingular with nonvanishing pivots (diagonal dominance suffices).
pub fn solve_tridiagonal(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::domain("tridiagonal system is empty"));
    }
    if sub.len() != n - 1 || sup.len() != n - 1 || rhs.len() != n {
        return Err(Error::shape(format!(
            "tridiagonal shapes inconsistent: diag {n}, sub {}, sup {}, rhs {}",
            sub.len(),
            sup.len(),
            rhs.len()
        )));
    }
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot.abs() < 1e-300 {
        return Err(Error::Solver("zero pivot in tridiagonal elimination".into()));
    }
    c_prime[0] = if n > 1 { sup[0] / pivot } else { 0.0 };
    d_prime[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - sub[i - 1] * c_prime[i - 1];
        if pivot.abs() < 1e-300 || !pivot.is_finite() {
            return Err(Error::Solver(format!("degenerate pivot at row {i}")));
        }
        if i < n - 1 {
            c_prime[i] = sup[i] / pivot;
        }
        d_prime[i] = (rhs[i] - sub[i - 1] * d_prime[i - 1]) / pivot;
    }
    let mut x = d_prime;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c_prime[i] * next;
    }
    Ok(x)
}

/// Conjugate gradients on a symmetric positive definite operator given as a
/// matrix-free application. `x` carries the initial guess in and the
/// solution out; convergence is ‖b − Ax‖₂ ≤ rel_tol·‖b‖₂.
pub fn conjugate_gradient(
    apply: &mut dyn FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iters: usize,
) -> Result<usize> {
    let n = b.len();
    if x.len() != n {
        return Err(Error::shape(format!("guess length {} against rhs length {n}", x.len())));
    }
    let norm_b = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm_b == 0.0 {
        x.fill(0.0);
        return Ok(0);
    }
    let target = rel_tol * norm_b;

    let mut ax = vec![0.0; n];
    apply(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, axi)| bi - axi).collect();
    let mut rs_old: f64 = r.iter().map(|v| v * v).sum();
    if rs_old.sqrt() <= target {
        return Ok(0);
    }
    let mut p = r.clone();
    let mut ap = vec![0.0; n];

    for iter in 1..=max_iters {
        apply(&p, &mut ap);
        let p_ap: f64 = p.iter().zip(&ap).map(|(pi, api)| pi * api).sum();
        if !(p_ap > 0.0) {
            return Err(Error::Solver(format!(
                "operator lost positive definiteness (p·Ap = {p_ap:e} at iteration {iter})"
            )));
        }
        let alpha = rs_old / p_ap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rs_new: f64 = r.iter().map(|v| v * v).sum();
        if rs_new.sqrt() <= target {
            return Ok(iter);
        }
        let beta = rs_new / rs_old;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rs_old = rs_new;
    }
    Err(Error::Solver(format!(
        "conjugate gradients stalled at relative residual {:e} after {max_iters} iterations",
        rs_old.sqrt() / norm_b
    )))
}
