//! Matrix-free preconditioned conjugate gradients in a weighted inner
//! product. The stencil operators of this crate are self-adjoint with respect
//! to ⟨a,b⟩ = Σ wᵢ aᵢ bᵢ with the dual-cell weights wᵢ > 0, so CG applies
//! verbatim with that inner product; a Jacobi preconditioner (also
//! self-adjoint in it) handles the weight spread near the axes.

use alloc::vec;
use core::fmt;

/// A linear operator, self-adjoint and (when the solve is well posed)
/// positive definite in the weighted inner product it reports.
pub trait WeightedOp {
    fn len(&self) -> usize;
    /// y ← A x
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// Inner-product weights, strictly positive.
    fn weights(&self) -> &[f64];
    /// Operator diagonal, for Jacobi preconditioning.
    fn diag(&self) -> &[f64];
}

pub fn wdot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += w[i] * a[i] * b[i];
    }
    acc
}

pub fn wnorm(w: &[f64], a: &[f64]) -> f64 {
    libm::sqrt(wdot(w, a, a))
}

#[derive(Debug, Clone, Copy)]
pub struct CgOutcome {
    pub iterations: usize,
    /// ‖b − Ax‖_w / ‖b‖_w at exit.
    pub rel_residual: f64,
}

#[derive(Debug, Clone, Copy)]
pub enum CgError {
    /// Encountered ⟨p, Ap⟩ ≤ 0: the operator is not positive definite on the
    /// explored subspace. The iterate so far is discarded by the caller.
    IndefiniteOperator { iteration: usize, curvature: f64 },
    /// Iteration budget exhausted before the tolerance was met.
    NotConverged { rel_residual: f64 },
}

impl fmt::Display for CgError {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CgError::IndefiniteOperator {
                iteration,
                curvature,
            } => write!(
                fmt,
                "nonpositive curvature {curvature:.3e} at CG iteration {iteration}"
            ),
            CgError::NotConverged { rel_residual } => {
                write!(fmt, "CG stalled at relative residual {rel_residual:.3e}")
            }
        }
    }
}

impl core::error::Error for CgError {}

/// Solves A x = b to relative residual `tol` (in the weighted norm), starting
/// from the current content of `x`. Jacobi-preconditioned.
pub fn solve_cg(
    op: &impl WeightedOp,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iters: usize,
) -> Result<CgOutcome, CgError> {
    let n = op.len();
    debug_assert_eq!(b.len(), n);
    debug_assert_eq!(x.len(), n);
    let w = op.weights();
    let d = op.diag();

    let b_norm = wnorm(w, b);
    if b_norm == 0.0 {
        x.fill(0.0);
        return Ok(CgOutcome {
            iterations: 0,
            rel_residual: 0.0,
        });
    }

    let mut r = vec![0.0; n];
    let mut q = vec![0.0; n];
    op.apply(x, &mut q);
    for i in 0..n {
        r[i] = b[i] - q[i];
    }

    let precond = |r: &[f64], z: &mut [f64]| {
        for i in 0..r.len() {
            z[i] = r[i] / d[i];
        }
    };

    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rho = wdot(w, &r, &z);

    let mut res = wnorm(w, &r) / b_norm;
    if res <= tol {
        return Ok(CgOutcome {
            iterations: 0,
            rel_residual: res,
        });
    }

    for it in 1..=max_iters {
        op.apply(&p, &mut q);
        let curvature = wdot(w, &p, &q);
        if curvature <= 0.0 {
            return Err(CgError::IndefiniteOperator {
                iteration: it,
                curvature,
            });
        }
        let alpha = rho / curvature;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        res = wnorm(w, &r) / b_norm;
        if res <= tol {
            return Ok(CgOutcome {
                iterations: it,
                rel_residual: res,
            });
        }
        precond(&r, &mut z);
        let rho_next = wdot(w, &r, &z);
        let beta = rho_next / rho;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        rho = rho_next;
    }

    Err(CgError::NotConverged { rel_residual: res })
}
