//! Residual checks for the defining identities of isometries, projectors,
//! POVMs and observables.

use super::linalg::{frobenius, hermitian_residual, identity, min_eigenvalue, CMatrix};
use super::spectral::resolution_residual;

/// Outcome of a check: the Frobenius residual and whether it is within tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Check {
    pub holds: bool,
    pub residual: f64,
}

impl Check {
    fn new(residual: f64, tol: f64) -> Self {
        Self {
            holds: residual <= tol,
            residual,
        }
    }
}

pub fn is_isometry(m: &CMatrix, tol_op: f64) -> Check {
    Check::new(frobenius(&(m.adjoint() * m - identity(m.ncols()))), tol_op)
}

pub fn is_unitary(m: &CMatrix, tol_op: f64) -> Check {
    if !m.is_square() {
        return Check::new(f64::INFINITY, tol_op);
    }
    let a = frobenius(&(m.adjoint() * m - identity(m.ncols())));
    let b = frobenius(&(m * m.adjoint() - identity(m.nrows())));
    Check::new(a.max(b), tol_op)
}

pub fn is_projector(m: &CMatrix, tol_op: f64) -> Check {
    if !m.is_square() {
        return Check::new(f64::INFINITY, tol_op);
    }
    let idem = frobenius(&(m * m - m));
    Check::new(idem.max(hermitian_residual(m)), tol_op)
}

/// Positivity (minimum eigenvalue ≥ −tol) and completeness `Σ Λ(k) = I`.
/// A negative eigenvalue contributes its magnitude to the residual.
pub fn is_povm(effects: &[&CMatrix], tol_op: f64) -> Check {
    let Some(first) = effects.first() else {
        return Check::new(f64::INFINITY, tol_op);
    };
    let d = first.nrows();
    let mut sum = CMatrix::zeros(d, d);
    let mut residual: f64 = 0.0;
    for e in effects {
        if e.nrows() != d || e.ncols() != d {
            return Check::new(f64::INFINITY, tol_op);
        }
        residual = residual.max(hermitian_residual(e));
        residual = residual.max((-min_eigenvalue(e)).max(0.0));
        sum += *e;
    }
    residual = residual.max(frobenius(&(sum - identity(d))));
    Check::new(residual, tol_op)
}

/// Hermiticity plus a consistent resolution `Σ λ_k P_k = A` with orthogonal,
/// complete projectors.
pub fn is_observable(op: &CMatrix, resolution: &[(f64, &CMatrix)], tol_op: f64) -> Check {
    let d = op.nrows();
    let recon = resolution.iter().fold(CMatrix::zeros(d, d), |acc, (v, p)| {
        acc + *p * num_complex::Complex64::new(*v, 0.0)
    });
    let projectors: Vec<&CMatrix> = resolution.iter().map(|(_, p)| *p).collect();
    let residual = hermitian_residual(op)
        .max(frobenius(&(recon - op)))
        .max(resolution_residual(&projectors));
    Check::new(residual, tol_op)
}
