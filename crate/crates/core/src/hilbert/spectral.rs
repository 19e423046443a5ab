use super::linalg::{frobenius, hermitian_eigen, identity, CMatrix};
use super::operator::LabeledOperator;
use crate::error::{Error, Result};

/// Eigenvalue clusters of a Hermitian operator with their spectral projectors,
/// in ascending eigenvalue order.
///
/// Adjacent eigenvalues closer than `cluster_tol` share a cluster; the cluster
/// value is their mean.
pub fn spectral_resolution(op: &LabeledOperator, cluster_tol: f64, tol_op: f64) -> Result<Vec<(f64, LabeledOperator)>> {
    let residual = op.hermiticity_residual();
    if residual > tol_op {
        return Err(Error::NotHermitian { residual });
    }
    let (values, vectors) = hermitian_eigen(op.matrix());
    let d = values.len();
    let mut out = Vec::new();
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && values[end] - values[end - 1] < cluster_tol {
            end += 1;
        }
        let cols = vectors.columns(start, end - start);
        let proj = cols * cols.adjoint();
        let mean = values[start..end].iter().sum::<f64>() / (end - start) as f64;
        out.push((mean, LabeledOperator::on_space(proj, op.space().clone())?));
        start = end;
    }
    Ok(out)
}

/// Frobenius residual of `P_i P_j = δ_ij P_i` and `Σ P_i = I`.
pub fn resolution_residual(projectors: &[&CMatrix]) -> f64 {
    let Some(first) = projectors.first() else {
        return 0.0;
    };
    let d = first.nrows();
    let mut worst = frobenius(&(projectors.iter().fold(CMatrix::zeros(d, d), |acc, p| acc + *p) - identity(d)));
    for (i, p) in projectors.iter().enumerate() {
        for (j, q) in projectors.iter().enumerate() {
            let prod = *p * *q;
            let r = if i == j {
                frobenius(&(prod - *p))
            } else {
                frobenius(&prod)
            };
            worst = worst.max(r);
        }
    }
    worst
}
