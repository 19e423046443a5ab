//! Operators on a system set that commute with a family of later operations.
//!
//! Everything is computed over the real vector space of Hermitian matrices:
//! a constraint `X ↦ L(X)` is evaluated on a Hilbert–Schmidt orthonormal
//! Hermitian basis, the images are stacked as real columns, and the null
//! space gives the admissible Hermitian operators. Their complex span is the
//! commutant of the generators together with their adjoints.

use crate::error::Result;
use crate::hilbert::linalg::{flatten_real, hermitian_basis, hs_real, null_space, real, CMatrix, RMatrix};
use crate::hilbert::operator::embed_map;
use crate::hilbert::{LabeledOperator, Space};
use crate::measurement::{ContextOp, Operation};

/// A linear condition on a Hermitian operator `X` acting on the record space.
pub(crate) enum Constraint {
    /// `[X̂, B] = 0` with `X̂` the embedding of `X` into `space`.
    Commute { b: CMatrix, space: Space },
    /// `O X̂ = X̂′ O` for a map `O: in_space → out_space`.
    Intertwine {
        o: CMatrix,
        in_space: Space,
        out_space: Space,
    },
}

impl Constraint {
    fn residual(&self, x: &CMatrix, record: &Space) -> Result<CMatrix> {
        Ok(match self {
            Constraint::Commute { b, space } => {
                let xe = embed_map(x, record, record, space, space)?;
                &xe * b - b * &xe
            }
            Constraint::Intertwine { o, in_space, out_space } => {
                let xi = embed_map(x, record, record, in_space, in_space)?;
                let xo = embed_map(x, record, record, out_space, out_space)?;
                o * xi - xo * o
            }
        })
    }

    /// The condition an operation imposes on a record living on `record`,
    /// restricted to the systems the two share. `None` when they are disjoint.
    pub(crate) fn for_op(op: &ContextOp, record: &Space) -> Result<Option<Constraint>> {
        if op.op.inputs().is_disjoint_from(record) && op.op.outputs().is_disjoint_from(record) {
            return Ok(None);
        }
        Ok(Some(match &op.op {
            Operation::Measurement(obs) => {
                let space = record.union(obs.space());
                let d = obs.space().dim();
                // distinct eigenvalues: commuting with this is commuting with every projector
                let b = obs
                    .outcomes()
                    .iter()
                    .enumerate()
                    .fold(CMatrix::zeros(d, d), |acc, (j, o)| {
                        acc + o.projector.matrix() * real((j + 1) as f64)
                    });
                let b = embed_map(&b, obs.space(), obs.space(), &space, &space)?;
                Constraint::Commute { b, space }
            }
            Operation::Unitary(v) | Operation::Isometry(v) => {
                let in_space = record.union(v.inputs());
                let out_space = record.union(v.outputs());
                let o = embed_map(v.matrix(), v.inputs(), v.outputs(), &in_space, &out_space)?;
                if in_space == out_space {
                    Constraint::Commute { b: o, space: in_space }
                } else {
                    Constraint::Intertwine { o, in_space, out_space }
                }
            }
        }))
    }
}

/// Hermitian solutions of all constraints on `record`, as an HS-orthonormal basis.
pub(crate) fn solve_constraints(constraints: &[Constraint], record: &Space, null_tol: f64) -> Result<Vec<CMatrix>> {
    let d = record.dim();
    let basis = hermitian_basis(d);
    if constraints.is_empty() {
        return Ok(basis);
    }
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); basis.len()];
    for c in constraints {
        for (col, b) in columns.iter_mut().zip(&basis) {
            col.extend(flatten_real(&c.residual(b, record)?));
        }
    }
    let rows = columns[0].len();
    let a = RMatrix::from_fn(rows, basis.len(), |r, c| columns[c][r]);
    let null = null_space(&a, null_tol);
    Ok(combine(&basis, &null))
}

fn combine(basis: &[CMatrix], coeffs: &RMatrix) -> Vec<CMatrix> {
    (0..coeffs.ncols())
        .map(|j| {
            basis
                .iter()
                .enumerate()
                .fold(CMatrix::zeros(basis[0].nrows(), basis[0].ncols()), |acc, (i, b)| {
                    acc + b * real(coeffs[(i, j)])
                })
        })
        .collect()
}

/// Hermitian operators on `record` whose embedding commutes with (or, for
/// isometries, intertwines) every given operation.
pub fn record_commutant(ops: &[&ContextOp], record: &Space, null_tol: f64) -> Result<Vec<LabeledOperator>> {
    let constraints = ops
        .iter()
        .filter_map(|op| Constraint::for_op(op, record).transpose())
        .collect::<Result<Vec<_>>>()?;
    solve_constraints(&constraints, record, null_tol)?
        .into_iter()
        .map(|m| LabeledOperator::on_space(m, record.clone()))
        .collect()
}

/// HS-orthonormal Hermitian basis of the commutant of `generators` (and their
/// adjoints) on `space`. Each generator is embedded into `space` first.
pub fn commutant_basis(generators: &[LabeledOperator], space: &Space, null_tol: f64) -> Result<Vec<LabeledOperator>> {
    let constraints = generators
        .iter()
        .map(|g| {
            Ok(Constraint::Commute {
                b: g.embed_into(space)?.into_matrix(),
                space: space.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    solve_constraints(&constraints, space, null_tol)?
        .into_iter()
        .map(|m| LabeledOperator::on_space(m, space.clone()))
        .collect()
}

/// Elements of `span(basis)` commuting with every basis element.
pub(crate) fn center(basis: &[CMatrix], null_tol: f64) -> Vec<CMatrix> {
    let m = basis.len();
    if m == 0 {
        return Vec::new();
    }
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); m];
    for bj in basis {
        for (col, bi) in columns.iter_mut().zip(basis) {
            col.extend(flatten_real(&(bi * bj - bj * bi)));
        }
    }
    let rows = columns[0].len();
    let a = RMatrix::from_fn(rows, m, |r, c| columns[c][r]);
    combine(basis, &null_space(&a, null_tol))
}

/// Distance from `x` to the real span of an orthonormal Hermitian basis.
pub(crate) fn span_residual(x: &CMatrix, basis: &[CMatrix]) -> f64 {
    let proj = basis.iter().fold(CMatrix::zeros(x.nrows(), x.ncols()), |acc, b| {
        acc + b * real(hs_real(b, x))
    });
    crate::hilbert::linalg::frobenius(&(x - proj))
}

pub(crate) fn pairwise_commuting(basis: &[CMatrix], tol: f64) -> bool {
    for (i, a) in basis.iter().enumerate() {
        for b in &basis[i + 1..] {
            if crate::hilbert::linalg::frobenius(&(a * b - b * a)) > tol {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::linalg::{frobenius, identity};
    use crate::hilbert::SystemRegistry;
    use crate::measurement::gates::{sigma_x, sigma_z};

    #[test]
    fn commutant_of_local_sigma_x_pair() {
        let reg = SystemRegistry::from_entries([("A", 2), ("B", 2)]).unwrap();
        let sp = reg.full_space();
        let gens = [
            LabeledOperator::on_space(sigma_x(), reg.space_of(&["A"]).unwrap()).unwrap(),
            LabeledOperator::on_space(sigma_x(), reg.space_of(&["B"]).unwrap()).unwrap(),
        ];
        let basis = commutant_basis(&gens, &sp, 1e-9).unwrap();
        assert_eq!(basis.len(), 4);
        let sxi = sigma_x().kronecker(&sigma_x());
        assert!(span_residual(&sxi, &basis.iter().map(|b| b.matrix().clone()).collect::<Vec<_>>()) < 1e-10);
    }

    #[test]
    fn empty_generators_give_full_space() {
        let reg = SystemRegistry::from_entries([("A", 3)]).unwrap();
        assert_eq!(commutant_basis(&[], &reg.full_space(), 1e-9).unwrap().len(), 9);
    }

    #[test]
    fn center_of_block_algebra() {
        // B(2) ⊗ diag(2): center is I ⊗ diag(2)
        let mut basis = Vec::new();
        for p in [
            CMatrix::from_diagonal_element(2, 2, real(1.0)),
            sigma_x(),
            sigma_z(),
            crate::measurement::gates::sigma_y(),
        ] {
            for k in 0..2 {
                let mut e = CMatrix::zeros(2, 2);
                e[(k, k)] = real(1.0);
                basis.push(p.kronecker(&e) * real(std::f64::consts::FRAC_1_SQRT_2));
            }
        }
        let c = center(&basis, 1e-9);
        assert_eq!(c.len(), 2);
        for z in &c {
            for b in &basis {
                assert!(frobenius(&(z * b - b * z)) < 1e-10);
            }
        }
        assert!(span_residual(&identity(4), &c) < 1e-10);
    }
}
