//! Standard gates and states, already in canonical factor order.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use super::observable::Observable;
use crate::error::{Error, Result};
use crate::hilbert::linalg::{c, identity, real, CMatrix, CVector, ONE, ZERO};
use crate::hilbert::operator::embed_map;
use crate::hilbert::{LabeledIsometry, LabeledOperator, PureState, Space, SystemLabel, SystemRegistry};

/// Pauli axis, used to pick a qubit basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

pub fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn sigma_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO])
}

pub fn sigma_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// `(|+⟩, |−⟩)`.
pub fn plus_minus_states() -> (CVector, CVector) {
    let h = FRAC_1_SQRT_2;
    (
        CVector::from_vec(vec![real(h), real(h)]),
        CVector::from_vec(vec![real(h), real(-h)]),
    )
}

/// Eigenbasis of a Pauli axis as `(label, vector)` pairs, +1 eigenvector first.
/// Labels: `0`/`1` for z, `+`/`-` for x, `+i`/`-i` for y.
pub fn axis_basis(axis: Axis) -> [(&'static str, CVector); 2] {
    let h = FRAC_1_SQRT_2;
    match axis {
        Axis::Z => [
            ("0", CVector::from_vec(vec![ONE, ZERO])),
            ("1", CVector::from_vec(vec![ZERO, ONE])),
        ],
        Axis::X => {
            let (p, m) = plus_minus_states();
            [("+", p), ("-", m)]
        }
        Axis::Y => [
            ("+i", CVector::from_vec(vec![real(h), c(0.0, h)])),
            ("-i", CVector::from_vec(vec![real(h), c(0.0, -h)])),
        ],
    }
}

fn qubit_space(label: &SystemLabel, registry: &SystemRegistry) -> Result<Space> {
    let sp = registry.space([label])?;
    if sp.dim() != 2 {
        return Err(Error::DimensionMismatch(format!("`{label}` must be a qubit")));
    }
    Ok(sp)
}

/// Pauli observable on a qubit with values ±1.
pub fn pauli(axis: Axis, label: &SystemLabel, registry: &SystemRegistry) -> Result<Observable> {
    let space = qubit_space(label, registry)?;
    let outcomes = axis_basis(axis)
        .into_iter()
        .zip([1.0, -1.0])
        .map(|((l, v), value)| {
            Ok((
                l.to_string(),
                value,
                LabeledOperator::on_space(&v * v.adjoint(), space.clone())?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Observable::from_projectors(outcomes, 1e-12)
}

pub fn basis_state(label: &SystemLabel, index: usize, registry: &SystemRegistry) -> Result<PureState> {
    PureState::basis(label, index, registry)
}

/// Controlled shift `|i⟩|j⟩ ↦ |i⟩|i+j mod d⟩`; the ordinary CNOT for qubits.
/// Both systems must have the same dimension.
pub fn cnot(control: &SystemLabel, target: &SystemLabel, registry: &SystemRegistry) -> Result<LabeledIsometry> {
    let d = registry.dim_of(control)?;
    if registry.dim_of(target)? != d {
        return Err(Error::DimensionMismatch(format!(
            "controlled shift needs equal dimensions for `{control}` and `{target}`"
        )));
    }
    // written in (control, target) order; LabeledIsometry::new reorders
    let mut m = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + (i + j) % d, i * d + j)] = ONE;
        }
    }
    let labels = [control.clone(), target.clone()];
    LabeledIsometry::new(m, &labels, &labels, registry, 1e-12)
}

/// CNOT onto a fresh ancilla prepared in `|0⟩`: `|k⟩ ↦ |k⟩|k⟩`.
pub fn cnot_append(control: &SystemLabel, pointer: &SystemLabel, registry: &SystemRegistry) -> Result<LabeledIsometry> {
    let u = cnot(control, pointer, registry)?;
    let c_space = registry.space([control])?;
    let p_space = registry.space([pointer])?;
    let zero = CMatrix::from_fn(p_space.dim(), 1, |r, _| if r == 0 { ONE } else { ZERO });
    let append = embed_map(&zero, &Space::trivial(), &p_space, &c_space, u.outputs())?;
    LabeledIsometry::on_spaces(u.matrix() * append, c_space, u.outputs().clone(), 1e-12)
}

/// Applies `σ_z` to `target` when the qubit `control` is in the second basis
/// state of `basis` (`|1⟩` for z, `|−⟩` for x).
pub fn controlled_phase(
    control: &SystemLabel,
    basis: Axis,
    target: &SystemLabel,
    registry: &SystemRegistry,
) -> Result<LabeledIsometry> {
    let cs = qubit_space(control, registry)?;
    let ts = qubit_space(target, registry)?;
    let [(_, b0), (_, b1)] = axis_basis(basis);
    let full = cs.union(&ts);
    let p0 = LabeledOperator::on_space(&b0 * b0.adjoint(), cs.clone())?.embed_into(&full)?;
    let p1 = LabeledOperator::on_space(&b1 * b1.adjoint(), cs.clone())?.embed_into(&full)?;
    let z = LabeledOperator::on_space(sigma_z(), ts)?.embed_into(&full)?;
    let m = p0.matrix() + p1.matrix() * z.matrix();
    LabeledIsometry::on_spaces(m, full.clone(), full, 1e-12)
}

/// A unitary given as a `LabeledOperator`, wrapped as an isometry on the same systems.
pub fn unitary(op: &LabeledOperator, tol_op: f64) -> Result<LabeledIsometry> {
    let iso = LabeledIsometry::on_spaces(op.matrix().clone(), op.space().clone(), op.space().clone(), tol_op)?;
    if !iso.is_unitary(tol_op) {
        let r =
            crate::hilbert::linalg::frobenius(&(op.matrix() * op.matrix().adjoint() - identity(op.matrix().nrows())));
        return Err(Error::NotUnitary { residual: r });
    }
    Ok(iso)
}
