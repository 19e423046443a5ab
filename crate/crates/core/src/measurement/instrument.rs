use super::observable::Observable;
use crate::error::{Error, Result};
use crate::hilbert::linalg::{frobenius, identity, CMatrix, ONE, ZERO};
use crate::hilbert::operator::embed_map;
use crate::hilbert::{LabeledIsometry, Space, SystemLabel, SystemRegistry};

/// One measurement operator `M(k, ℓ)` of an instrument, a map `inputs → outputs`
/// in canonical order.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementOperator {
    pub outcome: String,
    pub index: usize,
    pub matrix: CMatrix,
}

/// Dilates an instrument to `V = Σ_{k,ℓ} M(k,ℓ) ⊗ |k⟩_pointer ⊗ |ℓ⟩_aux`.
///
/// Outcome `k` is the position of its label in order of first appearance.
/// `aux` may be omitted when every operator has `index == 0`. Returns the
/// isometry and the outcome order.
pub fn instrument_isometry(
    ops: &[MeasurementOperator],
    inputs: &Space,
    outputs: &Space,
    pointer: &SystemLabel,
    aux: Option<&SystemLabel>,
    registry: &SystemRegistry,
    tol_op: f64,
) -> Result<(LabeledIsometry, Vec<String>)> {
    let mut outcomes: Vec<String> = Vec::new();
    for op in ops {
        if op.matrix.nrows() != outputs.dim() || op.matrix.ncols() != inputs.dim() {
            return Err(Error::DimensionMismatch(format!(
                "measurement operator ({}, {}) is {}x{}, expected {}x{}",
                op.outcome,
                op.index,
                op.matrix.nrows(),
                op.matrix.ncols(),
                outputs.dim(),
                inputs.dim()
            )));
        }
        if !outcomes.contains(&op.outcome) {
            outcomes.push(op.outcome.clone());
        }
    }
    let d_in = inputs.dim();
    let completeness = ops.iter().fold(CMatrix::zeros(d_in, d_in), |acc, op| {
        acc + op.matrix.adjoint() * &op.matrix
    });
    let residual = frobenius(&(completeness - identity(d_in)));
    if residual > tol_op {
        return Err(Error::Incomplete { residual });
    }

    let pointer_space = registry.space([pointer])?;
    if pointer_space.dim() < outcomes.len() {
        return Err(Error::DimensionMismatch(format!(
            "pointer `{pointer}` has dimension {} for {} outcomes",
            pointer_space.dim(),
            outcomes.len()
        )));
    }
    let max_index = ops.iter().map(|op| op.index).max().unwrap_or(0);
    let aux_space = match aux {
        Some(l) => registry.space([l])?,
        None if max_index == 0 => Space::trivial(),
        None => {
            return Err(Error::DimensionMismatch(
                "operators carry a second index but no auxiliary system was given".into(),
            ))
        }
    };
    if aux_space.dim() <= max_index {
        return Err(Error::DimensionMismatch(format!(
            "auxiliary system of dimension {} for index {max_index}",
            aux_space.dim()
        )));
    }
    let record = pointer_space.union(&aux_space);
    if !record.is_disjoint_from(outputs) {
        return Err(Error::DimensionMismatch(format!(
            "pointer systems {record} overlap the operator outputs {outputs}"
        )));
    }
    let full_out = outputs.union(&record);
    let mut v = CMatrix::zeros(full_out.dim(), d_in);
    for op in ops {
        let k = outcomes.iter().position(|o| o == &op.outcome).expect("collected above");
        // |k⟩_pointer |ℓ⟩_aux as a column on the canonical record space
        let mut col = CMatrix::from_element(record.dim(), 1, ZERO);
        let aux_dim = aux_space.dim();
        col[(k * aux_dim + op.index, 0)] = ONE;
        let append = embed_map(&col, &Space::trivial(), &record, outputs, &full_out)?;
        v += append * &op.matrix;
    }
    let iso = LabeledIsometry::on_spaces(v, inputs.clone(), full_out, tol_op)?;
    Ok((iso, outcomes))
}

/// `V = Σ_k P(k) ⊗ |k⟩_pointer`, the copy-to-pointer dilation of a projective
/// measurement. Outcome `k` is the observable's `k`-th outcome.
pub fn dynamical_description(
    obs: &Observable,
    pointer: &SystemLabel,
    registry: &SystemRegistry,
    tol_op: f64,
) -> Result<LabeledIsometry> {
    let ops: Vec<MeasurementOperator> = obs
        .outcomes()
        .iter()
        .map(|o| MeasurementOperator {
            outcome: o.label.clone(),
            index: 0,
            matrix: o.projector.matrix().clone(),
        })
        .collect();
    let (iso, _) = instrument_isometry(&ops, obs.space(), obs.space(), pointer, None, registry, tol_op)?;
    Ok(iso)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::linalg::real;
    use crate::hilbert::LabeledOperator;
    use crate::measurement::gates::{cnot_append, pauli, Axis};

    fn pointer_projector(iso: &LabeledIsometry, pointer: &str, k: usize, reg: &SystemRegistry) -> CMatrix {
        let ps = reg.space_of(&[pointer]).unwrap();
        let mut p = CMatrix::zeros(ps.dim(), ps.dim());
        p[(k, k)] = ONE;
        LabeledOperator::on_space(p, ps)
            .unwrap()
            .embed_into(iso.outputs())
            .unwrap()
            .into_matrix()
    }

    #[test]
    fn projective_qubit_measurement_is_cnot_shaped() {
        let reg = SystemRegistry::from_entries([("S", 2), ("M", 2)]).unwrap();
        let s = reg.space_of(&["S"]).unwrap();
        let ops = (0..2)
            .map(|k| {
                let mut m = CMatrix::zeros(2, 2);
                m[(k, k)] = ONE;
                MeasurementOperator {
                    outcome: k.to_string(),
                    index: 0,
                    matrix: m,
                }
            })
            .collect::<Vec<_>>();
        let (v, order) = instrument_isometry(&ops, &s, &s, &"M".into(), None, &reg, 1e-9).unwrap();
        assert_eq!(order, ["0", "1"]);
        assert_eq!(v, cnot_append(&"S".into(), &"M".into(), &reg).unwrap());
    }

    #[test]
    fn single_identity_operator_appends_ancilla() {
        let reg = SystemRegistry::from_entries([("S", 2), ("M", 2)]).unwrap();
        let s = reg.space_of(&["S"]).unwrap();
        let ops = [MeasurementOperator {
            outcome: "only".into(),
            index: 0,
            matrix: identity(2),
        }];
        let (v, _) = instrument_isometry(&ops, &s, &s, &"M".into(), None, &reg, 1e-9).unwrap();
        let mut want = CMatrix::zeros(4, 2);
        want[(0, 0)] = ONE; // |0⟩_S|0⟩_M
        want[(2, 1)] = ONE; // |1⟩_S|0⟩_M
        assert_eq!(v.matrix(), &want);
    }

    #[test]
    fn unsharp_qubit_povm_pulls_back_to_its_effects() {
        // effects diag(0.7, 0.2) and diag(0.3, 0.8); operators are their square roots
        let reg = SystemRegistry::from_entries([("S", 2), ("M", 2)]).unwrap();
        let s = reg.space_of(&["S"]).unwrap();
        let effects: [[f64; 2]; 2] = [[0.7, 0.2], [0.3, 0.8]];
        let ops: Vec<_> = effects
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let mut m = CMatrix::zeros(2, 2);
                m[(0, 0)] = real(e[0].sqrt());
                m[(1, 1)] = real(e[1].sqrt());
                MeasurementOperator {
                    outcome: k.to_string(),
                    index: 0,
                    matrix: m,
                }
            })
            .collect();
        let (v, _) = instrument_isometry(&ops, &s, &s, &"M".into(), None, &reg, 1e-9).unwrap();
        for (k, e) in effects.iter().enumerate() {
            let pulled = v.matrix().adjoint() * pointer_projector(&v, "M", k, &reg) * v.matrix();
            let mut want = CMatrix::zeros(2, 2);
            want[(0, 0)] = real(e[0]);
            want[(1, 1)] = real(e[1]);
            assert!(frobenius(&(pulled - want)) < 1e-12);
        }
    }

    #[test]
    fn rejects_incomplete_operators() {
        let reg = SystemRegistry::from_entries([("S", 2), ("M", 2)]).unwrap();
        let s = reg.space_of(&["S"]).unwrap();
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = ONE;
        let ops = [MeasurementOperator {
            outcome: "0".into(),
            index: 0,
            matrix: m,
        }];
        assert!(matches!(
            instrument_isometry(&ops, &s, &s, &"M".into(), None, &reg, 1e-9),
            Err(Error::Incomplete { .. })
        ));
    }

    #[test]
    fn sigma_z_dynamical_description_is_cnot_append() {
        let reg = SystemRegistry::from_entries([("S", 2), ("M", 2)]).unwrap();
        let z = pauli(Axis::Z, &"S".into(), &reg).unwrap();
        let v = dynamical_description(&z, &"M".into(), &reg, 1e-9).unwrap();
        assert_eq!(v, cnot_append(&"S".into(), &"M".into(), &reg).unwrap());
    }

    #[test]
    fn identity_observable_appends_fixed_pointer() {
        let reg = SystemRegistry::from_entries([("S", 3), ("M", 1)]).unwrap();
        let s = reg.space_of(&["S"]).unwrap();
        let obs = Observable::from_projectors(vec![("all".into(), 1.0, LabeledOperator::identity(s))], 1e-9).unwrap();
        let v = dynamical_description(&obs, &"M".into(), &reg, 1e-9).unwrap();
        assert_eq!(v.matrix(), &identity(3));
        assert_eq!(v.outputs().label_names(), ["S", "M"]);
    }
}
