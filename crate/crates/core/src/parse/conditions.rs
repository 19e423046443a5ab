//! The two conditions a record observable must meet.

use rand::Rng;

use crate::error::{Error, Result};
use crate::hilbert::linalg::{frobenius, identity, kron, CMatrix, CVector};
use crate::hilbert::random::random_vector;
use crate::hilbert::{Check, LabeledIsometry, LabeledOperator, Space};
use crate::measurement::{Context, ContextOp, Observable, Operation, Povm};

/// `V† P V`, with `P` embedded into the outputs of `V` first.
pub fn pullback(v: &LabeledIsometry, p: &LabeledOperator) -> Result<LabeledOperator> {
    if !p.space().is_subset_of(v.outputs()) {
        return Err(Error::DimensionMismatch(format!(
            "operator on {} is not inside the isometry's outputs {}",
            p.space(),
            v.outputs()
        )));
    }
    let pe = p.embed_into(v.outputs())?;
    let m = v.matrix().adjoint() * pe.matrix() * v.matrix();
    LabeledOperator::on_space(m, v.inputs().clone())
}

/// Outcome of the condition-1 check.
#[derive(Clone, Debug, PartialEq)]
pub struct Condition1Report {
    pub holds: bool,
    /// Largest operator residual `‖V†P(k)V − Λ(k)‖_F`.
    pub residual: f64,
    /// Operator residual per outcome, in POVM order.
    pub per_outcome: Vec<(String, f64)>,
    /// Largest disagreement of the two sides of the trace identity over the
    /// sampled states on `inputs ⊗ E`.
    pub state_residual: f64,
}

/// `Tr_A[|x⟩⟨y|]` for vectors on `A ⊗ E` with `E` the last factor.
fn trace_out_first(x: &CVector, y: &CVector, d_a: usize, d_e: usize) -> CMatrix {
    let xm = CMatrix::from_fn(d_a, d_e, |a, e| x[a * d_e + e]);
    let ym = CMatrix::from_fn(d_a, d_e, |a, e| y[a * d_e + e]);
    xm.transpose() * ym.conjugate()
}

/// Both sides of the trace identity on one state of `inputs ⊗ E`:
/// `Tr_R[(P ⊗ 1) V ρ V†]` and `Tr_S[(Λ ⊗ 1) ρ]`.
fn trace_identity_gap(v: &CMatrix, p: &CMatrix, lambda: &CMatrix, psi: &CVector, d_e: usize) -> f64 {
    let id_e = identity(d_e);
    let phi = kron(v, &id_e) * psi;
    let chi = kron(p, &id_e) * &phi;
    let lhs = trace_out_first(&chi, &phi, v.nrows(), d_e);
    let rhs = trace_out_first(&(kron(lambda, &id_e) * psi), psi, v.ncols(), d_e);
    frobenius(&(lhs - rhs))
}

/// Condition 1: every record projector pulls back to its effect.
///
/// The operator identity decides the result. The trace identity is then
/// evaluated on the maximally entangled state and on `n_states` random states
/// with `dim E = dim S`; a disagreement between the two paths is an internal
/// error, not a verdict.
pub fn verify_condition1<R: Rng + ?Sized>(
    v: &LabeledIsometry,
    povm: &Povm,
    record: &Observable,
    tol_op: f64,
    n_states: usize,
    rng: &mut R,
) -> Result<Condition1Report> {
    if povm.space() != v.inputs() {
        return Err(Error::DimensionMismatch(format!(
            "POVM on {} but isometry inputs {}",
            povm.space(),
            v.inputs()
        )));
    }
    let d = v.inputs().dim();
    let mut states = vec![{
        let mut me = CVector::zeros(d * d);
        for i in 0..d {
            me[i * d + i] = crate::hilbert::linalg::real(1.0 / (d as f64).sqrt());
        }
        me
    }];
    states.extend((0..n_states).map(|_| random_vector(d * d, rng)));

    let mut per_outcome = Vec::with_capacity(povm.len());
    let mut state_residual: f64 = 0.0;
    for (label, lambda) in povm.outcomes() {
        let p = record.projector(label).ok_or_else(|| Error::UnknownOutcome {
            event: "record".into(),
            outcome: label.clone(),
        })?;
        let pe = p.embed_into(v.outputs())?;
        let op_res = frobenius(&(v.matrix().adjoint() * pe.matrix() * v.matrix() - lambda.matrix()));
        for (i, psi) in states.iter().enumerate() {
            let gap = trace_identity_gap(v.matrix(), pe.matrix(), lambda.matrix(), psi, d);
            if i == 0 {
                // on the maximally entangled state the gap is ‖Δ‖_F / d
                if (gap * d as f64 - op_res).abs() > 1e-9 * (1.0 + op_res) {
                    return Err(Error::CrossValidation(format!(
                        "outcome `{label}`: operator residual {op_res:.3e}, entangled-state residual x d {:.3e}",
                        gap * d as f64
                    )));
                }
            } else if gap > op_res * (1.0 + 1e-9) + 1e-12 {
                // ‖Tr_S[(Δ⊗1)ρ]‖_F ≤ ‖Δ‖_F for any normalized pure ρ
                return Err(Error::CrossValidation(format!(
                    "outcome `{label}`: random-state residual {gap:.3e} exceeds operator residual {op_res:.3e}"
                )));
            }
            state_residual = state_residual.max(gap);
        }
        per_outcome.push((label.clone(), op_res));
    }
    let residual = per_outcome.iter().map(|(_, r)| *r).fold(0.0, f64::max);
    Ok(Condition1Report {
        holds: residual <= tol_op,
        residual,
        per_outcome,
        state_residual,
    })
}

/// Context operations strictly after `time`.
pub fn post_ops(context: &Context, time: i64) -> Vec<&ContextOp> {
    context.post_ops(time)
}

/// Condition 2 for one operation, with `alive` the systems present just
/// before it runs.
///
/// Unitaries: `‖UÂ − ÂU‖`. Isometries: `‖OÂ − Â′O‖` with `Â′` on the output
/// space. Measurements: `‖[Â, B̂]‖`.
pub fn commutes_with_record(op: &ContextOp, record: &Observable, alive: &Space, tol_op: f64) -> Result<Check> {
    if let Some(label) = record.space().labels().find(|l| !alive.contains(l)) {
        return Err(Error::RecordNotAlive {
            label: label.to_string(),
            time: op.time,
        });
    }
    if !op.op.inputs().is_subset_of(alive) {
        return Err(Error::DimensionMismatch(format!(
            "operation `{}` at time {} acts on {} but only {} exists",
            op.name,
            op.time,
            op.op.inputs(),
            alive
        )));
    }
    let a_in = record.operator().embed_into(alive)?;
    let residual = match &op.op {
        Operation::Measurement(b) => {
            let b = b.operator().embed_into(alive)?;
            frobenius(&(a_in.matrix() * b.matrix() - b.matrix() * a_in.matrix()))
        }
        Operation::Unitary(o) | Operation::Isometry(o) => {
            let (m, out) = o.embed_into(alive)?;
            let a_out = record.operator().embed_into(&out)?;
            frobenius(&(&m * a_in.matrix() - a_out.matrix() * &m))
        }
    };
    Ok(Check {
        holds: residual <= tol_op,
        residual,
    })
}
