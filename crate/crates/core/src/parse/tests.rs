use super::*;
use crate::hilbert::LabeledIsometry;
use crate::measurement::{cnot_append, pauli, Axis, Context, ContextOp, Operation, Povm};

fn registry() -> SystemRegistry {
    SystemRegistry::from_entries([("S", 2), ("M", 2)]).unwrap()
}

fn measure(reg: &SystemRegistry, time: i64, axis: Axis, on: &str) -> ContextOp {
    ContextOp {
        time,
        name: format!("{on}:{axis:?}"),
        op: Operation::Measurement(pauli(axis, &on.into(), reg).unwrap()),
    }
}

fn z_povm(reg: &SystemRegistry) -> Povm {
    let z = pauli(Axis::Z, &"S".into(), reg).unwrap();
    Povm::from_observable(&z)
}

fn friend_claim(reg: &SystemRegistry, later: &[(Axis, &str)]) -> ParseClaim {
    let v = cnot_append(&"S".into(), &"M".into(), reg).unwrap();
    let ops = later
        .iter()
        .enumerate()
        .map(|(i, (axis, on))| measure(reg, i as i64 + 1, *axis, on))
        .collect();
    ParseClaim::new("friend", v, z_povm(reg), 0, Context::new(ops).unwrap(), None).unwrap()
}

fn engine(reg: &SystemRegistry) -> ParseEngine<'_> {
    ParseEngine::new(reg, Tolerances::default(), 7)
}

#[test]
fn pointer_read_in_z_parses_with_pointer_record() {
    let reg = registry();
    let claim = friend_claim(&reg, &[(Axis::Z, "M")]);
    let v = engine(&reg).find_record_observable(&claim).unwrap();
    assert_eq!(v.status, ParseStatus::Parsed);
    assert_eq!(v.layer, SearchLayer::L2Center);
    let want = pauli(Axis::Z, &"M".into(), &reg).unwrap();
    assert!(record_distance(v.record.as_ref().unwrap(), &want).unwrap() < 1e-8);
}

#[test]
fn x_on_system_then_z_on_pointer_parses() {
    let reg = registry();
    let claim = friend_claim(&reg, &[(Axis::X, "S"), (Axis::Z, "M")]);
    let v = engine(&reg).find_record_observable(&claim).unwrap();
    assert_eq!(v.status, ParseStatus::Parsed);
    assert_eq!(v.layer, SearchLayer::L2);
    let want = pauli(Axis::Z, &"M".into(), &reg).unwrap();
    assert!(record_distance(v.record.as_ref().unwrap(), &want).unwrap() < 1e-8);
}

#[test]
fn x_on_both_is_certified_infeasible() {
    let reg = registry();
    let claim = friend_claim(&reg, &[(Axis::X, "S"), (Axis::X, "M")]);
    let e = engine(&reg);
    let v = e.find_record_observable(&claim).unwrap();
    assert_eq!(v.status, ParseStatus::NoParseCertified);
    assert_eq!(v.layer, SearchLayer::L1);
    assert_eq!(v.failed_condition, Some(FailedCondition::LinearFeasibility));
    let check = e.recheck_witness(&claim, v.witness.as_ref().unwrap()).unwrap();
    assert!(check.confirmed);
    assert!(check.residual.unwrap() > Tolerances::default().feasibility_tol);
}

#[test]
fn z_on_system_then_x_on_pointer_parses_with_system_record() {
    let reg = registry();
    let claim = friend_claim(&reg, &[(Axis::Z, "S"), (Axis::X, "M")]);
    let v = engine(&reg).find_record_observable(&claim).unwrap();
    assert_eq!(v.status, ParseStatus::Parsed);
    let want = pauli(Axis::Z, &"S".into(), &reg).unwrap();
    assert!(record_distance(v.record.as_ref().unwrap(), &want).unwrap() < 1e-8);
}

#[test]
fn supplied_records_are_checked_against_both_conditions() {
    let reg = registry();
    let e = engine(&reg);
    let pointer = pauli(Axis::Z, &"M".into(), &reg).unwrap();
    let system = pauli(Axis::Z, &"S".into(), &reg).unwrap();

    let xz = friend_claim(&reg, &[(Axis::X, "S"), (Axis::Z, "M")]);
    let ok = e.verify_record(&xz, &pointer, SearchLayer::Verify).unwrap();
    assert!(ok.is_parsed());
    let bad = e.verify_record(&xz, &system, SearchLayer::Verify).unwrap();
    assert_eq!(bad.status, ParseStatus::RecordRejected);
    assert_eq!(bad.failed_condition, Some(FailedCondition::Condition2));
    assert!(matches!(bad.witness, Some(Witness::ContextOp { time: 1, .. })));

    // the pointer record fails once Wigner reads M in x
    let zx = friend_claim(&reg, &[(Axis::Z, "S"), (Axis::X, "M")]);
    let v = e.verify_record(&zx, &pointer, SearchLayer::Verify).unwrap();
    assert!(matches!(v.witness, Some(Witness::ContextOp { time: 2, .. })));
}

#[test]
fn isometric_post_op_constrains_by_intertwining() {
    // a later copy of M onto a fresh P restricts records on (S,M) to
    // operators diagonal on M
    let reg = SystemRegistry::from_entries([("S", 2), ("M", 2), ("P", 2)]).unwrap();
    let v = cnot_append(&"S".into(), &"M".into(), &reg).unwrap();
    let copy = cnot_append(&"M".into(), &"P".into(), &reg).unwrap();
    let ctx = Context::new(vec![ContextOp {
        time: 1,
        name: "copy".into(),
        op: Operation::from_isometry(copy, 1e-12),
    }])
    .unwrap();
    let claim = ParseClaim::new("friend", v, z_povm(&reg), 0, ctx, None).unwrap();
    let e = engine(&reg);
    assert_eq!(e.admissible_basis(&claim).unwrap().len(), 8);
    let verdict = e.find_record_observable(&claim).unwrap();
    assert!(verdict.is_parsed());
}

#[test]
fn empty_context_takes_any_consistent_record() {
    let reg = registry();
    let claim = friend_claim(&reg, &[]);
    let v = engine(&reg).find_record_observable(&claim).unwrap();
    assert!(v.is_parsed());
    assert_eq!(v.residuals.commutant_dim, Some(16));
}

#[test]
fn unsharp_povm_without_pointer_room_is_not_parsed() {
    // a unitary on S alone cannot realize the unsharp effects diag(0.7,0.2), diag(0.3,0.8)
    let reg = SystemRegistry::from_entries([("S", 2)]).unwrap();
    let s = reg.space_of(&["S"]).unwrap();
    let id = LabeledIsometry::on_spaces(identity(2), s.clone(), s.clone(), 1e-12).unwrap();
    let diag = |a: f64, b: f64| {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = crate::hilbert::linalg::real(a);
        m[(1, 1)] = crate::hilbert::linalg::real(b);
        LabeledOperator::on_space(m, s.clone()).unwrap()
    };
    let povm = Povm::new(vec![("a".into(), diag(0.7, 0.2)), ("b".into(), diag(0.3, 0.8))], 1e-9).unwrap();
    let claim = ParseClaim::new("unsharp", id, povm, 0, Context::empty(), None).unwrap();
    let v = engine(&reg).find_record_observable(&claim).unwrap();
    assert!(!v.is_parsed());
}

#[test]
fn verdicts_are_deterministic_for_a_seed() {
    let reg = registry();
    let claim = friend_claim(&reg, &[(Axis::Z, "M")]);
    let a = engine(&reg).find_record_observable(&claim).unwrap();
    let b = engine(&reg).find_record_observable(&claim).unwrap();
    assert_eq!(a, b);
}
