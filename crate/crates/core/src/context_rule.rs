//! Several isometries count as measurements together only if each one parses
//! in the union of all their contexts.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::inference::timeline::{check_carried, worst_commutator};
use crate::inference::ExpandedTimeline;
use crate::measurement::{Context, ContextOp, ParseClaim};
use crate::parse::{ParseEngine, ParseVerdict};

#[derive(Clone, Debug, PartialEq)]
pub struct JointParseReport {
    /// The claims as given, with their original contexts.
    pub claims: Vec<ParseClaim>,
    pub joint_context: Context,
    /// One verdict per claim, in claim order, each against the joint context.
    pub per_claim: Vec<ParseVerdict>,
    pub accepted: bool,
    /// Largest commutator between pushed-forward records of different
    /// claims; present when accepted.
    pub record_commutation: Option<f64>,
}

impl JointParseReport {
    /// Index of the first claim that did not parse.
    pub fn first_failure(&self) -> Option<usize> {
        self.per_claim.iter().position(|v| !v.is_parsed())
    }
}

fn merge(ops: &mut BTreeMap<i64, ContextOp>, op: &ContextOp) -> Result<()> {
    match ops.get(&op.time) {
        Some(existing) if !existing.op.same_payload(&op.op) => Err(Error::TimelineConflict(op.time)),
        Some(_) => Ok(()),
        None => {
            ops.insert(op.time, op.clone());
            Ok(())
        }
    }
}

/// Union of all context operations and all claimed isometries, merged by
/// time. Two different payloads at one time are a conflict.
pub fn joint_context(claims: &[ParseClaim]) -> Result<Context> {
    joint_context_with(claims, &[])
}

/// [`joint_context`] plus extra operations, such as final measurements.
pub fn joint_context_with(claims: &[ParseClaim], extra: &[ContextOp]) -> Result<Context> {
    let mut ops = BTreeMap::new();
    for claim in claims {
        merge(&mut ops, &claim.own_op())?;
    }
    for claim in claims {
        for op in claim.context.ops() {
            merge(&mut ops, op)?;
        }
    }
    for op in extra {
        merge(&mut ops, op)?;
    }
    Context::new(ops.into_values().collect())
}

/// Parses every claim against the joint context (without its own isometry).
pub fn joint_parse(engine: &ParseEngine<'_>, claims: &[ParseClaim]) -> Result<JointParseReport> {
    joint_parse_with(engine, claims, &[])
}

/// [`joint_parse`] with extra operations added to the joint context.
pub fn joint_parse_with(
    engine: &ParseEngine<'_>,
    claims: &[ParseClaim],
    extra: &[ContextOp],
) -> Result<JointParseReport> {
    let joint = joint_context_with(claims, extra)?;
    joint.layout(engine.registry())?;
    let per_claim = claims
        .iter()
        .map(|c| engine.parse(&c.with_context(joint.without(c.time))))
        .collect::<Result<Vec<_>>>()?;
    let accepted = per_claim.iter().all(ParseVerdict::is_parsed);
    let record_commutation = if accepted {
        Some(check_records_commute(engine, claims, &per_claim, &joint)?)
    } else {
        None
    };
    Ok(JointParseReport {
        claims: claims.to_vec(),
        joint_context: joint,
        per_claim,
        accepted,
        record_commutation,
    })
}

fn check_records_commute(
    engine: &ParseEngine<'_>,
    claims: &[ParseClaim],
    verdicts: &[ParseVerdict],
    joint: &Context,
) -> Result<f64> {
    let tol = engine.tolerances().tol_op;
    let timeline = ExpandedTimeline::new(joint, engine.registry(), tol)?;
    let carried = claims
        .iter()
        .zip(verdicts)
        .map(|(c, v)| {
            let record = v.record.as_ref().expect("parsed verdicts carry records");
            record
                .outcomes()
                .iter()
                .map(|o| {
                    check_carried(&o.projector, c.time, &timeline, tol)?;
                    Ok(o.projector.clone())
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = worst_commutator(&carried)?;
    if worst > 10.0 * tol {
        return Err(Error::NonCommutingEvents { residual: worst });
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::SystemRegistry;
    use crate::measurement::{cnot_append, pauli, Axis, Operation, Povm};
    use crate::parse::ParseStatus;
    use crate::Tolerances;

    fn z_povm(reg: &SystemRegistry, on: &str) -> Povm {
        let z = pauli(Axis::Z, &on.into(), reg).unwrap();
        Povm::from_observable(&z)
    }

    fn measure(reg: &SystemRegistry, time: i64, axis: Axis, on: &str) -> ContextOp {
        ContextOp {
            time,
            name: format!("{on}:{axis:?}"),
            op: Operation::Measurement(pauli(axis, &on.into(), reg).unwrap()),
        }
    }

    /// friend copies S to M at 0; a second observer copies S to N at 1.
    fn two_copies(later: Vec<ContextOp>) -> (SystemRegistry, Vec<ParseClaim>) {
        let reg = SystemRegistry::from_entries([("S", 2), ("M", 2), ("N", 2)]).unwrap();
        let v0 = cnot_append(&"S".into(), &"M".into(), &reg).unwrap();
        let v1 = cnot_append(&"S".into(), &"N".into(), &reg).unwrap();
        let c0 = ParseClaim::new(
            "first",
            v0,
            z_povm(&reg, "S"),
            0,
            Context::new(later.clone()).unwrap(),
            None,
        )
        .unwrap();
        let c1 = ParseClaim::new("second", v1, z_povm(&reg, "S"), 1, Context::new(later).unwrap(), None).unwrap();
        (reg, vec![c0, c1])
    }

    #[test]
    fn union_contains_every_claimed_isometry() {
        let (_, claims) = two_copies(vec![]);
        let joint = joint_context(&claims).unwrap();
        assert_eq!(joint.ops().iter().map(|o| o.time).collect::<Vec<_>>(), [0, 1]);
    }

    #[test]
    fn conflicting_payloads_are_rejected() {
        let (reg, claims) = two_copies(vec![]);
        let mut bad = claims[0].clone();
        bad.context = Context::new(vec![measure(&reg, 1, Axis::X, "M")]).unwrap();
        assert!(matches!(
            joint_context(&[bad, claims[1].clone()]),
            Err(Error::TimelineConflict(1))
        ));
    }

    #[test]
    fn consistent_copies_are_accepted_and_commute() {
        let (reg, claims) = two_copies(vec![]);
        let engine = ParseEngine::new(&reg, Tolerances::default(), 3);
        let report = joint_parse(&engine, &claims).unwrap();
        assert!(report.accepted);
        assert!(report.record_commutation.unwrap() <= 1e-8);
    }

    #[test]
    fn x_reads_of_system_and_first_pointer_break_the_first_claim() {
        let (reg, _) = two_copies(vec![]);
        let (_, claims) = two_copies(vec![measure(&reg, 2, Axis::X, "S"), measure(&reg, 3, Axis::X, "M")]);
        let engine = ParseEngine::new(&reg, Tolerances::default(), 3);
        let report = joint_parse(&engine, &claims).unwrap();
        assert!(!report.accepted);
        assert_eq!(report.first_failure(), Some(0));
        assert_eq!(report.per_claim[0].status, ParseStatus::NoParseCertified);
    }

    #[test]
    fn single_claim_matches_direct_search() {
        let (reg, claims) = two_copies(vec![]);
        let engine = ParseEngine::new(&reg, Tolerances::default(), 3);
        let alone = ParseClaim {
            context: Context::empty(),
            ..claims[0].clone()
        };
        let report = joint_parse(&engine, std::slice::from_ref(&alone)).unwrap();
        assert_eq!(report.per_claim[0], engine.find_record_observable(&alone).unwrap());
    }

    #[test]
    fn acceptance_ignores_claim_order() {
        let (reg, _) = two_copies(vec![]);
        let (_, claims) = two_copies(vec![measure(&reg, 2, Axis::Z, "N")]);
        let engine = ParseEngine::new(&reg, Tolerances::default(), 3);
        let a = joint_parse(&engine, &claims).unwrap();
        let reversed: Vec<_> = claims.iter().rev().cloned().collect();
        let b = joint_parse(&engine, &reversed).unwrap();
        assert_eq!(a.accepted, b.accepted);
        assert_eq!(a.per_claim[0], b.per_claim[1]);
    }
}
