//! Outcome statistics for jointly parsed measurements.
//!
//! Every record projector is carried to the end of the joint timeline, and a
//! final measurement is read from its pointer. The resulting projectors of
//! different measurements commute, and probabilities are `‖Π P̃ Ψ‖²` for the
//! final state `Ψ`. Inference is
//! refused unless the claims were accepted under the context rule.

pub(crate) mod timeline;

use timeline::{check_carried, local_pointer_projector, worst_commutator};
pub use timeline::{pointer_label, pointer_projector, pushforward_projector, ExpandedTimeline, Step};

use serde::Serialize;

use crate::context_rule::JointParseReport;
use crate::error::{Error, Result};
use crate::hilbert::linalg::{CMatrix, CVector};
use crate::hilbert::{PureState, SystemRegistry};
use crate::measurement::{ContextOp, Observable, Operation};
use crate::Tolerances;

/// Where an event comes from: a parse claim of the report or a final measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum EventSource {
    Claim(usize),
    Final(usize),
}

/// "The measurement `source` had outcome `outcome`."
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OutcomeEvent {
    pub source: EventSource,
    pub outcome: String,
}

impl OutcomeEvent {
    pub fn claim(index: usize, outcome: impl Into<String>) -> Self {
        Self {
            source: EventSource::Claim(index),
            outcome: outcome.into(),
        }
    }

    pub fn final_measurement(index: usize, outcome: impl Into<String>) -> Self {
        Self {
            source: EventSource::Final(index),
            outcome: outcome.into(),
        }
    }
}

/// A measurement read out at the end of the experiment. It must also appear,
/// with the same payload, in the joint context the claims were parsed in.
#[derive(Clone, Debug, PartialEq)]
pub struct FinalMeasurement {
    pub time: i64,
    pub name: String,
    pub observable: Observable,
}

impl FinalMeasurement {
    pub fn from_op(op: &ContextOp) -> Result<Self> {
        match &op.op {
            Operation::Measurement(obs) => Ok(Self {
                time: op.time,
                name: op.name.clone(),
                observable: obs.clone(),
            }),
            _ => Err(Error::InferenceUnavailable(format!(
                "operation `{}` at time {} is not an observable measurement",
                op.name, op.time
            ))),
        }
    }

    pub fn as_op(&self) -> ContextOp {
        ContextOp {
            time: self.time,
            name: self.name.clone(),
            op: Operation::Measurement(self.observable.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EventInfo {
    pub name: String,
    pub source: EventSource,
    pub outcomes: Vec<String>,
}

/// Probabilities of every outcome tuple, one entry per tuple in odometer
/// order (last event fastest).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointDistribution {
    pub events: Vec<EventInfo>,
    pub table: Vec<(Vec<String>, f64)>,
}

impl JointDistribution {
    fn event_index(&self, source: EventSource) -> Result<usize> {
        self.events
            .iter()
            .position(|e| e.source == source)
            .ok_or_else(|| Error::UnknownOutcome {
                event: format!("{source:?}"),
                outcome: String::new(),
            })
    }

    /// Probability that all `events` happen together.
    pub fn probability(&self, events: &[OutcomeEvent]) -> Result<f64> {
        let mut fixed = Vec::with_capacity(events.len());
        for e in events {
            let i = self.event_index(e.source)?;
            if !self.events[i].outcomes.contains(&e.outcome) {
                return Err(Error::UnknownOutcome {
                    event: self.events[i].name.clone(),
                    outcome: e.outcome.clone(),
                });
            }
            fixed.push((i, e.outcome.as_str()));
        }
        Ok(self
            .table
            .iter()
            .filter(|(tuple, _)| fixed.iter().all(|(i, o)| tuple[*i] == *o))
            .map(|(_, p)| p)
            .sum())
    }

    pub fn total(&self) -> f64 {
        self.table.iter().map(|(_, p)| p).sum()
    }

    /// Largest entrywise difference; tables must list the same tuples.
    pub fn max_difference(&self, other: &JointDistribution) -> f64 {
        if self.table.len() != other.table.len() {
            return f64::INFINITY;
        }
        self.table
            .iter()
            .zip(&other.table)
            .map(|((ta, pa), (tb, pb))| if ta == tb { (pa - pb).abs() } else { f64::INFINITY })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Conditional {
    pub probability: f64,
    pub given_probability: f64,
    pub certain: bool,
}

/// `p(query | given)`, with `certain` set when it is 1 within `tol_prob`.
pub fn conditional(
    dist: &JointDistribution,
    given: &[OutcomeEvent],
    query: &[OutcomeEvent],
    tol_prob: f64,
) -> Result<Conditional> {
    let pg = dist.probability(given)?;
    if pg <= tol_prob {
        return Err(Error::NullEvent(pg));
    }
    let both: Vec<OutcomeEvent> = given.iter().chain(query).cloned().collect();
    let probability = dist.probability(&both)? / pg;
    Ok(Conditional {
        probability,
        given_probability: pg,
        certain: (probability - 1.0).abs() <= tol_prob,
    })
}

/// The events of a report: projectors on the final space, in outcome order.
struct EventProjectors {
    info: Vec<EventInfo>,
    projectors: Vec<Vec<CMatrix>>,
}

fn require_accepted(report: &JointParseReport, finals: &[FinalMeasurement]) -> Result<()> {
    if !report.accepted {
        let failing: Vec<&str> = report
            .per_claim
            .iter()
            .filter(|v| !v.is_parsed())
            .map(|v| v.claim.as_str())
            .collect();
        return Err(Error::InferenceUnavailable(format!(
            "the claims do not parse jointly (failing: {})",
            failing.join(", ")
        )));
    }
    for f in finals {
        let present = report
            .joint_context
            .at(f.time)
            .is_some_and(|op| op.op.same_payload(&Operation::Measurement(f.observable.clone())));
        if !present {
            return Err(Error::InferenceUnavailable(format!(
                "final measurement `{}` at time {} is not part of the joint context",
                f.name, f.time
            )));
        }
    }
    Ok(())
}

fn event_projectors(
    report: &JointParseReport,
    finals: &[FinalMeasurement],
    timeline: &ExpandedTimeline,
    tol_op: f64,
) -> Result<EventProjectors> {
    let mut info = Vec::new();
    let mut projectors = Vec::new();
    for (i, (claim, verdict)) in report.claims.iter().zip(&report.per_claim).enumerate() {
        let record = verdict
            .record
            .as_ref()
            .ok_or_else(|| Error::InferenceUnavailable(format!("claim `{}` has no record", claim.name)))?;
        let labels: Vec<String> = claim.povm.labels().map(str::to_string).collect();
        let ps = labels
            .iter()
            .map(|l| {
                let p = record.projector(l).ok_or_else(|| Error::UnknownOutcome {
                    event: claim.name.clone(),
                    outcome: l.clone(),
                })?;
                check_carried(p, claim.time, timeline, tol_op)?;
                Ok(p.clone())
            })
            .collect::<Result<Vec<_>>>()?;
        info.push(EventInfo {
            name: claim.name.clone(),
            source: EventSource::Claim(i),
            outcomes: labels,
        });
        projectors.push(ps);
    }
    for (j, f) in finals.iter().enumerate() {
        let ps = (0..f.observable.len())
            .map(|k| local_pointer_projector(f.time, k, timeline))
            .collect::<Result<Vec<_>>>()?;
        info.push(EventInfo {
            name: f.name.clone(),
            source: EventSource::Final(j),
            outcomes: f.observable.labels().map(str::to_string).collect(),
        });
        projectors.push(ps);
    }
    let worst = worst_commutator(&projectors)?;
    if worst > 10.0 * tol_op {
        return Err(Error::NonCommutingEvents { residual: worst });
    }
    let projectors = projectors
        .into_iter()
        .map(|ps| {
            ps.into_iter()
                .map(|p| Ok(p.embed_into(timeline.final_space())?.into_matrix()))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EventProjectors { info, projectors })
}

/// Every tuple of outcome indices, last position fastest.
fn tuples(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &n in sizes {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |k| {
                    let mut t = t.clone();
                    t.push(k);
                    t
                })
            })
            .collect();
    }
    out
}

fn apply_all<'a>(mut psi: CVector, ops: impl Iterator<Item = &'a CMatrix>) -> CVector {
    for p in ops {
        psi = p * psi;
    }
    psi
}

/// Born-rule table over all claims of an accepted report plus the final
/// measurements, for `initial` on the timeline's initial systems.
pub fn joint_distribution(
    report: &JointParseReport,
    finals: &[FinalMeasurement],
    initial: &PureState,
    registry: &SystemRegistry,
    tols: &Tolerances,
) -> Result<JointDistribution> {
    require_accepted(report, finals)?;
    let timeline = ExpandedTimeline::new(&report.joint_context, registry, tols.tol_op)?;
    let events = event_projectors(report, finals, &timeline, tols.tol_op)?;
    let psi = timeline.evolve(initial, timeline.steps().len())?;
    let sizes: Vec<usize> = events.projectors.iter().map(Vec::len).collect();
    let mut table = Vec::new();
    for t in tuples(&sizes) {
        let chosen: Vec<&CMatrix> = t.iter().enumerate().map(|(e, &k)| &events.projectors[e][k]).collect();
        let forward = apply_all(psi.vector().clone(), chosen.iter().copied()).norm_squared();
        let backward = apply_all(psi.vector().clone(), chosen.iter().rev().copied()).norm_squared();
        if (forward - backward).abs() > 1e-9 {
            return Err(Error::NonCommutingEvents {
                residual: (forward - backward).abs(),
            });
        }
        table.push((labels_of(&events.info, &t), forward));
    }
    let dist = JointDistribution {
        events: events.info,
        table,
    };
    check_table(&dist, tols.tol_prob)?;
    Ok(dist)
}

fn labels_of(info: &[EventInfo], tuple: &[usize]) -> Vec<String> {
    tuple
        .iter()
        .enumerate()
        .map(|(e, &k)| info[e].outcomes[k].clone())
        .collect()
}

fn check_table(dist: &JointDistribution, tol_prob: f64) -> Result<()> {
    let total = dist.total();
    if (total - 1.0).abs() > tol_prob || dist.table.iter().any(|(_, p)| *p < -tol_prob || *p > 1.0 + tol_prob) {
        return Err(Error::CrossValidation(format!("joint distribution sums to {total}")));
    }
    Ok(())
}

/// The same table computed with the claim at `claim` treated as a collapse:
/// its record projectors are applied right after its isometry, each branch is
/// renormalized and evolved on its own, and the other events are evaluated
/// per branch.
pub fn collapse_oracle(
    report: &JointParseReport,
    claim: usize,
    finals: &[FinalMeasurement],
    initial: &PureState,
    registry: &SystemRegistry,
    tols: &Tolerances,
) -> Result<JointDistribution> {
    require_accepted(report, finals)?;
    let target = report
        .claims
        .get(claim)
        .ok_or_else(|| Error::InferenceUnavailable(format!("no claim with index {claim}")))?;
    let timeline = ExpandedTimeline::new(&report.joint_context, registry, tols.tol_op)?;
    let events = event_projectors(report, finals, &timeline, tols.tol_op)?;
    let after = timeline.steps_through(target.time);
    let phi = timeline.evolve(initial, after)?;
    let record = report.per_claim[claim]
        .record
        .as_ref()
        .expect("accepted claims carry records");
    let alive = timeline.alive(after);

    let mut branches: Vec<Option<(f64, CVector)>> = Vec::new();
    for label in target.povm.labels() {
        let p = record.projector(label).expect("record labels match the POVM");
        let branch = p.embed_into(alive)?.matrix() * phi.vector();
        let weight = branch.norm_squared();
        branches.push(if weight > 0.0 {
            Some((
                weight,
                timeline.evolve_from(&(branch / crate::hilbert::linalg::real(weight.sqrt())), after)?,
            ))
        } else {
            None
        });
    }

    let sizes: Vec<usize> = events.projectors.iter().map(Vec::len).collect();
    let mut table = Vec::new();
    for t in tuples(&sizes) {
        let p = match &branches[t[claim]] {
            None => 0.0,
            Some((w, psi)) => {
                let others = t
                    .iter()
                    .enumerate()
                    .filter(|(e, _)| *e != claim)
                    .map(|(e, &k)| &events.projectors[e][k]);
                w * apply_all(psi.clone(), others).norm_squared()
            }
        };
        table.push((labels_of(&events.info, &t), p));
    }
    let dist = JointDistribution {
        events: events.info,
        table,
    };
    check_table(&dist, tols.tol_prob)?;
    Ok(dist)
}
