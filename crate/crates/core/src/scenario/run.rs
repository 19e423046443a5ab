use std::fmt::Write as _;

use serde::Serialize;

use crate::context_rule::{joint_parse_with, JointParseReport};
use crate::error::{Error, Result};
use crate::hilbert::linalg::CMatrix;
use crate::inference::{collapse_oracle, conditional, joint_distribution, EventInfo, FinalMeasurement, OutcomeEvent};
use crate::measurement::{ContextOp, Observable};
use crate::parse::{FailedCondition, ParseEngine, ParseStatus, ParseVerdict, Residuals, SearchLayer, Witness};
use crate::Tolerances;

use super::format::{EventSpec, JointRef, MatrixSpec, QuerySpec};
use super::resolve::Scenario;

/// Entries below this magnitude are written as zero.
const PRINT_FLOOR: f64 = 1e-13;
/// P1 and P2 tables agree when no entry differs by more than this.
const COLLAPSE_AGREEMENT: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportDoc {
    pub engine: String,
    pub scenario: String,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub results: Vec<QueryReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QueryReport {
    pub index: usize,
    #[serde(flatten)]
    pub result: QueryResult,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QueryResult {
    Parse {
        verdict: VerdictReport,
    },
    JointParse {
        joint: JointSummary,
        verdicts: Vec<VerdictReport>,
    },
    Distribution {
        joint: JointSummary,
        events: Vec<EventInfo>,
        table: Vec<TableRow>,
    },
    Conditional {
        joint: JointSummary,
        given: Vec<EventSpec>,
        query: Vec<EventSpec>,
        probability: f64,
        given_probability: f64,
        certain: bool,
    },
    CollapseCompare {
        joint: JointSummary,
        claim: String,
        max_difference: f64,
        agree: bool,
    },
    /// Inference was refused; `reason` says why.
    Unavailable {
        query: String,
        joint: JointSummary,
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointSummary {
    pub claims: Vec<String>,
    /// Names of the operations in the joint context, in time order.
    pub context: Vec<String>,
    pub accepted: bool,
    pub failing: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_commutation: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub outcomes: Vec<String>,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerdictReport {
    pub claim: String,
    pub status: ParseStatus,
    pub layer: SearchLayer,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_condition: Option<FailedCondition>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub residuals: Residuals,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record: Option<RecordReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecordReport {
    pub systems: Vec<String>,
    pub outcomes: Vec<RecordOutcome>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecordOutcome {
    pub label: String,
    pub value: f64,
    pub rank: usize,
    pub projector: MatrixSpec,
}

fn matrix_spec(m: &CMatrix) -> MatrixSpec {
    let clean = |x: f64| if x.abs() < PRINT_FLOOR { 0.0 } else { x };
    (0..m.nrows())
        .map(|r| {
            (0..m.ncols())
                .map(|c| [clean(m[(r, c)].re), clean(m[(r, c)].im)])
                .collect()
        })
        .collect()
}

fn record_report(record: &Observable) -> RecordReport {
    RecordReport {
        systems: record.space().label_names(),
        outcomes: record
            .outcomes()
            .iter()
            .map(|o| RecordOutcome {
                label: o.label.clone(),
                value: o.value,
                rank: o.projector.trace().re.round() as usize,
                projector: matrix_spec(o.projector.matrix()),
            })
            .collect(),
    }
}

impl From<&ParseVerdict> for VerdictReport {
    fn from(v: &ParseVerdict) -> Self {
        VerdictReport {
            claim: v.claim.clone(),
            status: v.status,
            layer: v.layer,
            failed_condition: v.failed_condition,
            witness: v.witness.clone(),
            residuals: v.residuals.clone(),
            record: v.record.as_ref().map(record_report),
        }
    }
}

struct Joint {
    report: JointParseReport,
    finals: Vec<FinalMeasurement>,
    summary: JointSummary,
}

struct Runner<'a> {
    scenario: &'a Scenario,
    engine: ParseEngine<'a>,
    tols: Tolerances,
}

impl Runner<'_> {
    fn joint(&self, joint: JointRef<'_>) -> Result<Joint> {
        let claims: Vec<_> = joint
            .claims
            .iter()
            .map(|n| self.scenario.claims[self.scenario.claim_index(n).expect("checked on resolve")].clone())
            .collect();
        let mut extra: Vec<ContextOp> = Vec::new();
        for t in joint.context.iter().chain(joint.finals) {
            if extra.iter().all(|o| o.time != *t) {
                extra.push(self.scenario.timeline.at(*t).expect("checked on resolve").clone());
            }
        }
        let finals = joint
            .finals
            .iter()
            .map(|t| FinalMeasurement::from_op(self.scenario.timeline.at(*t).expect("checked on resolve")))
            .collect::<Result<Vec<_>>>()?;
        let report = joint_parse_with(&self.engine, &claims, &extra)?;
        let summary = JointSummary {
            claims: joint.claims.to_vec(),
            context: report.joint_context.ops().iter().map(|o| o.name.clone()).collect(),
            accepted: report.accepted,
            failing: report
                .per_claim
                .iter()
                .filter(|v| !v.is_parsed())
                .map(|v| v.claim.clone())
                .collect(),
            record_commutation: report.record_commutation,
        };
        Ok(Joint {
            report,
            finals,
            summary,
        })
    }

    fn event(&self, joint: JointRef<'_>, finals: &[FinalMeasurement], e: &EventSpec) -> OutcomeEvent {
        match joint.claims.iter().position(|c| *c == e.event) {
            Some(i) => OutcomeEvent::claim(i, e.outcome.clone()),
            None => {
                let j = finals
                    .iter()
                    .position(|f| f.name == e.event)
                    .expect("checked on resolve");
                OutcomeEvent::final_measurement(j, e.outcome.clone())
            }
        }
    }

    fn query(&self, q: &QuerySpec) -> Result<QueryResult> {
        if let QuerySpec::Parse { claim } = q {
            let c = &self.scenario.claims[self.scenario.claim_index(claim).expect("checked on resolve")];
            return Ok(QueryResult::Parse {
                verdict: (&self.engine.parse(c)?).into(),
            });
        }
        let spec = q.joint().expect("joint query");
        let joint = self.joint(spec)?;
        let unavailable = |joint: JointSummary, reason: String| QueryResult::Unavailable {
            query: q.kind().to_string(),
            joint,
            reason,
        };
        let reg = &self.scenario.registry;
        let psi = &self.scenario.initial;
        let outcome = match q {
            QuerySpec::Parse { .. } => unreachable!(),
            QuerySpec::JointParse { .. } => Ok(QueryResult::JointParse {
                verdicts: joint.report.per_claim.iter().map(Into::into).collect(),
                joint: joint.summary.clone(),
            }),
            QuerySpec::Distribution { .. } => joint_distribution(&joint.report, &joint.finals, psi, reg, &self.tols)
                .map(|d| QueryResult::Distribution {
                    joint: joint.summary.clone(),
                    events: d.events,
                    table: d
                        .table
                        .into_iter()
                        .map(|(outcomes, p)| TableRow {
                            outcomes,
                            probability: if p.abs() < PRINT_FLOOR { 0.0 } else { p },
                        })
                        .collect(),
                }),
            QuerySpec::Conditional { given, query, .. } => {
                joint_distribution(&joint.report, &joint.finals, psi, reg, &self.tols).and_then(|d| {
                    let g: Vec<_> = given.iter().map(|e| self.event(spec, &joint.finals, e)).collect();
                    let qe: Vec<_> = query.iter().map(|e| self.event(spec, &joint.finals, e)).collect();
                    let c = conditional(&d, &g, &qe, self.tols.tol_prob)?;
                    Ok(QueryResult::Conditional {
                        joint: joint.summary.clone(),
                        given: given.clone(),
                        query: query.clone(),
                        probability: c.probability,
                        given_probability: c.given_probability,
                        certain: c.certain,
                    })
                })
            }
            QuerySpec::CollapseCompare { claim, .. } => {
                let idx = spec.claims.iter().position(|c| c == claim).expect("checked on resolve");
                joint_distribution(&joint.report, &joint.finals, psi, reg, &self.tols).and_then(|unitary| {
                    let collapsed = collapse_oracle(&joint.report, idx, &joint.finals, psi, reg, &self.tols)?;
                    let max_difference = unitary.max_difference(&collapsed);
                    Ok(QueryResult::CollapseCompare {
                        joint: joint.summary.clone(),
                        claim: claim.clone(),
                        max_difference,
                        agree: max_difference <= COLLAPSE_AGREEMENT,
                    })
                })
            }
        };
        match outcome {
            Err(Error::InferenceUnavailable(reason)) => Ok(unavailable(joint.summary, reason)),
            Err(e @ Error::NullEvent(_)) => Ok(unavailable(joint.summary, e.to_string())),
            other => other,
        }
    }
}

/// Answers every query of a resolved scenario, in order.
pub fn run_resolved(scenario: &Scenario, tols: &Tolerances, seed: u64) -> Result<ReportDoc> {
    let runner = Runner {
        scenario,
        engine: ParseEngine::new(&scenario.registry, *tols, seed),
        tols: *tols,
    };
    let results = scenario
        .doc
        .queries
        .iter()
        .enumerate()
        .map(|(index, q)| {
            Ok(QueryReport {
                index,
                result: runner.query(q)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReportDoc {
        engine: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        scenario: scenario.doc.name.clone(),
        seed,
        tolerances: *tols,
        results,
    })
}

fn fmt_residual(x: Option<f64>) -> String {
    x.map_or("-".into(), |v| format!("{v:.1e}"))
}

fn fmt_events(events: &[EventSpec]) -> String {
    events
        .iter()
        .map(|e| format!("{}={}", e.event, e.outcome))
        .collect::<Vec<_>>()
        .join(", ")
}

fn fmt_joint(j: &JointSummary) -> String {
    let verdict = if j.accepted {
        "accepted".to_string()
    } else {
        format!("rejected (failing: {})", j.failing.join(", "))
    };
    format!(
        "claims [{}] in context [{}]: {verdict}",
        j.claims.join(", "),
        j.context.join(", ")
    )
}

fn fmt_verdict(v: &VerdictReport) -> String {
    let mut s = format!("{}: {:?} at {:?}", v.claim, v.status, v.layer);
    if let Some(f) = v.failed_condition {
        let _ = write!(s, ", failed {f:?}");
    }
    if let Some(w) = &v.witness {
        let _ = write!(s, ", witness {}", serde_json::to_string(w).unwrap_or_default());
    }
    if let Some(r) = &v.record {
        let ranks: Vec<String> = r
            .outcomes
            .iter()
            .map(|o| format!("{}:rank {}", o.label, o.rank))
            .collect();
        let _ = write!(s, ", record on {} [{}]", r.systems.join(","), ranks.join(", "));
    }
    let _ = write!(
        s,
        " (c1 {}, c2 {}, lin {})",
        fmt_residual(v.residuals.condition1),
        fmt_residual(v.residuals.condition2),
        fmt_residual(v.residuals.feasibility)
    );
    s
}

impl ReportDoc {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} | scenario {} | seed {}\n", self.engine, self.scenario, self.seed);
        for q in &self.results {
            let _ = write!(out, "[{}] ", q.index);
            match &q.result {
                QueryResult::Parse { verdict } => {
                    let _ = writeln!(out, "parse {}", fmt_verdict(verdict));
                }
                QueryResult::JointParse { joint, verdicts } => {
                    let _ = writeln!(out, "joint_parse {}", fmt_joint(joint));
                    for v in verdicts {
                        let _ = writeln!(out, "    {}", fmt_verdict(v));
                    }
                }
                QueryResult::Distribution { joint, events, table } => {
                    let _ = writeln!(out, "distribution {}", fmt_joint(joint));
                    let names: Vec<&str> = events.iter().map(|e| e.name.as_str()).collect();
                    let _ = writeln!(out, "    {} | p", names.join(" "));
                    for row in table.iter().filter(|r| r.probability > 0.0) {
                        let _ = writeln!(out, "    {} | {:.12}", row.outcomes.join(" "), row.probability);
                    }
                }
                QueryResult::Conditional {
                    given,
                    query,
                    probability,
                    certain,
                    ..
                } => {
                    let _ = writeln!(
                        out,
                        "conditional P({} | {}) = {:.12}{}",
                        fmt_events(query),
                        fmt_events(given),
                        probability,
                        if *certain { " (certain)" } else { "" }
                    );
                }
                QueryResult::CollapseCompare {
                    claim,
                    max_difference,
                    agree,
                    ..
                } => {
                    let _ = writeln!(
                        out,
                        "collapse_compare {claim}: max |p_unitary - p_collapse| = {max_difference:.1e} ({})",
                        if *agree { "agree" } else { "DISAGREE" }
                    );
                }
                QueryResult::Unavailable { query, joint, reason } => {
                    let _ = writeln!(out, "{query} unavailable: {reason}");
                    let _ = writeln!(out, "    {}", fmt_joint(joint));
                }
            }
        }
        out
    }
}
