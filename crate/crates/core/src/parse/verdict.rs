use serde::Serialize;

use crate::measurement::Observable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ParseStatus {
    /// A record satisfying both conditions was found or confirmed.
    Parsed,
    /// The supplied candidate record violates a condition. Says nothing about
    /// whether some other record would work.
    RecordRejected,
    /// No record exists; the witness proves it.
    NoParseCertified,
    /// The heuristic search found nothing. Not a proof of nonexistence.
    NoParseHeuristic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FailedCondition {
    Condition1,
    Condition2,
    LinearFeasibility,
}

/// Which stage of the decision procedure produced the verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SearchLayer {
    /// Direct check of a supplied record.
    Verify,
    L1,
    L2,
    /// L2 run on the center of a noncommutative commutant.
    L2Center,
    L3,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A context operation that does not commute with the record.
    ContextOp { time: i64, name: String, residual: f64 },
    /// The outcome whose pull-back differs from its effect.
    Outcome { outcome: String, residual: f64 },
    /// The single-outcome linear system that has no solution in the commutant.
    InfeasibleOutcome { outcome: String, residual: f64 },
    /// The coupled system (all outcomes plus `Σ_k X_k = I`) has no solution.
    InfeasibleJoint { residual: f64 },
    /// Every assignment of minimal projectors to outcomes fails condition 1.
    ExhaustedAssignments { minimal_projectors: usize, nodes: u64 },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Residuals {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feasibility: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub idempotency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub commutant_dim: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParseVerdict {
    pub claim: String,
    pub status: ParseStatus,
    pub layer: SearchLayer,
    pub record: Option<Observable>,
    pub failed_condition: Option<FailedCondition>,
    pub witness: Option<Witness>,
    pub residuals: Residuals,
}

impl ParseVerdict {
    pub fn is_parsed(&self) -> bool {
        self.status == ParseStatus::Parsed
    }
}
