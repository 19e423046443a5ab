use thiserror::Error;

/// Errors raised by the engines.
///
/// Scenario-file problems have their own type, [`crate::scenario::ScenarioError`],
/// so the CLI can tell a bad input apart from an engine failure.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown system label `{0}`")]
    UnknownLabel(String),

    #[error("system label `{0}` registered twice")]
    DuplicateLabel(String),

    #[error("invalid system `{label}`: {reason}")]
    InvalidSystem { label: String, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not an isometry (residual {residual:.3e})")]
    NotIsometry { residual: f64 },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("operator is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("effects do not form a POVM (residual {residual:.3e})")]
    NotPovm { residual: f64 },

    #[error("measurement operators are not complete (residual {residual:.3e})")]
    Incomplete { residual: f64 },

    #[error("state has zero norm")]
    ZeroState,

    #[error("isometry consumes systems {0:?}; inputs must persist as outputs")]
    ConsumedSystems(Vec<String>),

    #[error("timeline: system `{label}` is created twice (time {time})")]
    CreatedTwice { label: String, time: i64 },

    #[error("timeline: input `{label}` of the operation at time {time} does not exist yet")]
    NotYetExisting { label: String, time: i64 },

    #[error("timeline: two distinct operations claim time {0}")]
    TimelineConflict(i64),

    #[error("timeline: times must be strictly increasing (saw {0} after {1})")]
    NonIncreasingTime(i64, i64),

    #[error("malformed claim `{claim}`: {reason}")]
    MalformedClaim { claim: String, reason: String },

    #[error("record acts on `{label}`, which is not alive at time {time}")]
    RecordNotAlive { label: String, time: i64 },

    #[error("record placed at time {time} is not carried by the later steps (residual {residual:.3e})")]
    RecordNotCarried { time: i64, residual: f64 },

    #[error("inference unavailable: {0}")]
    InferenceUnavailable(String),

    #[error("conditioning on an event of probability {0:.3e}")]
    NullEvent(f64),

    #[error("unknown outcome `{outcome}` for event `{event}`")]
    UnknownOutcome { event: String, outcome: String },

    #[error("projectors of different events do not commute (residual {residual:.3e})")]
    NonCommutingEvents { residual: f64 },

    #[error("initial state acts on {found:?} but the timeline starts from {expected:?}")]
    InitialStateMismatch { expected: Vec<String>, found: Vec<String> },

    #[error("internal consistency check failed: {0}")]
    CrossValidation(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
