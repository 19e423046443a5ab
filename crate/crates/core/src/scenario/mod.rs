//! Scenario files: a JSON description of an experiment, the built-in
//! scenarios, and the report produced by running one.
//!
//! The schema is documented in the guide's scenario chapter. Complex numbers
//! are `[re, im]` pairs and matrices are lists of rows.

pub mod builtins;
pub mod format;
mod resolve;
mod run;

pub use builtins::{builtin, fr_experiment_with_env, BUILTIN_NAMES};
pub use format::*;
pub use resolve::Scenario;
pub use run::{
    run_resolved, JointSummary, QueryReport, QueryResult, RecordOutcome, RecordReport, ReportDoc, TableRow,
    VerdictReport,
};

use crate::error::Error;
use crate::Tolerances;

/// A problem with a scenario document, as opposed to a failure inside an engine.
#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid field `{path}` at line {line}, column {column}: {message}")]
    Schema {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("`{path}`: {message}")]
    Reference { path: String, message: String },

    #[error("`{path}`: {source}")]
    Model {
        path: String,
        #[source]
        source: Error,
    },

    #[error("unknown builtin `{0}`; available: {list}", list = BUILTIN_NAMES.join(", "))]
    UnknownBuiltin(String),
}

impl ScenarioError {
    /// The offending field path, when there is one.
    pub fn path(&self) -> Option<&str> {
        match self {
            ScenarioError::Schema { path, .. }
            | ScenarioError::Reference { path, .. }
            | ScenarioError::Model { path, .. } => Some(path),
            _ => None,
        }
    }
}

/// Either kind of failure while running a scenario.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("engine error: {0}")]
    Engine(#[from] Error),
}

/// Reads a scenario and checks that every reference resolves and every
/// payload builds under default tolerances.
pub fn parse_scenario(text: &str) -> Result<ScenarioDoc, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: ScenarioDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let (line, column) = (inner.line(), inner.column());
        if inner.is_syntax() || inner.is_eof() {
            ScenarioError::Syntax {
                line,
                column,
                message: inner.to_string(),
            }
        } else {
            ScenarioError::Schema {
                path,
                line,
                column,
                message: strip_position(&inner.to_string()),
            }
        }
    })?;
    Scenario::resolve(&doc, &Tolerances::default())?;
    Ok(doc)
}

/// serde_json appends " at line L column C"; the error type reports those separately.
fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message.to_string(),
    }
}

pub fn serialize(doc: &ScenarioDoc) -> String {
    serde_json::to_string_pretty(doc).expect("scenario documents serialize")
}

/// Resolves `doc` with `tols` and answers its queries.
pub fn run_scenario(doc: &ScenarioDoc, tols: &Tolerances, seed: u64) -> Result<ReportDoc, RunError> {
    let scenario = Scenario::resolve(doc, tols)?;
    Ok(run_resolved(&scenario, tols, seed)?)
}
