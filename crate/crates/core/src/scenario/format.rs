use serde::{Deserialize, Serialize};

/// A complex number as `[re, im]`.
pub type Complex = [f64; 2];

/// A matrix as rows of complex entries.
pub type MatrixSpec = Vec<Vec<Complex>>;

/// One experiment: systems, initial state, operations, parse claims and the
/// questions to ask about them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    /// Tensor order of the whole scenario, leftmost most significant.
    pub systems: Vec<SystemSpec>,
    /// State of every system that no operation creates.
    pub initial_state: StateSpec,
    pub timeline: Vec<OpSpec>,
    #[serde(default)]
    pub claims: Vec<ClaimSpec>,
    #[serde(default)]
    pub queries: Vec<QuerySpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub label: String,
    pub dim: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisSpec {
    X,
    Y,
    Z,
}

/// A pure state. Every constructor normalizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    /// `|i_1⟩|i_2⟩…` on the listed systems.
    Basis { systems: Vec<String>, indices: Vec<usize> },
    /// Explicit amplitudes, indexed in the listed system order.
    Amplitudes {
        systems: Vec<String>,
        amplitudes: Vec<Complex>,
    },
    /// Eigenvector of a Pauli operator on a qubit, named by its outcome
    /// label (`0`/`1` for z, `+`/`-` for x, `+i`/`-i` for y).
    Pauli {
        system: String,
        axis: AxisSpec,
        outcome: String,
    },
    /// Tensor product of states on disjoint systems.
    Product { factors: Vec<StateSpec> },
    /// Weighted sum of states on the same systems.
    Superposition { terms: Vec<TermSpec> },
    /// `Σ_i |ii⟩/√d`.
    MaxEntangled { a: String, b: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coeff: Complex,
    pub state: StateSpec,
}

/// A timeline entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpSpec {
    pub time: i64,
    pub name: String,
    pub op: PayloadSpec,
}

/// What happens at one time step. Maps with equal input and output systems
/// are classified as unitaries when they are unitary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PayloadSpec {
    /// Controlled shift between two systems of equal dimension.
    Cnot { control: String, target: String },
    /// CNOT onto a fresh pointer in `|0⟩`.
    CnotAppend { control: String, pointer: String },
    /// `σ_z` on `target` when the qubit `control` is in the second basis state of `basis`.
    ControlledPhase {
        control: String,
        basis: AxisSpec,
        target: String,
    },
    /// A Pauli gate on a qubit.
    Pauli { system: String, axis: AxisSpec },
    /// Explicit matrix with rows indexed by `outputs` and columns by `inputs`,
    /// each in the listed order.
    Matrix {
        inputs: Vec<String>,
        outputs: Vec<String>,
        matrix: MatrixSpec,
    },
    /// Image of each input basis state, in the listed input order.
    Columns {
        inputs: Vec<String>,
        outputs: Vec<String>,
        columns: Vec<StateSpec>,
    },
    /// `Σ_{k,ℓ} M(k,ℓ) ⊗ |k⟩_pointer ⊗ |ℓ⟩_aux`.
    Instrument {
        inputs: Vec<String>,
        outputs: Vec<String>,
        pointer: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        aux: Option<String>,
        operators: Vec<MeasurementOperatorSpec>,
    },
    /// Copy-to-pointer dilation of a projective measurement.
    DynamicalDescription {
        observable: ObservableSpec,
        pointer: String,
    },
    /// A projective measurement kept in projector form.
    Measure { observable: ObservableSpec },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementOperatorSpec {
    pub outcome: String,
    #[serde(default)]
    pub index: usize,
    /// Rows indexed by the instrument's `outputs`, columns by its `inputs`.
    pub matrix: MatrixSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableSpec {
    /// Outcomes `0`/`1` for z, `+`/`-` for x, `+i`/`-i` for y.
    Pauli { system: String, axis: AxisSpec },
    /// Projectors onto orthonormal states, plus an optional outcome for the
    /// rest of the space.
    Basis {
        systems: Vec<String>,
        vectors: Vec<LabeledStateSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        complement: Option<String>,
    },
    /// Explicit projectors with their eigenvalues.
    Projectors {
        systems: Vec<String>,
        outcomes: Vec<ProjectorSpec>,
    },
    /// A Hermitian matrix; one label per distinct eigenvalue, ascending.
    Hermitian {
        systems: Vec<String>,
        matrix: MatrixSpec,
        labels: Vec<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabeledStateSpec {
    pub label: String,
    pub state: StateSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectorSpec {
    pub label: String,
    pub value: f64,
    pub matrix: MatrixSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PovmSpec {
    /// The spectral projectors of an observable.
    Observable { observable: ObservableSpec },
    /// Explicit effects.
    Effects {
        systems: Vec<String>,
        effects: Vec<EffectSpec>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectSpec {
    pub label: String,
    pub matrix: MatrixSpec,
}

/// "The operation at `time` measures `povm`, given the operations at the
/// times in `context`."
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimSpec {
    pub name: String,
    pub time: i64,
    pub povm: PovmSpec,
    #[serde(default)]
    pub context: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate_record: Option<ObservableSpec>,
}

/// `event` names a claim or a final measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    pub event: String,
    pub outcome: String,
}

/// Joint queries share three fields: `claims` (claim names), `context`
/// (times of further operations added to the joint context) and `finals`
/// (times of measurements read out as events, which also join the context).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum QuerySpec {
    /// Verdict for one claim in its own context.
    Parse { claim: String },
    JointParse {
        #[serde(default)]
        claims: Vec<String>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        context: Vec<i64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        finals: Vec<i64>,
    },
    Distribution {
        #[serde(default)]
        claims: Vec<String>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        context: Vec<i64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        finals: Vec<i64>,
    },
    Conditional {
        #[serde(default)]
        claims: Vec<String>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        context: Vec<i64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        finals: Vec<i64>,
        given: Vec<EventSpec>,
        query: Vec<EventSpec>,
    },
    /// Compares the unitary table with the one where `claim` collapses.
    CollapseCompare {
        #[serde(default)]
        claims: Vec<String>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        context: Vec<i64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        finals: Vec<i64>,
        claim: String,
    },
}

/// The claims and operations a joint query is about.
#[derive(Clone, Copy, Debug)]
pub struct JointRef<'a> {
    pub claims: &'a [String],
    pub context: &'a [i64],
    pub finals: &'a [i64],
}

impl QuerySpec {
    pub fn kind(&self) -> &'static str {
        match self {
            QuerySpec::Parse { .. } => "parse",
            QuerySpec::JointParse { .. } => "joint_parse",
            QuerySpec::Distribution { .. } => "distribution",
            QuerySpec::Conditional { .. } => "conditional",
            QuerySpec::CollapseCompare { .. } => "collapse_compare",
        }
    }

    pub fn joint(&self) -> Option<JointRef<'_>> {
        match self {
            QuerySpec::Parse { .. } => None,
            QuerySpec::JointParse {
                claims,
                context,
                finals,
            }
            | QuerySpec::Distribution {
                claims,
                context,
                finals,
            }
            | QuerySpec::Conditional {
                claims,
                context,
                finals,
                ..
            }
            | QuerySpec::CollapseCompare {
                claims,
                context,
                finals,
                ..
            } => Some(JointRef {
                claims,
                context,
                finals,
            }),
        }
    }
}
