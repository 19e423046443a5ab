use super::observable::Observable;
use super::povm::Povm;
use crate::error::{Error, Result};
use crate::hilbert::{LabeledIsometry, Space, SystemRegistry, TimelineLayout};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpKind {
    Unitary,
    Isometry,
    ObservableMeasurement,
}

/// Payload of a context operation.
///
/// Measurements stay in projector form; they are dilated to isometries only
/// when a global pure-state simulation needs them.
#[derive(Clone, Debug, PartialEq)]
pub enum Operation {
    Unitary(LabeledIsometry),
    Isometry(LabeledIsometry),
    Measurement(Observable),
}

impl Operation {
    /// Wraps an isometry, rejecting it as `Unitary` unless it is square and unitary.
    pub fn unitary(u: LabeledIsometry, tol_op: f64) -> Result<Self> {
        if !u.is_unitary(tol_op) {
            let residual = crate::hilbert::is_unitary(u.matrix(), tol_op).residual;
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self::Unitary(u))
    }

    /// `Unitary` when the map is unitary on its systems, `Isometry` otherwise.
    pub fn from_isometry(v: LabeledIsometry, tol_op: f64) -> Self {
        if v.is_unitary(tol_op) {
            Self::Unitary(v)
        } else {
            Self::Isometry(v)
        }
    }

    pub fn kind(&self) -> OpKind {
        match self {
            Self::Unitary(_) => OpKind::Unitary,
            Self::Isometry(_) => OpKind::Isometry,
            Self::Measurement(_) => OpKind::ObservableMeasurement,
        }
    }

    pub fn inputs(&self) -> &Space {
        match self {
            Self::Unitary(v) | Self::Isometry(v) => v.inputs(),
            Self::Measurement(o) => o.space(),
        }
    }

    pub fn outputs(&self) -> &Space {
        match self {
            Self::Unitary(v) | Self::Isometry(v) => v.outputs(),
            Self::Measurement(o) => o.space(),
        }
    }

    pub fn as_isometry(&self) -> Option<&LabeledIsometry> {
        match self {
            Self::Unitary(v) | Self::Isometry(v) => Some(v),
            Self::Measurement(_) => None,
        }
    }

    /// Exact payload equality; unitary and isometry wrappers of the same map agree.
    pub fn same_payload(&self, other: &Operation) -> bool {
        match (self.as_isometry(), other.as_isometry()) {
            (Some(a), Some(b)) => a == b,
            (None, None) => self == other,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContextOp {
    pub time: i64,
    pub name: String,
    pub op: Operation,
}

/// Time-ordered operations with unique times.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Context {
    ops: Vec<ContextOp>,
}

impl Context {
    /// Sorts by time; two operations at one time are a conflict.
    pub fn new(mut ops: Vec<ContextOp>) -> Result<Self> {
        ops.sort_by_key(|o| o.time);
        for w in ops.windows(2) {
            if w[0].time == w[1].time {
                return Err(Error::TimelineConflict(w[0].time));
            }
        }
        Ok(Self { ops })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn ops(&self) -> &[ContextOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn at(&self, time: i64) -> Option<&ContextOp> {
        self.ops.iter().find(|o| o.time == time)
    }

    /// Operations strictly after `time`.
    pub fn post_ops(&self, time: i64) -> Vec<&ContextOp> {
        self.ops.iter().filter(|o| o.time > time).collect()
    }

    pub fn without(&self, time: i64) -> Context {
        Self {
            ops: self.ops.iter().filter(|o| o.time != time).cloned().collect(),
        }
    }

    pub fn with(&self, op: ContextOp) -> Result<Context> {
        let mut ops = self.ops.clone();
        ops.push(op);
        Self::new(ops)
    }

    /// Checks the label bookkeeping of the whole timeline.
    pub fn layout(&self, registry: &SystemRegistry) -> Result<TimelineLayout> {
        TimelineLayout::new(
            self.ops.iter().map(|o| (o.time, o.op.inputs(), o.op.outputs())),
            registry,
        )
    }
}

/// The claim that an isometry, run at `time`, is a dynamical description of
/// `povm` within `context`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParseClaim {
    pub name: String,
    pub isometry: LabeledIsometry,
    pub povm: Povm,
    pub time: i64,
    pub context: Context,
    pub candidate_record: Option<Observable>,
}

impl ParseClaim {
    pub fn new(
        name: impl Into<String>,
        isometry: LabeledIsometry,
        povm: Povm,
        time: i64,
        context: Context,
        candidate_record: Option<Observable>,
    ) -> Result<Self> {
        let claim = Self {
            name: name.into(),
            isometry,
            povm,
            time,
            context,
            candidate_record,
        };
        claim.validate()?;
        Ok(claim)
    }

    fn malformed(&self, reason: impl Into<String>) -> Error {
        Error::MalformedClaim {
            claim: self.name.clone(),
            reason: reason.into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.povm.space() != self.isometry.inputs() {
            return Err(self.malformed(format!(
                "POVM acts on {} but the isometry's inputs are {}",
                self.povm.space(),
                self.isometry.inputs()
            )));
        }
        if let Some(record) = &self.candidate_record {
            if !record.space().is_subset_of(self.isometry.outputs()) {
                return Err(self.malformed(format!(
                    "record acts on {}, outside the isometry's outputs {}",
                    record.space(),
                    self.isometry.outputs()
                )));
            }
            let mut a: Vec<&str> = record.labels().collect();
            let mut b: Vec<&str> = self.povm.labels().collect();
            a.sort_unstable();
            b.sort_unstable();
            if a != b {
                return Err(self.malformed(format!("record outcomes {a:?} differ from POVM outcomes {b:?}")));
            }
        }
        if let Some(op) = self.context.at(self.time) {
            if !op.op.same_payload(&self.own_op().op) {
                return Err(Error::TimelineConflict(self.time));
            }
        }
        Ok(())
    }

    /// The claimed isometry as a timeline operation.
    pub fn own_op(&self) -> ContextOp {
        ContextOp {
            time: self.time,
            name: self.name.clone(),
            op: Operation::from_isometry(self.isometry.clone(), 1e-12),
        }
    }

    /// Context plus the claimed isometry, in time order.
    pub fn timeline(&self) -> Result<Context> {
        self.context.without(self.time).with(self.own_op())
    }

    pub fn with_context(&self, context: Context) -> ParseClaim {
        ParseClaim {
            context,
            ..self.clone()
        }
    }
}
