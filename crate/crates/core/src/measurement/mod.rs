//! POVMs, observables, contexts and parse claims, plus the constructors that
//! turn a statistical description of a measurement into a dynamical one.

pub mod context;
pub mod gates;
pub mod instrument;
pub mod observable;
pub mod povm;

pub use context::{Context, ContextOp, OpKind, Operation, ParseClaim};
pub use gates::{axis_basis, basis_state, cnot, cnot_append, controlled_phase, pauli, plus_minus_states, Axis};
pub use instrument::{dynamical_description, instrument_isometry, MeasurementOperator};
pub use observable::{Observable, Outcome};
pub use povm::Povm;
