//! Labeled finite-dimensional Hilbert spaces and the dense linear algebra the
//! other modules build on.
//!
//! Every operator, isometry and state carries the systems it acts on. Tensor
//! factors always follow registry order, leftmost most significant, so two
//! objects on the same systems can be multiplied without reshuffling.

pub mod checks;
pub mod linalg;
pub mod operator;
pub mod random;
pub mod registry;
pub mod spectral;

pub use checks::{is_isometry, is_observable, is_povm, is_projector, is_unitary, Check};
pub use linalg::{CMatrix, CVector, C64};
pub use operator::{
    compose_timeline, embed, embed_map, partial_trace, LabeledIsometry, LabeledOperator, PureState, TimelineLayout,
};
pub use random::{max_entangled, random_pure_state, random_unitary};
pub use registry::{Space, SystemLabel, SystemRegistry};
pub use spectral::spectral_resolution;
