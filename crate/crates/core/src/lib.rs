//! Decides when isometric dynamics can be read as a measurement relative to
//! the operations that follow it, and computes outcome statistics only for
//! claims that hold together.
//!
//! [`parse::ParseEngine`] decides single claims, [`context_rule`] joins them,
//! [`inference`] computes tables and [`scenario`] reads and runs JSON
//! scenario files. The guide under `book/` walks through each.

pub mod context_rule;
pub mod error;
pub mod hilbert;
pub mod inference;
pub mod measurement;
pub mod parse;
pub mod scenario;
pub mod tolerances;

pub use error::{Error, Result};
pub use tolerances::Tolerances;

// Guide chapters run as doc-tests.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/getting-started.md")]
    mod getting_started {}
    #[doc = include_str!("../../../book/src/parsing.md")]
    mod parsing {}
    #[doc = include_str!("../../../book/src/joint.md")]
    mod joint {}
    #[doc = include_str!("../../../book/src/inference.md")]
    mod inference {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/tolerances.md")]
    mod tolerances {}
}
