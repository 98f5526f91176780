// Negated comparisons like !(x > 0.0) are deliberate: they reject NaN along
// with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Library surface of the scenario runner, kept separate from the binary so
//! integration tests can drive it directly.

pub mod config;
pub mod scenario;
