//! Causal structure learning from the invariance of linear regression
//! coefficients across environments.
//!
//! Data are modelled by a linear SEM `X = B X + N` whose coefficient matrix is
//! shared by every environment while the exogenous noise variances may change.
//! Regressing an effect on its causes gives coefficients that stay put when
//! the noise of upstream variables moves, whereas the reverse regression
//! generally drifts. [`discovery`] turns that asymmetry into edge
//! orientations on top of a PC-style essential graph.

// Negated float comparisons are deliberate: NaN must fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bench;
pub mod discovery;
pub mod error;
pub mod graph;
pub mod invariance;
mod par;
pub mod sem;
pub mod stats;
pub mod varset;

pub use error::{Error, Result};
pub use graph::{Dag, MixedGraph};
pub use invariance::{ChangeSet, RegressionInvarianceSet, Scope};
pub use sem::{EnvironmentData, LinearSem};
pub use varset::VarSet;
