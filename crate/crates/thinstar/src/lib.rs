//! Spectral asymptotics for a thin three-edge star junction carrying a
//! concentrated mass at its node.
//!
//! The crate is organized bottom-up:
//!
//! - [`model`]: graph, regime and configuration types plus the edge-function
//!   representation shared by every solver.
//! - [`limit_spectrum`]: eigenpairs of the limit problem on the metric star graph
//!   (secular equation for constant radii, finite elements otherwise).
//! - [`corrector`]: the resonant vertex-coupled edge problem whose solvability
//!   condition yields each series coefficient.
//! - [`expansion`]: the exponent lattice `k - p*alpha` and the recursion drivers.
//! - [`junction`]: finite-volume solves on a model junction domain that produce
//!   the node constants consumed by the recursion.
//! - [`oracle`]: a lumped-mass graph surrogate, convergence-rate fitting and
//!   a-priori bound checks.

// Negated comparisons reject NaN along with out-of-range values, and most
// loops run over the three edges in lockstep.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod corrector;
pub mod error;
pub mod expansion;
pub mod junction;
pub mod limit_spectrum;
pub mod model;
pub mod numerics;
pub mod oracle;

pub use error::{Error, ErrorKind, Result};
