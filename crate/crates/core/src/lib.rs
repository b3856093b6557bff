//! Monotone traveling wavefronts of the neutral KPP-Fisher equation
//!
//! ```text
//! d/dt (u(t,x) - b u(t-tau,x)) = d2/dx2 (u(t,x) - b u(t-tau,x)) + u(t,x) (1 - u(t-tau,x))
//! ```
//!
//! The crate decides whether a speed `c` admits a monotone front, traces the
//! boundary curves of the admissible region in the `(tau, c)` plane, builds
//! the front profile by monotone iteration between explicit sub- and
//! super-solutions, and cross-checks the result by direct time evolution.

// negated float comparisons below are deliberate: they send NaN down the error path
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod bracket;
pub mod curves;
pub mod error;
pub mod evolver;
pub mod gridops;
pub mod linalg;
pub mod profile_io;
pub mod report;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use gridops::{GridProfile, OperatorConfig};
pub use spectral::{ModelParams, SpectralRoots};
