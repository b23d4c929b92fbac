//! Disordered multi-qubit cavity model at zero qubit gap.
//!
//! The cavity mode is integrated out exactly, leaving a Sherrington–Kirkpatrick
//! spin glass whose mean coupling is shifted by the light–matter coupling,
//! `J̃₀ = J₀ + 2λ²`. The crate provides
//!
//! * [`model`]: parameters, quenched disorder and the effective Ising model,
//! * [`oracle`]: exact enumeration of the classical and full quantum
//!   partition functions at small N,
//! * [`rs`]: the replica-symmetric saddle-point solver,
//! * [`phase`]: phase-diagram scans and boundary refinement,
//! * [`mc`]: parallel-tempering Monte Carlo with disorder averaging,
//! * [`acceptance`]: the end-to-end validation checks.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod error;
pub mod fmt;
pub mod mc;
pub mod model;
pub mod oracle;
pub mod phase;
pub mod quadrature;
pub mod rs;
pub mod seeding;
pub mod stats;

pub use error::{Error, Result};
