//! Macroscopic-entanglement analysis of simulated quantum algorithms.
//!
//! A dense statevector simulator runs Grover search and Shor order finding
//! step by step. After each counted step the variance-covariance matrix
//! (VCM) of single-site Pauli fluctuations is built and its largest
//! eigenvalue `e_max` recorded. `e_max` growing linearly with the system size
//! marks a macroscopically entangled state (index `p = 2`); a bounded `e_max`
//! marks `p = 1`.
//!
//! ```
//! use macroent::refstates::{build_reference, ReferenceState};
//! use macroent::vcm::e_max;
//!
//! let cat = build_reference(&ReferenceState::Cat, 6).unwrap();
//! assert!((e_max(&cat).unwrap() - 6.0).abs() < 1e-9);
//! ```
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod grover;
pub mod refstates;
pub mod shor;
pub mod statevec;
pub mod trace;
pub mod vcm;

pub use error::{Error, Result};
pub use statevec::{Axis, Gate, Site, StateVector, C64};
pub use trace::{Stage, StepTrace, TraceOptions};
pub use vcm::{build_vcm, max_eigen, operator_fluctuation, AdditiveOperator, SpectralResult, Vcm};
