//! Partial-search workbench core.
//!
//! Everything here lives in the three-dimensional invariant subspace of the
//! block-partitioned search problem: the exact discrete dynamics of the
//! global and local amplitude-amplification operators, the closed-form
//! iteration parameters of the global-local-global family, exhaustive
//! operator-word search, and the continuum bang-bang switching layer built
//! on the skew-symmetric generators of the two operator flows.
//!
//! The crate is `no_std`-compatible (with `alloc`); enable the `libm`
//! feature when building without `std`. IO, file formats, and thread-based
//! parallelism live in the companion `psearch` crate.

#![cfg_attr(not(feature = "std"), no_std)]

#[cfg(not(any(feature = "std", feature = "libm")))]
compile_error!("psearch-core needs either the `std` or the `libm` feature for f64 math");

extern crate alloc;

pub mod control;
pub mod grk;
pub mod linalg;
pub(crate) mod math;
pub mod oracle;
pub mod optimizer;
pub mod reduced;
pub mod rng;
pub mod search;

pub use control::{Generator, PhiTriple};
pub use grk::GrkParameters;
pub use linalg::Mat3;
pub use oracle::FullState;
pub use optimizer::ArcSchedule;
pub use reduced::{DatabaseGeometry, Letter, OperatorWord, ReducedOperator, ReducedState};
pub use search::SearchReport;
