//! Library side of the `psearch` binary: the threaded search driver and the
//! deterministic report emitters, shared with the integration and
//! acceptance suites.

pub mod parallel;
pub mod report;
