//! Experiment orchestration for the semiclassical phase-space library:
//! ε-sweeps of quantum against classical transport, inequality suites,
//! and CSV/JSON reporting.

pub mod config;
mod error;
pub mod experiments;
pub mod report;
pub mod snapshot;
pub mod suites;

pub use config::RunConfig;
pub use error::{HarnessError, Result};
pub use experiments::{run_l2_convergence, run_negative_sobolev, run_positive_sobolev, Theorem};
pub use report::{Check, ConvergenceTable, Row, SuiteReport};
pub use suites::{run_appendix_suite, run_auxiliary_suite, run_regularity_suite};
