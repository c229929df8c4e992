//! Experiment driver for the `mpsvd` crate: problem generation, the
//! accuracy suite and the timing suite, all persisted as CSV.

pub mod accuracy;
pub mod cli;
pub mod config;
pub mod error;
pub mod gen;
pub mod perf;

pub use accuracy::{run_accuracy_suite, run_accuracy_suite_with, AccuracyRow, SuiteOutcome};
pub use config::SuiteConfig;
pub use error::{HarnessError, Result};
pub use gen::gen_command;
pub use perf::{run_perf_suite, PerfRow};
