//! Command-line front end for `losscape`: structural reports, experiments,
//! loss landscapes and randomized verification.

pub mod builtins;
pub mod cli;
pub mod report;
pub mod verify;

pub use builtins::builtin;
pub use cli::{run, Cli};
pub use report::{analyze, AnalysisReport, AnalyzeOptions};
pub use verify::{run_suite, run_verify, Suite, SuiteResult, VerifyOptions};
