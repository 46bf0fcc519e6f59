//! Config-driven batch front end: parse a job file, run summing-norm
//! computations and property checks, and emit a JSON report.

pub mod config;
pub mod report;
pub mod run;

pub use config::{Config, Diagnostic, Model, Overrides};
pub use report::{strip_timing, Report};
pub use run::{execute, load, load_str};

/// Exit code for configs that fail to parse or validate.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for internal failures.
pub const EXIT_INTERNAL: i32 = 3;
