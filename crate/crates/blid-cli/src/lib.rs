//! Command-line front end for the blid toolkit: named verification suites
//! with JSON reports and CSV plot data, plus one-shot germ extension and
//! conjugacy solving.

pub mod config;
pub mod oneshot;
pub mod report;
pub mod runner;
pub mod suites;

pub use config::SuiteConfig;
pub use report::{emit_plotdata, CaseResult, PlotSeries, Report};
pub use runner::run_suite;
pub use suites::SUITE_NAMES;
