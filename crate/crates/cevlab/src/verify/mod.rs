//! Experiment orchestration: configurations, runners, reports, distances,
//! and the pinned acceptance suite.

pub mod config;
mod experiments;
pub mod ks;
pub mod report;
pub mod suite;

pub use config::{ExperimentConfig, ExperimentKind};
pub use experiments::run_experiment;
pub use ks::{ks_one_sample, ks_two_sample};
pub use report::{read_report, write_report, Diagnostics, Distance, Estimate, Report, Target, Verdict};
pub use suite::{format_summary, paper_suite, run_suite, SuiteItem, SuiteOutcome};
