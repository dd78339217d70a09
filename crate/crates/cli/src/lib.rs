//! Front end of `fcs-core`: JSON scenario configs in, JSON result documents and CSV scan tables out.
//!
//! Exit statuses of the `fcs` binary: 0 on success, 2 for configuration or contract errors (the
//! message names the offending field), 3 when a computed quantity fails an integrity check.

pub mod config;
pub mod error;
pub mod pipeline;

pub use config::{load_config, parse_config, ScenarioConfig};
pub use error::CliError;
pub use pipeline::{identity_self_test, oracle_check, run, scan, OracleReport, ResultDocument, ScanTable};
