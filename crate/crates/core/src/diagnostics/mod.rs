//! Trace-ideal norms and parameter scans: lead-length and Fermi-depth independence of the
//! counting statistics, the non-compactness of `(Q_U − Q)N` in the chiral model, the thermal
//! variance law, and the Hilbert–Schmidt bound on the first Dyson term.
//!
//! At finite dimension every norm here is finite; what the scans exhibit is scaling. Growth of a
//! norm under a depth doubling is read as "not trace class in the limit", stabilization as
//! "trace class" — a heuristic, not a proof.

mod dyson;
mod noncompact;
mod norms;
mod scans;

pub use dyson::{dyson_hs_check, HsBound, OffDiagonalDrive, SpatialProfile, HS_QUADRATURE_TOL};
pub use noncompact::{noncompact_demo, NoncompactDemo};
pub use norms::{norm_report, NormReport, NORM_LABELS};
pub use scans::{
    analyze, linear_fit, tenet_scan_depth, tenet_scan_length, variance_vs_length, AnalysisSettings, DepthFamily,
    LatticeScenario, ScanResult, ScanRow, StateSpec, VarianceScan,
};

#[cfg(test)]
mod tests;
