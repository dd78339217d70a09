use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input: a precondition or configuration value is out of range.
    Contract,
    /// A computed quantity broke one of its invariants.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: {detail}")]
    Contract { op: &'static str, detail: String },

    #[error("{routine} failed to converge within {iterations} iterations")]
    NonConvergence { routine: &'static str, iterations: usize },

    #[error("invariant `{name}` violated: {detail}")]
    Invariant { name: &'static str, detail: String },

    #[error("chemical potential {mu} lies within {gate:e} of level {level} (index {index})")]
    Degeneracy { mu: f64, level: f64, index: usize, gate: f64 },

    #[error("operator is not block-diagonal with respect to the charge split: off-block norm {off_block:e}")]
    Structure { off_block: f64 },

    #[error("step count {steps} too small: estimated propagation error {estimate:e} exceeds {tolerance:e}")]
    Accuracy { steps: usize, estimate: f64, tolerance: f64 },

    #[error("scatterer support [{start}, {end}] exceeds the time window [{window_start}, {window_end})")]
    Truncation { start: f64, end: f64, window_start: f64, window_end: f64 },

    #[error("grid size {grid} aliases charges: need an odd size of at least {required}")]
    Aliasing { grid: usize, required: usize },

    #[error("charge distribution integrity: {detail}")]
    DistributionIntegrity { detail: String },

    #[error("{modes} modes exceeds the Fock-space limit of {max}")]
    SizeGate { modes: usize, max: usize },

    #[error("hypothesis violated: {detail}")]
    Hypothesis { detail: String },

    #[error("normalization det(1+M) = {value:e} underflows")]
    Underflow { value: f64 },

    #[error("causal cone {reach} reaches the lead end (shortest lead {length} sites)")]
    BoundaryContamination { reach: f64, length: usize },

    #[error("not applicable: {detail}")]
    NotApplicable { detail: String },
}

impl Error {
    pub(crate) fn contract(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Contract { op, detail: detail.into() }
    }

    pub(crate) fn invariant(name: &'static str, detail: impl Into<String>) -> Self {
        Error::Invariant { name, detail: detail.into() }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NonConvergence { .. }
            | Error::Invariant { .. }
            | Error::DistributionIntegrity { .. }
            | Error::Hypothesis { .. }
            | Error::Underflow { .. } => ErrorClass::Numerical,
            _ => ErrorClass::Contract,
        }
    }

    /// Short machine-readable name of the violated invariant or gate.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Contract { .. } => "contract",
            Error::NonConvergence { .. } => "convergence",
            Error::Invariant { name, .. } => name,
            Error::Degeneracy { .. } => "degeneracy",
            Error::Structure { .. } => "block_structure",
            Error::Accuracy { .. } => "step_accuracy",
            Error::Truncation { .. } => "truncation",
            Error::Aliasing { .. } => "aliasing",
            Error::DistributionIntegrity { .. } => "distribution_integrity",
            Error::SizeGate { .. } => "size_gate",
            Error::Hypothesis { .. } => "commutation_hypothesis",
            Error::Underflow { .. } => "underflow",
            Error::BoundaryContamination { .. } => "causal_cone",
            Error::NotApplicable { .. } => "not_applicable",
        }
    }
}
