use fcs_core::ErrorClass;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at `{path}`: {detail}")]
    Config { path: String, detail: String },

    #[error("{path}: {detail}")]
    Io { path: String, detail: String },

    #[error("{0}")]
    Core(#[from] fcs_core::Error),

    #[error("oracle deviation above {tolerance:e}: χ {chi:e}, p_n {probability:e}, identities {identities:e}")]
    OracleMismatch { chi: f64, probability: f64, identities: f64, tolerance: f64 },
}

impl CliError {
    /// 2 for configuration and contract errors, 3 for numerical-integrity failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Io { .. } => 2,
            CliError::Core(e) => match e.class() {
                ErrorClass::Contract => 2,
                ErrorClass::Numerical => 3,
            },
            CliError::OracleMismatch { .. } => 3,
        }
    }

    /// Field path for configuration errors, invariant name for numerical ones.
    pub fn label(&self) -> String {
        match self {
            CliError::Config { path, .. } => path.clone(),
            CliError::Io { .. } => "io".into(),
            CliError::Core(e) => e.name().into(),
            CliError::OracleMismatch { .. } => "oracle_agreement".into(),
        }
    }
}
