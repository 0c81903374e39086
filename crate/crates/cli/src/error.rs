use mbk_core::exact::ExactError;
use mbk_core::kernel::KernelError;
use mbk_core::verify::VerifyError;
use mbk_core::{GeometryError, IndexError, NormError};
use thiserror::Error;

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    Validation = 2,
    Undecidable = 3,
    VerificationFailed = 4,
    BudgetExhausted = 5,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Undecidable(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Invalid(_) | CliError::Io(_) => ExitCode::Validation,
            CliError::Undecidable(_) => ExitCode::Undecidable,
            CliError::Verification(_) => ExitCode::VerificationFailed,
            CliError::Budget(_) => ExitCode::BudgetExhausted,
        }
    }
}

impl From<ExactError> for CliError {
    fn from(e: ExactError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::EmptyRegionSuspected { .. } => CliError::Budget(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<IndexError> for CliError {
    fn from(e: IndexError) -> Self {
        match e {
            IndexError::BoundaryUndecidable { .. } => CliError::Undecidable(e.to_string()),
            IndexError::OracleInconclusive(_) => CliError::Budget(e.to_string()),
            IndexError::Geometry(g) => g.into(),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<NormError> for CliError {
    fn from(e: NormError) -> Self {
        match e {
            NormError::BoundaryUndecidable { .. } => CliError::Undecidable(e.to_string()),
            NormError::ToleranceNotReached { .. } => CliError::Budget(e.to_string()),
            NormError::Geometry(g) => g.into(),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        match e {
            KernelError::NotConverged { .. } => CliError::Budget(e.to_string()),
            KernelError::EnvelopeViolated { .. } => CliError::Verification(e.to_string()),
            KernelError::Norm(n) => n.into(),
            KernelError::Geometry(g) => g.into(),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::UnknownSuite(_) => CliError::Invalid(e.to_string()),
            VerifyError::Index(x) => x.into(),
            VerifyError::Norm(x) => x.into(),
            VerifyError::Kernel(x) => x.into(),
            VerifyError::Geometry(x) => x.into(),
        }
    }
}
