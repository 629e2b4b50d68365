//! Crate-wide error type.
//!
//! Every fallible operation returns [`Result`]. Variants are grouped so the
//! CLI can map them onto its exit-code contract: configuration problems exit
//! with 2, data problems with 3, and numeric/convergence failures with 4.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid run configuration (bad paths, unknown feature names, ...).
    #[error("config error: {0}")]
    Config(String),

    /// Parameter outside its documented range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Input columns do not match the expected feature schema.
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    /// Unparseable cell in a loaded table.
    #[error("parse error at row {row}, column '{column}': {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    /// Cohort became empty during cleaning.
    #[error("empty cohort: {0}")]
    EmptyCohort(String),

    /// A feature has no non-missing training values to impute from.
    #[error("unimputable feature '{0}': no non-missing training values")]
    UnimputableFeature(String),

    /// Fitted imputation values do not cover a feature with missing cells.
    #[error("imputer coverage error: {0}")]
    ImputerCoverage(String),

    /// Operation requires both outcome classes.
    #[error("class error: {0}")]
    SingleClass(String),

    /// Stratified splitting is impossible on the given outcome vector.
    #[error("stratification error: {0}")]
    Stratification(String),

    /// Sample too small or too degenerate for the requested statistic.
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    /// Statistic is not applicable to the given input shape.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// Metric undefined on the given scores/labels.
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// Every grid cell failed.
    #[error("grid search failed: {0}")]
    SearchFailed(String),

    /// Intercept calibration for the synthetic outcome model failed.
    #[error("calibration error: {0}")]
    Calibration(String),

    /// Generic data-contract violation (missing cells where none allowed, ...).
    #[error("data error: {0}")]
    Data(String),

    /// A pipeline stage artifact expected on disk is absent.
    #[error("missing artifact for stage '{0}'")]
    MissingArtifact(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Exit code the CLI uses for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parameter(_) => 2,
            Error::Calibration(_) | Error::DegenerateSample(_) => 4,
            _ => 3,
        }
    }
}
