//! In-hospital mortality risk modeling for ICU heart-failure cohorts.
//!
//! The crate covers the full pipeline at desk scale:
//!
//! - [`cohort`] — data model, CSV ingestion, train/test splitting, and a
//!   seeded synthetic generator driven by published summary statistics with
//!   a planted (and therefore recoverable) outcome signal.
//! - [`preprocess`] — cleaning, median imputation fitted on training data
//!   only, z-score outlier removal, and minority-class oversampling.
//! - [`stats`] — Welch t-tests, iterative VIF elimination, and percentile
//!   bootstrap confidence intervals.
//! - [`boost`] — second-order gradient-boosted regression trees with a
//!   logistic objective and exact greedy split search.
//! - [`baselines`] — logistic regression (plain and L1), random forest,
//!   and k-nearest neighbors behind one fit/predict contract.
//! - [`eval`] — AUC/ROC/accuracy, bootstrapped reports, stratified k-fold
//!   grid search, and the model comparison tables.
//! - [`explain`] — exact per-prediction Shapley attribution for the boosted
//!   ensemble plus aggregate rankings and direction checks.
//! - [`pipeline`] — JSON-configured end-to-end runs, the ablation driver,
//!   figure emission, and the content-addressed stage engine behind the CLI.

pub mod baselines;
pub mod boost;
pub mod cohort;
pub mod error;
pub mod eval;
pub mod explain;
pub mod model;
pub mod pipeline;
pub mod preprocess;
pub mod seed;
pub(crate) mod serde_f64;
pub mod stats;

pub use error::{Error, Result};
