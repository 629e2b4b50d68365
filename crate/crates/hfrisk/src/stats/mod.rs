//! Statistical gates: Welch two-sample t-tests for cohort comparability,
//! iterative VIF elimination for multicollinearity, and percentile
//! bootstrap confidence intervals.

mod bootstrap;
pub mod special;
mod vif;
mod welch;

pub use bootstrap::{bootstrap_ci, bootstrap_distribution, percentile_of_sorted, BootstrapCI};
pub use vif::{vif_filter, VifEntry, VifReport};
pub use welch::{t_test_table, welch_t_test, welch_t_test_from_stats, TTestResult};
