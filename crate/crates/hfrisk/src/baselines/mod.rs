//! Comparison learners: logistic regression (optionally L1/L2 penalized),
//! random forest, and k-nearest neighbors. All expose the same
//! fit/predict-probability contract the evaluation layer expects.
//!
//! Linear and KNN models standardize features internally (penalty geometry
//! and euclidean distance require it); tree learners consume raw features.
//! None of the baselines accept missing cells — they run on imputed data.

mod forest;
mod knn;
mod linear;

pub use forest::{fit_forest, ForestModel, ForestParams};
pub use knn::{fit_knn, predict_knn, KnnModel};
pub use linear::{fit_logistic, LinearModel, LogisticParams, Penalty};

use crate::cohort::Cohort;
use crate::error::{Error, Result};

/// Dense feature matrix (row-major) extracted from a cohort, rejecting
/// missing cells.
pub(crate) fn dense_matrix(cohort: &Cohort) -> Result<Vec<f64>> {
    let p = cohort.n_features();
    let mut out = Vec::with_capacity(cohort.n_rows() * p);
    for i in 0..cohort.n_rows() {
        for (j, v) in cohort.row(i).iter().enumerate() {
            match v {
                Some(x) => out.push(*x),
                None => {
                    return Err(Error::Data(format!(
                        "missing cell in '{}' at row {i}; baselines require imputed data",
                        cohort.schema().get(j).name
                    )))
                }
            }
        }
    }
    Ok(out)
}

pub(crate) fn two_class_labels(cohort: &Cohort) -> Result<Vec<u8>> {
    let labels = cohort.labels()?;
    let pos = labels.iter().filter(|&&l| l == 1).count();
    if pos == 0 || pos == labels.len() {
        return Err(Error::SingleClass(
            "training requires both outcome classes".into(),
        ));
    }
    Ok(labels)
}

/// Per-feature (mean, std) captured at fit time; zero-variance features get
/// std 1 so standardized values collapse to 0.
pub(crate) fn standardization(matrix: &[f64], n: usize, p: usize) -> (Vec<f64>, Vec<f64>) {
    let mut means = vec![0.0; p];
    let mut stds = vec![0.0; p];
    for i in 0..n {
        for j in 0..p {
            means[j] += matrix[i * p + j];
        }
    }
    for m in means.iter_mut() {
        *m /= n as f64;
    }
    for i in 0..n {
        for j in 0..p {
            stds[j] += (matrix[i * p + j] - means[j]).powi(2);
        }
    }
    for s in stds.iter_mut() {
        *s = (*s / n as f64).sqrt();
        if *s == 0.0 {
            *s = 1.0;
        }
    }
    (means, stds)
}
