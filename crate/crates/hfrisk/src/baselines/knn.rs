//! k-nearest neighbors on standardized features with euclidean distance.
//! Probability is the positive fraction among the k nearest training rows;
//! distance ties break toward the lower training row index.

use serde::{Deserialize, Serialize};

use crate::cohort::Cohort;
use crate::error::{Error, Result};

use super::{dense_matrix, standardization, two_class_labels};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub feature_names: Vec<String>,
    pub feature_means: Vec<f64>,
    pub feature_stds: Vec<f64>,
    /// Standardized training matrix, row-major.
    matrix: Vec<f64>,
    labels: Vec<u8>,
}

pub fn fit_knn(train: &Cohort, k: usize) -> Result<KnnModel> {
    if k == 0 || k % 2 == 0 {
        return Err(Error::Parameter(format!("k must be odd and >= 1, got {k}")));
    }
    if k > train.n_rows() {
        return Err(Error::Parameter(format!(
            "k = {k} exceeds training size {}",
            train.n_rows()
        )));
    }
    let labels = two_class_labels(train)?;
    let n = train.n_rows();
    let p = train.n_features();
    let mut matrix = dense_matrix(train)?;
    let (means, stds) = standardization(&matrix, n, p);
    for i in 0..n {
        for j in 0..p {
            matrix[i * p + j] = (matrix[i * p + j] - means[j]) / stds[j];
        }
    }
    Ok(KnnModel {
        k,
        feature_names: train.schema().names(),
        feature_means: means,
        feature_stds: stds,
        matrix,
        labels,
    })
}

pub fn predict_knn(model: &KnnModel, rows: &Cohort) -> Result<Vec<f64>> {
    crate::model::check_feature_names(&model.feature_names, rows)?;
    let query = dense_matrix(rows)?;
    let p = model.feature_names.len();
    let n_train = model.labels.len();
    let mut out = Vec::with_capacity(rows.n_rows());
    let mut distances: Vec<(f64, usize)> = Vec::with_capacity(n_train);
    for i in 0..rows.n_rows() {
        distances.clear();
        for t in 0..n_train {
            let mut d2 = 0.0;
            for j in 0..p {
                let q = (query[i * p + j] - model.feature_means[j]) / model.feature_stds[j];
                let diff = q - model.matrix[t * p + j];
                d2 += diff * diff;
            }
            distances.push((d2, t));
        }
        distances.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let positives = distances[..model.k]
            .iter()
            .filter(|(_, t)| model.labels[*t] == 1)
            .count();
        out.push(positives as f64 / model.k as f64);
    }
    Ok(out)
}
