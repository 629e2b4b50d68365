//! Metrics, ROC construction, bootstrapped evaluation reports, and the
//! stratified k-fold grid search.

mod grid;

pub use grid::{
    grid_search, grid_search_with_refit, FoldDiagnostics, GridCellResult, GridSearchOptions,
    GridSearchResult,
};

use serde::{Deserialize, Serialize};

use crate::cohort::Cohort;
use crate::error::{Error, Result};
use crate::model::FittedModel;
use crate::seed;
use crate::stats::{bootstrap_ci, BootstrapCI};

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

fn validate_scores(scores: &[f64], labels: &[u8]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::Parameter(format!(
            "scores ({}) and labels ({}) differ in length",
            scores.len(),
            labels.len()
        )));
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    Ok((neg, pos))
}

/// AUC-ROC as the Mann–Whitney statistic: the fraction of
/// (positive, negative) pairs ranked correctly, ties credited one half.
/// Exactly equals the trapezoidal area under [`roc_curve`].
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (neg, pos) = validate_scores(scores, labels)?;
    if neg == 0 || pos == 0 {
        return Err(Error::UndefinedMetric(
            "AUC needs both outcome classes".into(),
        ));
    }
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Midranks over tie groups, summed for positives.
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            if labels[k] == 1 {
                rank_sum_pos += midrank;
            }
        }
        i = j + 1;
    }
    let u = rank_sum_pos - (pos * (pos + 1)) as f64 / 2.0;
    Ok(u / (pos as f64 * neg as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    #[serde(with = "crate::serde_f64")]
    pub threshold: f64,
}

/// ROC points ordered from threshold +inf down to −inf; coordinates are
/// non-decreasing, anchored at (0,0) and (1,1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
}

impl RocCurve {
    /// Trapezoidal area; equals [`auc`] to machine precision.
    pub fn area(&self) -> f64 {
        let mut area = 0.0;
        for w in self.points.windows(2) {
            area += (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0;
        }
        area
    }
}

/// One point per distinct score threshold (classifier: score >= threshold).
pub fn roc_curve(scores: &[f64], labels: &[u8]) -> Result<RocCurve> {
    let (neg, pos) = validate_scores(scores, labels)?;
    if neg == 0 || pos == 0 {
        return Err(Error::UndefinedMetric(
            "ROC needs both outcome classes".into(),
        ));
    }
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < n {
        let threshold = scores[order[i]];
        let mut j = i;
        while j < n && scores[order[j]] == threshold {
            if labels[order[j]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            j += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
            threshold,
        });
        i = j;
    }
    points.push(RocPoint {
        fpr: 1.0,
        tpr: 1.0,
        threshold: f64::NEG_INFINITY,
    });
    Ok(RocCurve { points })
}

/// Fraction of rows where `score >= threshold` agrees with the label.
pub fn accuracy(scores: &[f64], labels: &[u8], threshold: f64) -> Result<f64> {
    if scores.len() != labels.len() || scores.is_empty() {
        return Err(Error::Parameter(
            "accuracy needs equal-length non-empty scores and labels".into(),
        ));
    }
    let correct = scores
        .iter()
        .zip(labels)
        .filter(|(s, &l)| (**s >= threshold) == (l == 1))
        .count();
    Ok(correct as f64 / scores.len() as f64)
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetSplit {
    Train,
    Test,
}

impl std::fmt::Display for DatasetSplit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DatasetSplit::Train => write!(f, "train"),
            DatasetSplit::Test => write!(f, "test"),
        }
    }
}

/// One comparison-table row: point metrics with percentile bootstrap CIs
/// plus the full ROC polyline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub model_name: String,
    pub dataset: DatasetSplit,
    pub auc: f64,
    pub auc_ci: BootstrapCI,
    pub accuracy: f64,
    pub accuracy_ci: BootstrapCI,
    pub roc: RocCurve,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalSettings {
    pub n_resamples: usize,
    pub alpha: f64,
    pub accuracy_threshold: f64,
    pub folds: usize,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            n_resamples: 1000,
            alpha: 0.05,
            accuracy_threshold: 0.5,
            folds: 5,
        }
    }
}

/// Evaluate a fitted model on a cohort: point AUC and accuracy plus
/// percentile bootstrap intervals, deterministic under `seed`.
pub fn evaluate(
    model: &FittedModel,
    cohort: &Cohort,
    dataset: DatasetSplit,
    settings: &EvalSettings,
    seed_value: u64,
) -> Result<EvalReport> {
    let scores = model.predict_proba(cohort)?;
    let labels = cohort.labels()?;
    evaluate_scores(
        model.kind_name(),
        &scores,
        &labels,
        dataset,
        settings,
        seed_value,
    )
}

/// Score-level entry point (used directly by the ablation driver).
pub fn evaluate_scores(
    model_name: &str,
    scores: &[f64],
    labels: &[u8],
    dataset: DatasetSplit,
    settings: &EvalSettings,
    seed_value: u64,
) -> Result<EvalReport> {
    let point_auc = auc(scores, labels)?;
    let threshold = settings.accuracy_threshold;
    let auc_ci = bootstrap_ci(
        auc,
        scores,
        labels,
        settings.n_resamples,
        settings.alpha,
        seed::derive(seed_value, "auc-ci"),
    )?;
    let accuracy_ci = bootstrap_ci(
        |s, l| accuracy(s, l, threshold),
        scores,
        labels,
        settings.n_resamples,
        settings.alpha,
        seed::derive(seed_value, "accuracy-ci"),
    )?;
    Ok(EvalReport {
        model_name: model_name.to_string(),
        dataset,
        auc: point_auc,
        auc_ci,
        accuracy: accuracy(scores, labels, threshold)?,
        accuracy_ci,
        roc: roc_curve(scores, labels)?,
    })
}

/// Train and test report rows for a list of fitted models, in input order.
pub fn comparison_report(
    models: &[FittedModel],
    train: &Cohort,
    test: &Cohort,
    settings: &EvalSettings,
    seed_value: u64,
) -> Result<(Vec<EvalReport>, Vec<EvalReport>)> {
    let mut train_reports = Vec::with_capacity(models.len());
    let mut test_reports = Vec::with_capacity(models.len());
    for (i, model) in models.iter().enumerate() {
        train_reports.push(evaluate(
            model,
            train,
            DatasetSplit::Train,
            settings,
            seed::derive_indexed(seed_value, "eval-train", i as u64),
        )?);
        test_reports.push(evaluate(
            model,
            test,
            DatasetSplit::Test,
            settings,
            seed::derive_indexed(seed_value, "eval-test", i as u64),
        )?);
    }
    Ok((train_reports, test_reports))
}
