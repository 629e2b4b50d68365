//! Logistic regression minimized by proximal gradient descent with a
//! backtracking line search. The L1 penalty goes through soft-thresholding
//! (so weights shrink to exact zeros); the intercept is never penalized.

use serde::{Deserialize, Serialize};

use crate::cohort::Cohort;
use crate::error::Result;
use crate::stats::special::sigmoid;

use super::{dense_matrix, standardization, two_class_labels};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Penalty {
    None,
    L1,
    #[default]
    L2,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticParams {
    pub penalty: Penalty,
    pub strength: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            penalty: Penalty::L2,
            strength: 1.0,
            max_iter: 1000,
            tol: 1e-8,
        }
    }
}

/// Fitted linear model over internally standardized features.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub penalty: Penalty,
    pub strength: f64,
    pub feature_names: Vec<String>,
    pub feature_means: Vec<f64>,
    pub feature_stds: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl LinearModel {
    /// Event probability per row. Missing cells standardize to 0, i.e. the
    /// training mean.
    pub fn predict_proba(&self, rows: &Cohort) -> Result<Vec<f64>> {
        let p = self.weights.len();
        crate::model::check_feature_names(&self.feature_names, rows)?;
        let mut out = Vec::with_capacity(rows.n_rows());
        for i in 0..rows.n_rows() {
            let mut margin = self.intercept;
            for (j, v) in rows.row(i).iter().enumerate().take(p) {
                if let Some(x) = v {
                    margin += self.weights[j] * (x - self.feature_means[j]) / self.feature_stds[j];
                }
            }
            out.push(sigmoid(margin));
        }
        Ok(out)
    }

    pub fn nonzero_weights(&self) -> usize {
        self.weights.iter().filter(|w| **w != 0.0).count()
    }
}

/// Mean logistic loss plus the smooth part of the penalty.
fn smooth_objective(
    z: &[f64],
    labels: &[u8],
    n: usize,
    p: usize,
    weights: &[f64],
    intercept: f64,
    l2: f64,
) -> f64 {
    let mut loss = 0.0;
    for i in 0..n {
        let mut m = intercept;
        for j in 0..p {
            m += weights[j] * z[i * p + j];
        }
        loss += crate::stats::special::logistic_loss(m, f64::from(labels[i]));
    }
    loss / n as f64 + 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>()
}

/// Fit by proximal gradient descent with backtracking. Non-convergence at
/// `max_iter` is not an error; the model comes back flagged unconverged.
pub fn fit_logistic(train: &Cohort, params: &LogisticParams) -> Result<LinearModel> {
    let labels = two_class_labels(train)?;
    let n = train.n_rows();
    let p = train.n_features();
    let matrix = dense_matrix(train)?;
    let (means, stds) = standardization(&matrix, n, p);
    let mut z = matrix;
    for i in 0..n {
        for j in 0..p {
            z[i * p + j] = (z[i * p + j] - means[j]) / stds[j];
        }
    }

    let (l1, l2) = match params.penalty {
        Penalty::None => (0.0, 0.0),
        Penalty::L1 => (params.strength, 0.0),
        Penalty::L2 => (0.0, params.strength),
    };

    let mut weights = vec![0.0_f64; p];
    let mut intercept = 0.0_f64;
    let mut grad_w = vec![0.0_f64; p];
    let mut step = 1.0_f64;
    let mut converged = false;
    let mut iterations = 0;

    let mut current = smooth_objective(&z, &labels, n, p, &weights, intercept, l2);
    for iter in 0..params.max_iter {
        iterations = iter + 1;
        grad_w.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        for i in 0..n {
            let mut m = intercept;
            for j in 0..p {
                m += weights[j] * z[i * p + j];
            }
            let r = sigmoid(m) - f64::from(labels[i]);
            grad_b += r;
            for j in 0..p {
                grad_w[j] += r * z[i * p + j];
            }
        }
        grad_b /= n as f64;
        for (g, w) in grad_w.iter_mut().zip(&weights) {
            *g = *g / n as f64 + l2 * w;
        }

        // Backtracking on the smooth part around the proximal step.
        let mut new_w = vec![0.0; p];
        let mut new_b;
        loop {
            for j in 0..p {
                new_w[j] = soft_threshold(weights[j] - step * grad_w[j], step * l1);
            }
            new_b = intercept - step * grad_b;
            let candidate = smooth_objective(&z, &labels, n, p, &new_w, new_b, l2);
            let mut quad = current;
            let mut dist2 = (new_b - intercept).powi(2);
            for j in 0..p {
                let d = new_w[j] - weights[j];
                quad += grad_w[j] * d;
                dist2 += d * d;
            }
            quad += grad_b * (new_b - intercept) + dist2 / (2.0 * step);
            if candidate <= quad + 1e-14 || step < 1e-12 {
                current = candidate;
                break;
            }
            step *= 0.5;
        }

        let mut max_change = (new_b - intercept).abs();
        for j in 0..p {
            max_change = max_change.max((new_w[j] - weights[j]).abs());
        }
        weights.copy_from_slice(&new_w);
        intercept = new_b;
        if max_change < params.tol {
            converged = true;
            break;
        }
        // Allow the step to grow back after conservative shrinks.
        step = (step * 1.25).min(1e3);
    }

    Ok(LinearModel {
        weights,
        intercept,
        penalty: params.penalty,
        strength: params.strength,
        feature_names: train.schema().names(),
        feature_means: means,
        feature_stds: stds,
        converged,
        iterations,
    })
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return v;
    }
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::test_support::cohort_from;
    use crate::cohort::{synthesize, FeatureSchema, SignalTerm, SynthesisSpec};
    use crate::stats::special::logit;

    #[test]
    fn separable_data_stays_finite_under_l2() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let labels: Vec<u8> = (0..20).map(|i| u8::from(i >= 10)).collect();
        let cohort = cohort_from(&["X"], &rows, &labels);
        let model = fit_logistic(
            &cohort,
            &LogisticParams {
                penalty: Penalty::L2,
                strength: 1.0,
                ..LogisticParams::default()
            },
        )
        .unwrap();
        assert!(model.weights[0].is_finite());
        let probs = model.predict_proba(&cohort).unwrap();
        let correct = probs
            .iter()
            .zip(&labels)
            .filter(|(p, &l)| (**p >= 0.5) == (l == 1))
            .count();
        assert_eq!(correct, 20);
    }

    #[test]
    fn full_l1_shrinkage_recovers_base_rate_intercept() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![(i % 7) as f64, (i % 3) as f64])
            .collect();
        let labels: Vec<u8> = (0..40).map(|i| u8::from(i % 4 == 0)).collect();
        let cohort = cohort_from(&["A", "B"], &rows, &labels);
        let model = fit_logistic(
            &cohort,
            &LogisticParams {
                penalty: Penalty::L1,
                strength: 10.0,
                max_iter: 5000,
                tol: 1e-10,
            },
        )
        .unwrap();
        assert_eq!(model.nonzero_weights(), 0);
        let base_rate = 10.0 / 40.0;
        assert!(
            (model.intercept - logit(base_rate)).abs() < 1e-4,
            "intercept {} vs {}",
            model.intercept,
            logit(base_rate)
        );
    }

    #[test]
    fn l1_keeps_planted_signal_features() {
        let spec = SynthesisSpec {
            schema: FeatureSchema::bundled().clone(),
            n: 900,
            outcome_rate: 0.25,
            signal: vec![
                SignalTerm::linear("Leucocyte", 1.5),
                SignalTerm::linear("RDW", 1.0),
                SignalTerm::linear("Urine_output", -1.2),
            ],
            interactions: vec![],
            missing_rate: 0.0,
            seed: 21,
            correlation: None,
        };
        let cohort = synthesize(&spec).unwrap();
        let model = fit_logistic(
            &cohort,
            &LogisticParams {
                penalty: Penalty::L1,
                strength: 0.02,
                max_iter: 3000,
                tol: 1e-9,
            },
        )
        .unwrap();
        assert!(model.nonzero_weights() < 48);
        for name in ["Leucocyte", "RDW", "Urine_output"] {
            let j = cohort.schema().index_of(name).unwrap();
            assert!(
                model.weights[j] != 0.0,
                "{name} was shrunk away; weights {:?}",
                model.weights
            );
        }
    }

    #[test]
    fn final_loss_beats_zero_vector() {
        let rows: Vec<Vec<f64>> = (0..60).map(|i| vec![(i % 11) as f64, (i % 5) as f64]).collect();
        let labels: Vec<u8> = (0..60).map(|i| u8::from((i % 11) > 5)).collect();
        let cohort = cohort_from(&["A", "B"], &rows, &labels);
        for penalty in [Penalty::None, Penalty::L1, Penalty::L2] {
            let params = LogisticParams {
                penalty,
                strength: 0.01,
                ..LogisticParams::default()
            };
            let model = fit_logistic(&cohort, &params).unwrap();
            let matrix = dense_matrix(&cohort).unwrap();
            let (means, stds) = standardization(&matrix, 60, 2);
            let mut z = matrix;
            for i in 0..60 {
                for j in 0..2 {
                    z[i * 2 + j] = (z[i * 2 + j] - means[j]) / stds[j];
                }
            }
            let l2 = if penalty == Penalty::L2 { 0.01 } else { 0.0 };
            let at_fit = smooth_objective(&z, &labels, 60, 2, &model.weights, model.intercept, l2);
            let at_zero = smooth_objective(&z, &labels, 60, 2, &[0.0, 0.0], 0.0, l2);
            assert!(at_fit <= at_zero + 1e-12, "{penalty:?}: {at_fit} vs {at_zero}");
        }
    }

    #[test]
    fn l1_path_sparsity_is_monotone() {
        let spec = SynthesisSpec {
            schema: FeatureSchema::bundled().clone(),
            n: 400,
            outcome_rate: 0.3,
            signal: vec![
                SignalTerm::linear("Leucocyte", 1.2),
                SignalTerm::linear("Age", 0.6),
            ],
            interactions: vec![],
            missing_rate: 0.0,
            seed: 33,
            correlation: None,
        };
        let cohort = synthesize(&spec).unwrap();
        let mut last = usize::MAX;
        for k in 0..10 {
            let strength = 1e-3 * (10.0_f64).powf(k as f64 * 4.0 / 9.0); // 1e-3 .. 10
            let model = fit_logistic(
                &cohort,
                &LogisticParams {
                    penalty: Penalty::L1,
                    strength,
                    max_iter: 2000,
                    tol: 1e-9,
                },
            )
            .unwrap();
            let nz = model.nonzero_weights();
            assert!(nz <= last, "sparsity not monotone at strength {strength}: {nz} > {last}");
            last = nz;
        }
        assert_eq!(last, 0);
    }

    #[test]
    fn unconverged_fits_are_flagged_not_errors() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64]).collect();
        let labels: Vec<u8> = (0..30).map(|i| u8::from(i % 2 == 0)).collect();
        let cohort = cohort_from(&["X"], &rows, &labels);
        let model = fit_logistic(
            &cohort,
            &LogisticParams {
                max_iter: 2,
                tol: 1e-14,
                ..LogisticParams::default()
            },
        )
        .unwrap();
        assert!(!model.converged);
        assert_eq!(model.iterations, 2);
    }
}
