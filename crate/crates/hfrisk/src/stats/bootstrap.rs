//! Paired nonparametric percentile bootstrap.
//!
//! Each resample draws (score, label) pairs with replacement; resamples
//! that come up single-class are redrawn so rank metrics stay defined. Each
//! resample derives its randomness from (seed, resample index), so the
//! distribution is independent of evaluation order.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BootstrapCI {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub n_resamples: usize,
    pub alpha: f64,
    pub seed: u64,
}

/// The raw bootstrap metric distribution (ablation boxplots consume this
/// directly; [`bootstrap_ci`] reduces it to a percentile interval).
pub fn bootstrap_distribution<M>(
    metric: M,
    scores: &[f64],
    labels: &[u8],
    n_resamples: usize,
    seed_value: u64,
) -> Result<Vec<f64>>
where
    M: Fn(&[f64], &[u8]) -> Result<f64>,
{
    validate(scores, labels)?;
    let n = scores.len();
    let mut values = Vec::with_capacity(n_resamples);
    let mut scratch_scores = vec![0.0; n];
    let mut scratch_labels = vec![0u8; n];
    for b in 0..n_resamples {
        let mut rng = seed::rng(seed::derive_indexed(seed_value, "bootstrap", b as u64));
        for attempt in 0.. {
            if attempt > 10_000 {
                return Err(Error::DegenerateSample(
                    "bootstrap could not draw a two-class resample".into(),
                ));
            }
            let mut any_pos = false;
            let mut any_neg = false;
            for i in 0..n {
                let k = rng.gen_range(0..n);
                scratch_scores[i] = scores[k];
                scratch_labels[i] = labels[k];
                if labels[k] == 1 {
                    any_pos = true;
                } else {
                    any_neg = true;
                }
            }
            if any_pos && any_neg {
                break;
            }
        }
        values.push(metric(&scratch_scores, &scratch_labels)?);
    }
    Ok(values)
}

/// Percentile bootstrap confidence interval for `metric`.
///
/// The point estimate is the metric on the original sample; with
/// `n_resamples == 0` the interval collapses to the point by convention.
pub fn bootstrap_ci<M>(
    metric: M,
    scores: &[f64],
    labels: &[u8],
    n_resamples: usize,
    alpha: f64,
    seed_value: u64,
) -> Result<BootstrapCI>
where
    M: Fn(&[f64], &[u8]) -> Result<f64>,
{
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!("alpha {alpha} outside (0,1)")));
    }
    validate(scores, labels)?;
    let point = metric(scores, labels)?;
    if n_resamples == 0 {
        return Ok(BootstrapCI {
            point,
            lower: point,
            upper: point,
            n_resamples,
            alpha,
            seed: seed_value,
        });
    }
    let mut values = bootstrap_distribution(metric, scores, labels, n_resamples, seed_value)?;
    values.sort_by(f64::total_cmp);
    let lower = percentile_of_sorted(&values, alpha / 2.0);
    let upper = percentile_of_sorted(&values, 1.0 - alpha / 2.0);
    Ok(BootstrapCI {
        point,
        lower,
        upper,
        n_resamples,
        alpha,
        seed: seed_value,
    })
}

fn validate(scores: &[f64], labels: &[u8]) -> Result<()> {
    if scores.len() != labels.len() || scores.len() < 2 {
        return Err(Error::DegenerateSample(format!(
            "scores/labels must have equal length >= 2, got {} and {}",
            scores.len(),
            labels.len()
        )));
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    if pos == 0 || pos == labels.len() {
        return Err(Error::SingleClass(
            "bootstrap requires both outcome classes".into(),
        ));
    }
    Ok(())
}

/// Linear interpolation between order statistics of a sorted slice.
pub fn percentile_of_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}
