//! Welch's unequal-variance two-sample t-test with Welch–Satterthwaite
//! degrees of freedom. Two-sided p-values come from the regularized
//! incomplete beta function, no lookup tables.

use serde::{Deserialize, Serialize};

use crate::cohort::{Cohort, FeatureKind};
use crate::error::{Error, Result};

use super::special::t_two_sided_p;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TTestResult {
    pub feature: String,
    pub mean_a: f64,
    pub std_a: f64,
    pub n_a: usize,
    pub mean_b: f64,
    pub std_b: f64,
    pub n_b: usize,
    #[serde(with = "crate::serde_f64")]
    pub t_statistic: f64,
    pub degrees_of_freedom: f64,
    pub p_value: f64,
}

fn mean_and_std(sample: &[f64]) -> (f64, f64) {
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let var = sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Welch t-test from raw samples.
pub fn welch_t_test(sample_a: &[f64], sample_b: &[f64]) -> Result<TTestResult> {
    if sample_a.len() < 2 || sample_b.len() < 2 {
        return Err(Error::DegenerateSample(format!(
            "needs n >= 2 on both sides, got {} and {}",
            sample_a.len(),
            sample_b.len()
        )));
    }
    let (mean_a, std_a) = mean_and_std(sample_a);
    let (mean_b, std_b) = mean_and_std(sample_b);
    welch_t_test_from_stats("", mean_a, std_a, sample_a.len(), mean_b, std_b, sample_b.len())
}

/// Welch t-test from summary statistics (sample means, sample standard
/// deviations, and sizes), the form needed to check published tables.
pub fn welch_t_test_from_stats(
    feature: &str,
    mean_a: f64,
    std_a: f64,
    n_a: usize,
    mean_b: f64,
    std_b: f64,
    n_b: usize,
) -> Result<TTestResult> {
    if n_a < 2 || n_b < 2 {
        return Err(Error::DegenerateSample(format!(
            "needs n >= 2 on both sides, got {n_a} and {n_b}"
        )));
    }
    let va = std_a * std_a / n_a as f64;
    let vb = std_b * std_b / n_b as f64;
    let se2 = va + vb;
    if se2 == 0.0 {
        if mean_a == mean_b {
            return Err(Error::DegenerateSample(
                "both variances zero with equal means".into(),
            ));
        }
        // Zero variance but different means: the difference is certain.
        return Ok(TTestResult {
            feature: feature.to_string(),
            mean_a,
            std_a,
            n_a,
            mean_b,
            std_b,
            n_b,
            t_statistic: if mean_a > mean_b {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            },
            degrees_of_freedom: (n_a + n_b - 2) as f64,
            p_value: 0.0,
        });
    }
    let t = (mean_a - mean_b) / se2.sqrt();
    // Welch–Satterthwaite
    let df = se2 * se2 / (va * va / (n_a as f64 - 1.0) + vb * vb / (n_b as f64 - 1.0));
    let p = t_two_sided_p(t, df);
    Ok(TTestResult {
        feature: feature.to_string(),
        mean_a,
        std_a,
        n_a,
        mean_b,
        std_b,
        n_b,
        t_statistic: t,
        degrees_of_freedom: df,
        p_value: p,
    })
}

/// Per-feature train/test comparability table: one Welch t-test per
/// continuous feature, emitted in schema order. Binary features are
/// excluded (comparability tables cover continuous measurements only).
/// Missing cells are excluded from each sample.
pub fn t_test_table(train: &Cohort, test: &Cohort) -> Result<Vec<TTestResult>> {
    if train.schema() != test.schema() {
        return Err(Error::SchemaMismatch(
            "train and test schemas differ".into(),
        ));
    }
    let mut rows = Vec::new();
    for (j, f) in train.schema().iter().enumerate() {
        if f.kind != FeatureKind::Continuous {
            continue;
        }
        let a = train.column_values(j);
        let b = test.column_values(j);
        let mut result = welch_t_test(&a, &b)?;
        result.feature = f.name.clone();
        rows.push(result);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohort::{synthesize, Feature, FeatureSchema, SignalTerm, SynthesisSpec};

    #[test]
    fn identical_samples_give_null_result() {
        let s = vec![1.0, 2.0, 3.0, 4.0];
        let r = welch_t_test(&s, &s).unwrap();
        assert_eq!(r.t_statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn published_age_row_reproduces() {
        let r = welch_t_test_from_stats("Age", 75.57, 12.13, 941, 75.59, 11.83, 236).unwrap();
        assert!((r.p_value - 0.9832).abs() < 0.02, "p = {}", r.p_value);
    }

    #[test]
    fn published_rbc_row_is_significant() {
        let r = welch_t_test_from_stats("RBC", 3.52, 0.57, 941, 3.63, 0.58, 236).unwrap();
        assert!(r.p_value < 0.05, "p = {}", r.p_value);
    }

    #[test]
    fn antisymmetry_and_scale_invariance() {
        let a = vec![1.2, 3.4, 2.2, 5.1, 0.3, 2.9];
        let b = vec![2.0, 4.5, 3.3, 1.1, 0.9];
        let ab = welch_t_test(&a, &b).unwrap();
        let ba = welch_t_test(&b, &a).unwrap();
        assert!((ab.t_statistic + ba.t_statistic).abs() < 1e-12);
        assert!((ab.p_value - ba.p_value).abs() < 1e-12);
        let scale = 37.5;
        let a2: Vec<f64> = a.iter().map(|x| x * scale).collect();
        let b2: Vec<f64> = b.iter().map(|x| x * scale).collect();
        let scaled = welch_t_test(&a2, &b2).unwrap();
        assert!((ab.t_statistic - scaled.t_statistic).abs() < 1e-9);
        assert!((ab.p_value - scaled.p_value).abs() < 1e-9);
    }

    #[test]
    fn degenerate_samples_error() {
        assert!(matches!(
            welch_t_test(&[1.0], &[1.0, 2.0]),
            Err(Error::DegenerateSample(_))
        ));
        assert!(matches!(
            welch_t_test(&[2.0, 2.0], &[2.0, 2.0]),
            Err(Error::DegenerateSample(_))
        ));
    }

    #[test]
    fn zero_variance_distinct_means_is_certain() {
        let r = welch_t_test(&[1.0, 1.0], &[2.0, 2.0]).unwrap();
        assert_eq!(r.p_value, 0.0);
        assert!(r.degrees_of_freedom > 0.0);
    }

    fn synth_pair(mean_shift: f64, seed: u64) -> (Cohort, Cohort) {
        let make = |mean: f64, seed: u64| {
            synthesize(&SynthesisSpec {
                schema: FeatureSchema::new(vec![
                    Feature::continuous("Age", "years", mean, 12.0),
                    Feature::continuous("BMI", "", 28.0, 6.0),
                ])
                .unwrap(),
                n: 600,
                outcome_rate: 0.1,
                signal: vec![SignalTerm::linear("Age", 0.5)],
                interactions: vec![],
                missing_rate: 0.0,
                seed,
                correlation: None,
            })
            .unwrap()
        };
        (make(75.0, seed), make(75.0 + mean_shift, seed + 1))
    }

    #[test]
    fn table_self_comparison_is_all_ones() {
        let (train, _) = synth_pair(0.0, 7);
        let table = t_test_table(&train, &train).unwrap();
        assert_eq!(table.len(), 2);
        for row in table {
            assert!((row.p_value - 1.0).abs() < 1e-9, "{}: {}", row.feature, row.p_value);
        }
    }

    #[test]
    fn shared_generator_rarely_rejects() {
        // Both sides of a seeded 80/20 split share the generator, so nearly
        // every feature should look comparable.
        let spec = SynthesisSpec {
            schema: FeatureSchema::bundled().clone(),
            n: 1177,
            outcome_rate: 0.1,
            signal: vec![SignalTerm::linear("Age", 0.5)],
            interactions: vec![],
            missing_rate: 0.0,
            seed: 42,
            correlation: None,
        };
        let cohort = synthesize(&spec).unwrap();
        let (train, test) = crate::cohort::split(&cohort, 0.2, true, 42).unwrap();
        let table = t_test_table(&train, &test).unwrap();
        let accepted = table.iter().filter(|r| r.p_value > 0.05).count();
        assert!(
            accepted as f64 >= 0.9 * table.len() as f64,
            "{accepted}/{} features comparable",
            table.len()
        );
    }

    #[test]
    fn shifted_generator_is_detected() {
        let (a, b) = synth_pair(5.0, 11);
        let table = t_test_table(&a, &b).unwrap();
        let age = table.iter().find(|r| r.feature == "Age").unwrap();
        assert!(age.p_value < 0.01, "p = {}", age.p_value);
    }

    #[test]
    fn p_matches_quadrature_oracle_on_random_samples() {
        use rand::Rng;
        use rand_distr::StandardNormal;
        let mut rng = crate::seed::rng(123);
        for trial in 0..20 {
            let a: Vec<f64> = (0..30).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let b: Vec<f64> = (0..30)
                .map(|_| rng.sample::<f64, _>(StandardNormal) + 0.2)
                .collect();
            let r = welch_t_test(&a, &b).unwrap();
            let oracle = quadrature_two_sided_p(r.t_statistic, r.degrees_of_freedom);
            assert!(
                (r.p_value - oracle).abs() < 1e-6,
                "trial {trial}: {} vs {oracle}",
                r.p_value
            );
            let _ = rng.gen::<u64>();
        }
    }

    /// Simpson integration of the t density over the central region — the
    /// independent oracle route (no heavy-tail truncation error).
    fn quadrature_two_sided_p(t: f64, df: f64) -> f64 {
        use crate::stats::special::ln_gamma;
        let density = |x: f64| -> f64 {
            let c = ln_gamma((df + 1.0) / 2.0)
                - ln_gamma(df / 2.0)
                - 0.5 * (df * std::f64::consts::PI).ln();
            (c - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp()
        };
        let t = t.abs();
        let n = 40_000;
        let h = t / n as f64;
        let mut s = density(0.0) + density(t);
        for i in 1..n {
            s += density(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        (1.0 - 2.0 * (s * h / 3.0)).clamp(0.0, 1.0)
    }
}
