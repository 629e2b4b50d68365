//! Synthetic cohort generation from schema summary statistics.
//!
//! Continuous features draw from a normal with the schema's (mean, std),
//! clipped at mean ± 4·std so physically absurd values cannot occur (the
//! clipping slightly shrinks the realized std; the mean is unaffected
//! because the cut is symmetric). Binary features draw at their prevalence.
//! Outcomes follow a planted logistic model over standardized feature
//! values whose intercept is calibrated by bisection directly against the
//! realized event rate, so the generated prevalence is known and downstream
//! learners have a recoverable signal with known ground truth.
//!
//! Features are independent by default; an optional correlation block is
//! applied through a Cholesky factor for stress tests.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::stats::special::sigmoid;

use super::{Cohort, FeatureKind, FeatureSchema};

/// One additive term of the planted outcome model, applied to the feature's
/// standardized value `z` ((x − mean)/std for continuous features,
/// x − prevalence for binary ones).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignalTerm {
    pub feature: String,
    pub coefficient: f64,
    #[serde(default)]
    pub transform: SignalTransform,
}

impl SignalTerm {
    pub fn linear(feature: &str, coefficient: f64) -> SignalTerm {
        SignalTerm {
            feature: feature.to_string(),
            coefficient,
            transform: SignalTransform::Identity,
        }
    }
}

/// Transform applied to the standardized value before the coefficient.
/// `Step` and `Square` plant non-linear structure that linear learners
/// cannot represent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SignalTransform {
    #[default]
    Identity,
    Square,
    Step {
        threshold: f64,
    },
}

impl SignalTransform {
    fn apply(self, z: f64) -> f64 {
        match self {
            SignalTransform::Identity => z,
            SignalTransform::Square => z * z,
            SignalTransform::Step { threshold } => f64::from(z > threshold),
        }
    }
}

/// Product term between two standardized features.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InteractionTerm {
    pub features: (String, String),
    pub coefficient: f64,
}

/// Optional correlation block over a subset of continuous features,
/// given as a full symmetric positive-definite correlation matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationSpec {
    pub features: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthesisSpec {
    pub schema: FeatureSchema,
    pub n: usize,
    pub outcome_rate: f64,
    #[serde(default)]
    pub signal: Vec<SignalTerm>,
    #[serde(default)]
    pub interactions: Vec<InteractionTerm>,
    #[serde(default)]
    pub missing_rate: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation: Option<CorrelationSpec>,
}

impl SynthesisSpec {
    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Parameter("synthesis requires n >= 1".into()));
        }
        if !(self.outcome_rate > 0.0 && self.outcome_rate < 1.0) {
            return Err(Error::Calibration(format!(
                "outcome_rate {} is not strictly inside (0,1)",
                self.outcome_rate
            )));
        }
        if !(0.0..1.0).contains(&self.missing_rate) {
            return Err(Error::Parameter(format!(
                "missing_rate {} outside [0,1)",
                self.missing_rate
            )));
        }
        for term in &self.signal {
            if self.schema.index_of(&term.feature).is_none() {
                return Err(Error::Config(format!(
                    "signal feature '{}' not in schema",
                    term.feature
                )));
            }
        }
        for term in &self.interactions {
            for name in [&term.features.0, &term.features.1] {
                if self.schema.index_of(name).is_none() {
                    return Err(Error::Config(format!(
                        "interaction feature '{name}' not in schema"
                    )));
                }
            }
        }
        for f in self.schema.iter() {
            match f.kind {
                FeatureKind::Continuous => {
                    if f.mean.is_none() || f.std.is_none() {
                        return Err(Error::Config(format!(
                            "continuous feature '{}' lacks mean/std for synthesis",
                            f.name
                        )));
                    }
                }
                FeatureKind::Binary => {
                    if f.prevalence.is_none() {
                        return Err(Error::Config(format!(
                            "binary feature '{}' lacks a prevalence for synthesis",
                            f.name
                        )));
                    }
                }
            }
        }
        if let Some(corr) = &self.correlation {
            if corr.matrix.len() != corr.features.len()
                || corr.matrix.iter().any(|r| r.len() != corr.features.len())
            {
                return Err(Error::Config("correlation matrix is not square".into()));
            }
            for name in &corr.features {
                match self.schema.index_of(name) {
                    None => {
                        return Err(Error::Config(format!(
                            "correlation feature '{name}' not in schema"
                        )))
                    }
                    Some(j) if self.schema.get(j).kind != FeatureKind::Continuous => {
                        return Err(Error::Config(format!(
                            "correlation feature '{name}' is not continuous"
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
fn cholesky(matrix: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let k = matrix.len();
    let mut l = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..=i {
            let mut sum = matrix[i][j];
            for m in 0..j {
                sum -= l[i][m] * l[j][m];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(Error::Config(
                        "correlation matrix is not positive definite".into(),
                    ));
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Generate a cohort from `spec`. Identical specs (including seed) produce
/// bit-identical cohorts.
pub fn synthesize(spec: &SynthesisSpec) -> Result<Cohort> {
    spec.validate()?;
    let schema = &spec.schema;
    let n = spec.n;
    let p = schema.len();
    let mut rng = seed::rng(seed::derive(spec.seed, "synthesize"));

    let chol = match &spec.correlation {
        Some(c) => Some((
            c.features
                .iter()
                .map(|name| schema.index_of(name).unwrap())
                .collect::<Vec<usize>>(),
            cholesky(&c.matrix)?,
        )),
        None => None,
    };

    // Feature draws, row-major in schema order.
    let mut values: Vec<Option<f64>> = Vec::with_capacity(n * p);
    let mut z_row = vec![0.0_f64; p];
    for _ in 0..n {
        for (j, f) in schema.iter().enumerate() {
            z_row[j] = match f.kind {
                FeatureKind::Continuous => rng.sample::<f64, _>(StandardNormal),
                FeatureKind::Binary => f64::from(rng.gen::<f64>() < f.prevalence.unwrap()),
            };
        }
        if let Some((cols, l)) = &chol {
            let raw: Vec<f64> = cols.iter().map(|&j| z_row[j]).collect();
            for (bi, &j) in cols.iter().enumerate() {
                let mut acc = 0.0;
                for (bj, r) in raw.iter().enumerate().take(bi + 1) {
                    acc += l[bi][bj] * r;
                }
                z_row[j] = acc;
            }
        }
        for (j, f) in schema.iter().enumerate() {
            let v = match f.kind {
                FeatureKind::Continuous => {
                    let z = z_row[j].clamp(-4.0, 4.0);
                    f.mean.unwrap() + f.std.unwrap() * z
                }
                FeatureKind::Binary => z_row[j],
            };
            values.push(Some(v));
        }
    }

    // Planted linear predictor per row over standardized values.
    let standardized = |row: usize, col: usize| -> f64 {
        let f = schema.get(col);
        let x = values[row * p + col].unwrap();
        match f.kind {
            FeatureKind::Continuous => {
                let s = f.std.unwrap();
                if s > 0.0 {
                    (x - f.mean.unwrap()) / s
                } else {
                    0.0
                }
            }
            FeatureKind::Binary => x - f.prevalence.unwrap(),
        }
    };
    let mut signal = vec![0.0_f64; n];
    for term in &spec.signal {
        let j = schema.index_of(&term.feature).unwrap();
        for (i, s) in signal.iter_mut().enumerate() {
            *s += term.coefficient * term.transform.apply(standardized(i, j));
        }
    }
    for term in &spec.interactions {
        let a = schema.index_of(&term.features.0).unwrap();
        let b = schema.index_of(&term.features.1).unwrap();
        for (i, s) in signal.iter_mut().enumerate() {
            *s += term.coefficient * standardized(i, a) * standardized(i, b);
        }
    }

    // Draw the outcome uniforms, then bisect the intercept against the
    // realized (sampled) event rate. The rate is a monotone step function of
    // the intercept with steps of 1/n, so bisection lands within one step of
    // the target.
    let uniforms: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let realized_rate = |b: f64| -> f64 {
        let hits = signal
            .iter()
            .zip(&uniforms)
            .filter(|(s, u)| **u < sigmoid(b + **s))
            .count();
        hits as f64 / n as f64
    };
    let (mut lo, mut hi) = (-60.0_f64, 60.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if realized_rate(mid) < spec.outcome_rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let intercept = if (realized_rate(lo) - spec.outcome_rate).abs()
        < (realized_rate(hi) - spec.outcome_rate).abs()
    {
        lo
    } else {
        hi
    };
    let achieved = realized_rate(intercept);
    if (achieved - spec.outcome_rate).abs() > 0.02 {
        return Err(Error::Calibration(format!(
            "intercept calibration reached rate {achieved:.4}, target {:.4}",
            spec.outcome_rate
        )));
    }
    let outcomes: Vec<Option<u8>> = signal
        .iter()
        .zip(&uniforms)
        .map(|(s, u)| Some(u8::from(*u < sigmoid(intercept + s))))
        .collect();

    // Missing markers, uniformly at random over feature cells only.
    if spec.missing_rate > 0.0 {
        for cell in values.iter_mut() {
            if rng.gen::<f64>() < spec.missing_rate {
                *cell = None;
            }
        }
    }

    let row_ids = (0..n).map(|i| format!("r{i}")).collect();
    Cohort::new(schema.clone(), values, outcomes, row_ids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohort::Feature;

    fn spec_with(features: Vec<Feature>, n: usize, seed: u64) -> SynthesisSpec {
        SynthesisSpec {
            schema: FeatureSchema::new(features).unwrap(),
            n,
            outcome_rate: 0.10,
            signal: Vec::new(),
            interactions: Vec::new(),
            missing_rate: 0.0,
            seed,
            correlation: None,
        }
    }

    #[test]
    fn age_mean_within_three_standard_errors() {
        let spec = spec_with(vec![Feature::continuous("Age", "years", 75.57, 12.13)], 10_000, 42);
        let cohort = synthesize(&spec).unwrap();
        let mean: f64 = cohort.column_values(0).iter().sum::<f64>() / 10_000.0;
        assert!((mean - 75.57).abs() < 0.4, "mean {mean}");
    }

    #[test]
    fn zero_missing_rate_leaves_no_missing_cells() {
        let spec = spec_with(vec![Feature::continuous("Age", "", 70.0, 10.0)], 500, 1);
        assert_eq!(synthesize(&spec).unwrap().missing_cell_count(), 0);
    }

    #[test]
    fn missing_rate_is_roughly_honored() {
        let mut spec = spec_with(vec![Feature::continuous("Age", "", 70.0, 10.0)], 5_000, 2);
        spec.missing_rate = 0.2;
        let cohort = synthesize(&spec).unwrap();
        let frac = cohort.missing_cell_count() as f64 / 5_000.0;
        assert!((frac - 0.2).abs() < 0.03, "missing fraction {frac}");
    }

    #[test]
    fn planted_positive_signal_separates_group_means() {
        // Independent oracle: direct group-mean computation on the output.
        let mut spec = spec_with(
            vec![
                Feature::continuous("Leucocyte", "", 10.51, 4.30),
                Feature::continuous("Age", "", 75.57, 12.13),
            ],
            4_000,
            42,
        );
        spec.signal = vec![SignalTerm::linear("Leucocyte", 2.0)];
        let cohort = synthesize(&spec).unwrap();
        let (mut s1, mut n1, mut s0, mut n0) = (0.0, 0, 0.0, 0);
        for i in 0..cohort.n_rows() {
            let v = cohort.value(i, 0).unwrap();
            if cohort.outcome(i) == Some(1) {
                s1 += v;
                n1 += 1;
            } else {
                s0 += v;
                n0 += 1;
            }
        }
        assert!(n1 > 0 && n0 > 0);
        assert!(s1 / n1 as f64 > s0 / n0 as f64);
    }

    #[test]
    fn realized_outcome_rate_is_calibrated() {
        for seed in [1, 2, 3] {
            let mut spec = spec_with(vec![Feature::continuous("Age", "", 70.0, 10.0)], 1_177, seed);
            spec.signal = vec![SignalTerm::linear("Age", 1.0)];
            spec.outcome_rate = 0.10;
            let cohort = synthesize(&spec).unwrap();
            let (_, pos, _) = cohort.outcome_counts();
            let rate = pos as f64 / 1_177.0;
            assert!((rate - 0.10).abs() <= 0.02, "seed {seed}: rate {rate}");
        }
    }

    #[test]
    fn identical_seed_gives_bit_identical_cohort() {
        let mut spec = spec_with(
            vec![
                Feature::continuous("Age", "", 70.0, 10.0),
                Feature::binary("Hypertension", "", 0.6),
            ],
            300,
            9,
        );
        spec.missing_rate = 0.1;
        spec.signal = vec![SignalTerm::linear("Age", 0.5)];
        let a = synthesize(&spec).unwrap();
        let b = synthesize(&spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn boundary_outcome_rate_is_a_calibration_error() {
        let mut spec = spec_with(vec![Feature::continuous("Age", "", 70.0, 10.0)], 100, 1);
        spec.outcome_rate = 0.0;
        assert!(matches!(synthesize(&spec), Err(Error::Calibration(_))));
    }

    #[test]
    fn draws_stay_inside_four_sigma() {
        let spec = spec_with(vec![Feature::continuous("Age", "", 0.0, 1.0)], 20_000, 3);
        let cohort = synthesize(&spec).unwrap();
        for v in cohort.column_values(0) {
            assert!(v.abs() <= 4.0 + 1e-12);
        }
    }

    #[test]
    fn correlation_block_is_applied() {
        let mut spec = spec_with(
            vec![
                Feature::continuous("A", "", 0.0, 1.0),
                Feature::continuous("B", "", 0.0, 1.0),
            ],
            8_000,
            4,
        );
        spec.correlation = Some(CorrelationSpec {
            features: vec!["A".into(), "B".into()],
            matrix: vec![vec![1.0, 0.8], vec![0.8, 1.0]],
        });
        let cohort = synthesize(&spec).unwrap();
        let a = cohort.column_values(0);
        let b = cohort.column_values(1);
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let mut cov = 0.0;
        let (mut va, mut vb) = (0.0, 0.0);
        for i in 0..a.len() {
            cov += (a[i] - ma) * (b[i] - mb);
            va += (a[i] - ma).powi(2);
            vb += (b[i] - mb).powi(2);
        }
        let rho = cov / (va.sqrt() * vb.sqrt());
        assert!((rho - 0.8).abs() < 0.05, "rho {rho}");
    }

    #[test]
    fn binary_features_hit_their_prevalence() {
        let spec = spec_with(vec![Feature::binary("Hypertension", "", 0.62)], 10_000, 5);
        let cohort = synthesize(&spec).unwrap();
        let rate = cohort.column_values(0).iter().sum::<f64>() / 10_000.0;
        // three standard errors of a Bernoulli(0.62) mean
        assert!((rate - 0.62).abs() < 3.0 * (0.62_f64 * 0.38 / 10_000.0).sqrt() + 1e-9);
    }
}
