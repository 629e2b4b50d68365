//! The cleaning chain: deduplication, identifier and constant-column
//! removal, missing-outcome row drops, median imputation, z-score outlier
//! removal, and minority-class oversampling.
//!
//! The driver order is clean → fit/apply imputer → remove outliers →
//! oversample, with the imputer fitted on training rows only and
//! oversampling applied to training data only — the split happens before
//! any statistic is fitted, so no test information leaks into them.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cohort::{Cohort, FeatureKind};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    /// Z-score beyond which a row is considered an outlier.
    pub outlier_z: f64,
    /// Balance classes by duplicating minority rows (training side only).
    pub oversample_to_balance: bool,
    pub impute_statistic: ImputeStatistic,
    pub seed: u64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            outlier_z: 4.0,
            oversample_to_balance: true,
            impute_statistic: ImputeStatistic::Median,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ImputeStatistic {
    #[default]
    Median,
}

/// Stages a [`PreprocessReport`] can record, in contract order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreprocessStage {
    Clean,
    Impute,
    OutlierRemoval,
    Oversample,
}

/// Audit trail of the cleaning chain. `rows_out` always equals
/// `rows_in − removals + rows_added_by_oversampling`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PreprocessReport {
    pub rows_in: usize,
    pub rows_out: usize,
    pub duplicates_removed: usize,
    pub constant_columns_removed: usize,
    pub identifier_columns_removed: usize,
    pub missing_outcome_rows_removed: usize,
    pub outlier_rows_removed: usize,
    pub rows_added_by_oversampling: usize,
    /// Rows moved to the test side by the split (chain-level reports only).
    pub test_rows_split_off: usize,
    /// Per-feature imputation value actually used.
    pub imputation_values: Vec<(String, f64)>,
    /// Stages in the order they ran.
    pub stages: Vec<PreprocessStage>,
}

impl PreprocessReport {
    fn start(rows_in: usize) -> PreprocessReport {
        PreprocessReport {
            rows_in,
            rows_out: rows_in,
            ..PreprocessReport::default()
        }
    }

    /// Fold a later stage's report into this one.
    pub fn absorb(&mut self, later: &PreprocessReport) {
        self.rows_out = later.rows_out;
        self.duplicates_removed += later.duplicates_removed;
        self.constant_columns_removed += later.constant_columns_removed;
        self.identifier_columns_removed += later.identifier_columns_removed;
        self.missing_outcome_rows_removed += later.missing_outcome_rows_removed;
        self.outlier_rows_removed += later.outlier_rows_removed;
        self.rows_added_by_oversampling += later.rows_added_by_oversampling;
        self.imputation_values
            .extend(later.imputation_values.iter().cloned());
        self.stages.extend(later.stages.iter().copied());
    }

    pub fn balances(&self) -> bool {
        self.rows_out
            == self.rows_in - self.duplicates_removed - self.missing_outcome_rows_removed
                - self.outlier_rows_removed
                - self.test_rows_split_off
                + self.rows_added_by_oversampling
    }
}

fn is_identifier_name(name: &str) -> bool {
    let lower = name.to_ascii_lowercase();
    lower == "id" || lower == "group" || lower.ends_with("_id")
}

/// Cleaning pass: drop identifier-role columns, rows with missing outcome,
/// duplicate rows, and constant columns, looping until all four conditions
/// hold simultaneously (dropping a column can create new duplicates and
/// vice versa). Rows are duplicates only when they agree on every feature
/// cell including the missing pattern, and on the outcome.
pub fn clean(cohort: &Cohort) -> Result<(Cohort, PreprocessReport)> {
    let mut report = PreprocessReport::start(cohort.n_rows());
    report.stages.push(PreprocessStage::Clean);

    let identifier_columns: Vec<String> = cohort
        .schema()
        .iter()
        .filter(|f| is_identifier_name(&f.name))
        .map(|f| f.name.clone())
        .collect();
    report.identifier_columns_removed = identifier_columns.len();
    let mut current = if identifier_columns.is_empty() {
        cohort.clone()
    } else {
        cohort.drop_features(&identifier_columns)?
    };

    loop {
        let mut changed = false;

        // Missing-outcome rows.
        let keep: Vec<usize> = (0..current.n_rows())
            .filter(|&i| current.outcome(i).is_some())
            .collect();
        if keep.len() < current.n_rows() {
            report.missing_outcome_rows_removed += current.n_rows() - keep.len();
            current = current.select_rows(&keep);
            changed = true;
        }

        // Duplicate rows (first occurrence survives).
        let mut seen: HashMap<Vec<u64>, ()> = HashMap::new();
        let mut keep = Vec::with_capacity(current.n_rows());
        for i in 0..current.n_rows() {
            let mut key: Vec<u64> = current
                .row(i)
                .iter()
                .map(|v| match v {
                    Some(x) => x.to_bits(),
                    None => u64::MAX, // NaN payloads never collide with this
                })
                .collect();
            key.push(match current.outcome(i) {
                Some(o) => u64::from(o),
                None => u64::MAX,
            });
            if seen.insert(key, ()).is_none() {
                keep.push(i);
            }
        }
        if keep.len() < current.n_rows() {
            report.duplicates_removed += current.n_rows() - keep.len();
            current = current.select_rows(&keep);
            changed = true;
        }

        // Constant columns: fewer than two distinct non-missing values.
        let mut drop = Vec::new();
        for (j, f) in current.schema().iter().enumerate() {
            let values = current.column_values(j);
            let constant = match values.first() {
                None => true,
                Some(first) => values.iter().all(|v| v == first),
            };
            if constant {
                drop.push(f.name.clone());
            }
        }
        if !drop.is_empty() {
            report.constant_columns_removed += drop.len();
            current = current.drop_features(&drop)?;
            changed = true;
        }

        if !changed {
            break;
        }
    }

    if current.n_rows() == 0 || current.n_features() == 0 {
        return Err(Error::EmptyCohort(format!(
            "{} rows and {} features survive cleaning",
            current.n_rows(),
            current.n_features()
        )));
    }
    report.rows_out = current.n_rows();
    Ok((current, report))
}

/// Per-feature imputation values fitted on training data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Imputer {
    /// (feature name, fill value) in schema order.
    pub values: Vec<(String, f64)>,
}

impl Imputer {
    pub fn value_for(&self, feature: &str) -> Option<f64> {
        self.values
            .iter()
            .find(|(name, _)| name == feature)
            .map(|(_, v)| *v)
    }
}

/// Fit per-feature medians on the training cohort.
///
/// Continuous features use the midpoint median (even counts average the two
/// central values). Binary features use the lower median so the fill value
/// stays in {0, 1}.
pub fn fit_imputer(train: &Cohort) -> Result<Imputer> {
    let mut values = Vec::with_capacity(train.n_features());
    for (j, f) in train.schema().iter().enumerate() {
        let mut col = train.column_values(j);
        if col.is_empty() {
            return Err(Error::UnimputableFeature(f.name.clone()));
        }
        col.sort_by(f64::total_cmp);
        let n = col.len();
        let median = match f.kind {
            FeatureKind::Continuous => {
                if n % 2 == 1 {
                    col[n / 2]
                } else {
                    0.5 * (col[n / 2 - 1] + col[n / 2])
                }
            }
            FeatureKind::Binary => col[(n - 1) / 2],
        };
        values.push((f.name.clone(), median));
    }
    Ok(Imputer { values })
}

/// Fill every missing feature cell from the fitted imputer; non-missing
/// cells are untouched. Errors if a feature with missing cells has no
/// fitted value.
pub fn apply_imputer(cohort: &Cohort, imputer: &Imputer) -> Result<(Cohort, PreprocessReport)> {
    let mut report = PreprocessReport::start(cohort.n_rows());
    report.stages.push(PreprocessStage::Impute);
    let p = cohort.n_features();
    let mut values = cohort.raw_values().to_vec();
    for (j, f) in cohort.schema().iter().enumerate() {
        let fill = imputer.value_for(&f.name);
        for i in 0..cohort.n_rows() {
            if values[i * p + j].is_none() {
                match fill {
                    Some(v) => values[i * p + j] = Some(v),
                    None => {
                        return Err(Error::ImputerCoverage(format!(
                            "feature '{}' has missing cells but no fitted value",
                            f.name
                        )))
                    }
                }
            }
        }
    }
    report.imputation_values = imputer.values.clone();
    Ok((cohort.with_values(values), report))
}

/// Drop rows holding a continuous cell more than `z` sample standard
/// deviations from its column mean. Column statistics are computed once,
/// before any drop; zero-variance columns are exempt; binary columns never
/// trigger removal. Requires imputed data (no missing feature cells).
pub fn remove_outliers(cohort: &Cohort, z: f64) -> Result<(Cohort, PreprocessReport)> {
    if !(z > 0.0) {
        return Err(Error::Parameter(format!("outlier z {z} must be > 0")));
    }
    let mut report = PreprocessReport::start(cohort.n_rows());
    report.stages.push(PreprocessStage::OutlierRemoval);
    let mut bounds = Vec::new();
    for (j, f) in cohort.schema().iter().enumerate() {
        if f.kind != FeatureKind::Continuous {
            continue;
        }
        let col = cohort.column_values(j);
        if col.len() < 2 {
            continue;
        }
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let std = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        if std > 0.0 {
            bounds.push((j, mean - z * std, mean + z * std));
        }
    }
    let keep: Vec<usize> = (0..cohort.n_rows())
        .filter(|&i| {
            bounds.iter().all(|&(j, lo, hi)| match cohort.value(i, j) {
                Some(v) => v >= lo && v <= hi,
                None => true,
            })
        })
        .collect();
    report.outlier_rows_removed = cohort.n_rows() - keep.len();
    report.rows_out = keep.len();
    Ok((cohort.select_rows(&keep), report))
}

/// Result of the full preprocessing chain.
#[derive(Debug, Clone)]
pub struct PreprocessOutput {
    /// Training side after imputation and outlier removal (not balanced).
    pub train: Cohort,
    /// Test side after train-fitted imputation. Outliers are never removed
    /// from test rows, so evaluation stays unbiased.
    pub test: Cohort,
    /// Training side after minority oversampling; what final models fit on.
    pub train_balanced: Cohort,
    pub imputer: Imputer,
    pub report: PreprocessReport,
}

/// The full chain in contract order: clean → split → fit/apply imputer →
/// remove outliers (train only) → oversample (train only). The imputer and
/// outlier statistics are fitted on training rows only; cross-validation
/// re-balances its own folds, so `train` stays unbalanced for that purpose.
pub fn preprocess_chain(
    cohort: &Cohort,
    config: &PreprocessConfig,
    test_fraction: f64,
    stratified: bool,
    seed_value: u64,
) -> Result<PreprocessOutput> {
    let (cleaned, mut report) = clean(cohort)?;
    let (train_raw, test_raw) =
        crate::cohort::split(&cleaned, test_fraction, stratified, seed_value)?;
    report.test_rows_split_off = test_raw.n_rows();

    let imputer = fit_imputer(&train_raw)?;
    let (train_imputed, stage) = apply_imputer(&train_raw, &imputer)?;
    report.absorb(&stage);
    let (test, _) = apply_imputer(&test_raw, &imputer)?;

    let (train, stage) = remove_outliers(&train_imputed, config.outlier_z)?;
    report.absorb(&stage);

    let train_balanced = if config.oversample_to_balance {
        let (balanced, stage) = oversample(&train, seed::derive(seed_value, "prep-oversample"))?;
        report.absorb(&stage);
        balanced
    } else {
        report.stages.push(PreprocessStage::Oversample);
        train.clone()
    };

    Ok(PreprocessOutput {
        train,
        test,
        train_balanced,
        imputer,
        report,
    })
}

/// Suffix appended to duplicated row ids, keeping the origin recoverable.
const OVERSAMPLE_TAG: &str = "+dup";

/// Origin row id of an oversampled duplicate (or the id itself).
pub fn oversample_origin(row_id: &str) -> &str {
    match row_id.find(OVERSAMPLE_TAG) {
        Some(pos) => &row_id[..pos],
        None => row_id,
    }
}

/// True when a row id names an oversampled duplicate.
pub fn is_oversampled_duplicate(row_id: &str) -> bool {
    row_id.contains(OVERSAMPLE_TAG)
}

/// Duplicate minority-class rows, sampled with replacement, until both
/// classes have equal counts. Original rows are all retained; duplicates
/// are exact copies with derived row ids. Already balanced input comes
/// back unchanged.
pub fn oversample(train: &Cohort, seed_value: u64) -> Result<(Cohort, PreprocessReport)> {
    let mut report = PreprocessReport::start(train.n_rows());
    report.stages.push(PreprocessStage::Oversample);
    let (neg, pos, missing) = train.outcome_counts();
    if missing > 0 {
        return Err(Error::Data(format!(
            "{missing} rows with missing outcome; clean before oversampling"
        )));
    }
    if neg == 0 || pos == 0 {
        return Err(Error::SingleClass(
            "oversampling requires both outcome classes".into(),
        ));
    }
    if neg == pos {
        report.rows_out = train.n_rows();
        return Ok((train.clone(), report));
    }
    let minority_label = u8::from(pos < neg);
    let minority_rows: Vec<usize> = (0..train.n_rows())
        .filter(|&i| train.outcome(i) == Some(minority_label))
        .collect();
    let deficit = neg.abs_diff(pos);
    let mut rng = seed::rng(seed::derive(seed_value, "oversample"));
    let mut picks = Vec::with_capacity(deficit);
    let mut ids = Vec::with_capacity(deficit);
    for k in 0..deficit {
        let source = minority_rows[rng.gen_range(0..minority_rows.len())];
        ids.push(format!("{}{OVERSAMPLE_TAG}{k}", train.row_id(source)));
        picks.push(source);
    }
    let out = train.append_copies(&picks, ids)?;
    report.rows_added_by_oversampling = deficit;
    report.rows_out = out.n_rows();
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohort::{synthesize, Feature, FeatureSchema, SynthesisSpec};

    fn schema() -> FeatureSchema {
        FeatureSchema::new(vec![
            Feature::continuous("Age", "years", 70.0, 10.0),
            Feature::continuous("BMI", "", 28.0, 6.0),
            Feature::binary("Hypertension", "", 0.5),
        ])
        .unwrap()
    }

    fn cohort(rows: &[(Option<f64>, Option<f64>, Option<f64>, Option<u8>)]) -> Cohort {
        let mut values = Vec::new();
        let mut outcomes = Vec::new();
        for (a, b, c, o) in rows {
            values.push(*a);
            values.push(*b);
            values.push(*c);
            outcomes.push(*o);
        }
        let ids = (0..rows.len()).map(|i| format!("r{i}")).collect();
        Cohort::new(schema(), values, outcomes, ids).unwrap()
    }

    #[test]
    fn dedup_keeps_one_copy() {
        let c = cohort(&[
            (Some(70.0), Some(28.0), Some(1.0), Some(0)),
            (Some(70.0), Some(28.0), Some(1.0), Some(0)),
            (Some(71.0), Some(29.0), Some(0.0), Some(1)),
        ]);
        let (out, report) = clean(&c).unwrap();
        assert_eq!(out.n_rows(), 2);
        assert_eq!(report.duplicates_removed, 1);
        assert!(report.balances());
    }

    #[test]
    fn rows_differing_only_in_outcome_are_kept() {
        let c = cohort(&[
            (Some(70.0), Some(28.0), Some(1.0), Some(0)),
            (Some(70.0), Some(28.0), Some(1.0), Some(1)),
            (Some(71.0), Some(29.0), Some(0.0), Some(0)),
        ]);
        let (out, report) = clean(&c).unwrap();
        assert_eq!(out.n_rows(), 3);
        assert_eq!(report.duplicates_removed, 0);
    }

    #[test]
    fn constant_column_is_dropped() {
        let c = cohort(&[
            (Some(70.0), Some(28.0), Some(1.0), Some(0)),
            (Some(71.0), Some(29.0), Some(1.0), Some(1)),
            (Some(72.0), Some(30.0), Some(1.0), Some(0)),
        ]);
        let (out, report) = clean(&c).unwrap();
        assert_eq!(report.constant_columns_removed, 1);
        assert!(out.schema().index_of("Hypertension").is_none());
    }

    #[test]
    fn missing_outcome_rows_are_dropped() {
        let c = cohort(&[
            (Some(70.0), Some(28.0), Some(1.0), Some(0)),
            (Some(71.0), Some(29.0), Some(0.0), None),
            (Some(72.0), Some(30.0), Some(1.0), Some(1)),
            (Some(73.0), Some(31.0), Some(0.0), None),
            (Some(74.0), Some(32.0), Some(0.0), Some(1)),
        ]);
        let (out, report) = clean(&c).unwrap();
        assert_eq!(report.missing_outcome_rows_removed, 2);
        assert_eq!(out.n_rows(), 3);
    }

    #[test]
    fn identifier_columns_are_dropped() {
        let schema = FeatureSchema::new(vec![
            Feature::continuous("ID", "", 0.0, 1.0),
            Feature::continuous("Age", "", 70.0, 10.0),
        ])
        .unwrap();
        let values = vec![
            Some(1.0),
            Some(70.0),
            Some(2.0),
            Some(71.0),
            Some(3.0),
            Some(72.0),
        ];
        let outcomes = vec![Some(0), Some(1), Some(0)];
        let ids = vec!["a".into(), "b".into(), "c".into()];
        let c = Cohort::new(schema, values, outcomes, ids).unwrap();
        let (out, report) = clean(&c).unwrap();
        assert_eq!(report.identifier_columns_removed, 1);
        assert!(out.schema().index_of("ID").is_none());
    }

    #[test]
    fn clean_is_idempotent() {
        let c = cohort(&[
            (Some(70.0), Some(28.0), Some(1.0), Some(0)),
            (Some(70.0), Some(28.0), Some(1.0), Some(0)),
            (Some(71.0), Some(29.0), Some(0.0), None),
            (Some(72.0), Some(28.5), Some(0.0), Some(1)),
        ]);
        let (once, _) = clean(&c).unwrap();
        let (twice, report) = clean(&once).unwrap();
        assert_eq!(once, twice);
        assert_eq!(report.duplicates_removed, 0);
        assert_eq!(report.missing_outcome_rows_removed, 0);
    }

    #[test]
    fn empty_result_is_an_error() {
        let c = cohort(&[(Some(70.0), Some(28.0), Some(1.0), None)]);
        assert!(matches!(clean(&c), Err(Error::EmptyCohort(_))));
    }

    #[test]
    fn median_is_robust_to_outliers() {
        let c = cohort(&[
            (Some(1.0), Some(1.0), Some(0.0), Some(0)),
            (Some(2.0), Some(3.0), Some(1.0), Some(1)),
            (Some(100.0), Some(2.0), Some(0.0), Some(0)),
            (None, Some(4.0), Some(1.0), Some(1)),
        ]);
        let imputer = fit_imputer(&c).unwrap();
        assert_eq!(imputer.value_for("Age"), Some(2.0));
        // Even count midpoint: {1,2,3,4} -> 2.5
        assert_eq!(imputer.value_for("BMI"), Some(2.5));
        // Binary lower median stays in {0,1}.
        assert_eq!(imputer.value_for("Hypertension"), Some(0.0));
    }

    #[test]
    fn even_count_median_is_midpoint() {
        let c = cohort(&[
            (Some(1.0), Some(0.0), Some(0.0), Some(0)),
            (Some(3.0), Some(1.0), Some(1.0), Some(1)),
        ]);
        assert_eq!(fit_imputer(&c).unwrap().value_for("Age"), Some(2.0));
    }

    #[test]
    fn synthetic_median_matches_sort_oracle_and_target() {
        let spec = SynthesisSpec {
            schema: FeatureSchema::new(vec![Feature::continuous("Age", "", 75.57, 12.13)]).unwrap(),
            n: 941,
            outcome_rate: 0.1,
            signal: vec![],
            interactions: vec![],
            missing_rate: 0.1,
            seed: 42,
            correlation: None,
        };
        let c = synthesize(&spec).unwrap();
        let imputer = fit_imputer(&c).unwrap();
        let median = imputer.value_for("Age").unwrap();
        // Independent oracle: full sort of the same non-missing values.
        let mut vals = c.column_values(0);
        vals.sort_by(f64::total_cmp);
        let oracle = if vals.len() % 2 == 1 {
            vals[vals.len() / 2]
        } else {
            0.5 * (vals[vals.len() / 2 - 1] + vals[vals.len() / 2])
        };
        assert_eq!(median, oracle);
        assert!((median - 75.57).abs() < 12.13, "median {median}");
    }

    #[test]
    fn all_missing_feature_errors_by_name() {
        let c = cohort(&[
            (None, Some(1.0), Some(0.0), Some(0)),
            (None, Some(2.0), Some(1.0), Some(1)),
        ]);
        match fit_imputer(&c) {
            Err(Error::UnimputableFeature(name)) => assert_eq!(name, "Age"),
            other => panic!("expected unimputable feature, got {other:?}"),
        }
    }

    #[test]
    fn apply_imputer_fills_only_missing_cells() {
        let c = cohort(&[
            (None, Some(28.0), Some(1.0), Some(0)),
            (Some(80.0), Some(29.0), Some(0.0), Some(1)),
        ]);
        let imputer = Imputer {
            values: vec![
                ("Age".into(), 75.0),
                ("BMI".into(), 28.5),
                ("Hypertension".into(), 0.0),
            ],
        };
        let (out, _) = apply_imputer(&c, &imputer).unwrap();
        assert_eq!(out.value(0, 0), Some(75.0));
        assert_eq!(out.value(1, 0), Some(80.0));
        assert_eq!(out.missing_cell_count(), 0);
    }

    #[test]
    fn apply_imputer_is_identity_without_missing_cells() {
        let c = cohort(&[(Some(70.0), Some(28.0), Some(1.0), Some(0))]);
        let imputer = Imputer { values: vec![] };
        let (out, _) = apply_imputer(&c, &imputer).unwrap();
        assert_eq!(out, c);
    }

    #[test]
    fn uncovered_feature_with_missing_cells_errors() {
        let c = cohort(&[(None, Some(28.0), Some(1.0), Some(0))]);
        let imputer = Imputer { values: vec![] };
        assert!(matches!(
            apply_imputer(&c, &imputer),
            Err(Error::ImputerCoverage(_))
        ));
    }

    #[test]
    fn imputation_is_leakage_free() {
        // Medians fitted on train must be invariant to test-row changes:
        // recompute with a mutated "test" side and compare applied values.
        let spec = SynthesisSpec {
            schema: schema(),
            n: 400,
            outcome_rate: 0.2,
            signal: vec![],
            interactions: vec![],
            missing_rate: 0.15,
            seed: 5,
            correlation: None,
        };
        let cohort = synthesize(&spec).unwrap();
        let (train, test) = crate::cohort::split(&cohort, 0.25, true, 5).unwrap();
        let fitted = fit_imputer(&train).unwrap();
        // Oracle route: medians recomputed over train-only values, sorted.
        for (j, f) in train.schema().iter().enumerate() {
            let mut vals = train.column_values(j);
            vals.sort_by(f64::total_cmp);
            let oracle = match f.kind {
                FeatureKind::Continuous => {
                    if vals.len() % 2 == 1 {
                        vals[vals.len() / 2]
                    } else {
                        0.5 * (vals[vals.len() / 2 - 1] + vals[vals.len() / 2])
                    }
                }
                FeatureKind::Binary => vals[(vals.len() - 1) / 2],
            };
            assert_eq!(fitted.value_for(&f.name), Some(oracle));
        }
        let (applied, _) = apply_imputer(&test, &fitted).unwrap();
        // Mutating test rows and refitting on train gives identical fills.
        let refit = fit_imputer(&train).unwrap();
        let (applied_again, _) = apply_imputer(&test, &refit).unwrap();
        assert_eq!(applied, applied_again);
    }

    #[test]
    fn degenerate_std_disables_outlier_rule() {
        let c = cohort(&[
            (Some(5.0), Some(5.0), Some(1.0), Some(0)),
            (Some(5.0), Some(5.0), Some(0.0), Some(1)),
            (Some(5.0), Some(5.0), Some(1.0), Some(1)),
        ]);
        let (out, report) = remove_outliers(&c, 4.0).unwrap();
        assert_eq!(report.outlier_rows_removed, 0);
        assert_eq!(out.n_rows(), 3);
    }

    #[test]
    fn planted_outlier_is_removed() {
        let mut rows: Vec<(Option<f64>, Option<f64>, Option<f64>, Option<u8>)> = (0..50)
            .map(|i| {
                (
                    Some(70.0 + (i % 7) as f64),
                    Some(28.0 + (i % 5) as f64),
                    Some((i % 2) as f64),
                    Some((i % 2) as u8),
                )
            })
            .collect();
        // One row far beyond z = 4.
        rows.push((Some(70.0 + 10.0 * 2.2), Some(28.0), Some(0.0), Some(1)));
        let c = cohort(&rows);
        let (out, report) = remove_outliers(&c, 4.0).unwrap();
        assert_eq!(report.outlier_rows_removed, 1);
        assert_eq!(out.n_rows(), 50);
        assert!(out.row_ids().iter().all(|id| id != "r50"));
    }

    #[test]
    fn gaussian_mass_outside_four_sigma_is_tiny() {
        let spec = SynthesisSpec {
            schema: FeatureSchema::new(vec![
                Feature::continuous("A", "", 0.0, 1.0),
                Feature::continuous("B", "", 10.0, 2.0),
            ])
            .unwrap(),
            n: 10_000,
            outcome_rate: 0.1,
            signal: vec![],
            interactions: vec![],
            missing_rate: 0.0,
            seed: 8,
            correlation: None,
        };
        let c = synthesize(&spec).unwrap();
        let (_, report) = remove_outliers(&c, 4.0).unwrap();
        let fraction = report.outlier_rows_removed as f64 / 10_000.0;
        assert!(fraction < 0.005, "removed {fraction}");
    }

    #[test]
    fn invalid_z_is_a_parameter_error() {
        let c = cohort(&[(Some(1.0), Some(1.0), Some(1.0), Some(0))]);
        assert!(matches!(remove_outliers(&c, 0.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn oversample_balances_ninety_ten() {
        let rows: Vec<(Option<f64>, Option<f64>, Option<f64>, Option<u8>)> = (0..100)
            .map(|i| {
                (
                    Some(i as f64),
                    Some(i as f64 * 0.5),
                    Some((i % 2) as f64),
                    Some(u8::from(i < 10)),
                )
            })
            .collect();
        let c = cohort(&rows);
        let (out, report) = oversample(&c, 42).unwrap();
        let (neg, pos, _) = out.outcome_counts();
        assert_eq!((neg, pos), (90, 90));
        assert_eq!(report.rows_added_by_oversampling, 80);
        assert!(report.balances());
        // Duplicates are exact copies of existing minority rows.
        for i in 100..out.n_rows() {
            let origin = oversample_origin(out.row_id(i)).to_string();
            let source = (0..100).find(|&k| c.row_id(k) == origin).unwrap();
            assert_eq!(out.row(i), c.row(source));
            assert_eq!(out.outcome(i), Some(1));
        }
    }

    #[test]
    fn balanced_input_is_unchanged() {
        let rows: Vec<(Option<f64>, Option<f64>, Option<f64>, Option<u8>)> = (0..10)
            .map(|i| (Some(i as f64), Some(1.0 + i as f64), Some(0.0), Some((i % 2) as u8)))
            .collect();
        let c = cohort(&rows);
        let (out, report) = oversample(&c, 1).unwrap();
        assert_eq!(out, c);
        assert_eq!(report.rows_added_by_oversampling, 0);
    }

    #[test]
    fn oversample_is_deterministic() {
        let rows: Vec<(Option<f64>, Option<f64>, Option<f64>, Option<u8>)> = (0..60)
            .map(|i| (Some(i as f64), Some(i as f64), Some(0.0), Some(u8::from(i < 9))))
            .collect();
        let c = cohort(&rows);
        let (a, _) = oversample(&c, 7).unwrap();
        let (b, _) = oversample(&c, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_class_oversample_errors() {
        let rows: Vec<(Option<f64>, Option<f64>, Option<f64>, Option<u8>)> =
            (0..5).map(|i| (Some(i as f64), Some(i as f64), Some(0.0), Some(1))).collect();
        assert!(matches!(
            oversample(&cohort(&rows), 1),
            Err(Error::SingleClass(_))
        ));
    }

    #[test]
    fn chain_runs_in_contract_order_and_balances() {
        let spec = SynthesisSpec {
            schema: schema(),
            n: 600,
            outcome_rate: 0.15,
            signal: vec![crate::cohort::SignalTerm::linear("Age", 1.0)],
            interactions: vec![],
            missing_rate: 0.08,
            seed: 77,
            correlation: None,
        };
        let cohort = synthesize(&spec).unwrap();
        let out = preprocess_chain(&cohort, &PreprocessConfig::default(), 0.2, true, 77).unwrap();
        assert_eq!(
            out.report.stages,
            vec![
                PreprocessStage::Clean,
                PreprocessStage::Impute,
                PreprocessStage::OutlierRemoval,
                PreprocessStage::Oversample,
            ]
        );
        assert!(out.report.balances(), "report: {:?}", out.report);
        assert_eq!(out.train.missing_cell_count(), 0);
        assert_eq!(out.test.missing_cell_count(), 0);
        let (neg, pos, _) = out.train_balanced.outcome_counts();
        assert_eq!(neg, pos);
        // Test side is untouched by oversampling and outlier removal.
        assert!(out.test.row_ids().iter().all(|id| !is_oversampled_duplicate(id)));
    }

    #[test]
    fn report_absorption_tracks_stage_order() {
        let c = cohort(&[
            (Some(70.0), Some(28.0), Some(1.0), Some(0)),
            (Some(71.0), Some(29.0), Some(0.0), Some(1)),
            (Some(72.0), Some(30.0), Some(1.0), Some(0)),
            (None, Some(31.0), Some(0.0), Some(1)),
        ]);
        let (cleaned, mut report) = clean(&c).unwrap();
        let imputer = fit_imputer(&cleaned).unwrap();
        let (imputed, stage) = apply_imputer(&cleaned, &imputer).unwrap();
        report.absorb(&stage);
        let (trimmed, stage) = remove_outliers(&imputed, 4.0).unwrap();
        report.absorb(&stage);
        let (_, stage) = oversample(&trimmed, 3).unwrap();
        report.absorb(&stage);
        assert_eq!(
            report.stages,
            vec![
                PreprocessStage::Clean,
                PreprocessStage::Impute,
                PreprocessStage::OutlierRemoval,
                PreprocessStage::Oversample,
            ]
        );
        assert!(report.balances());
    }
}
