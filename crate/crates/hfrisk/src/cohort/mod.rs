//! Cohort data model: feature schema, the row-major value table with
//! explicit missing markers, CSV ingestion, stratified splitting, and the
//! synthetic cohort generator.
//!
//! A cohort is the universal currency of the pipeline: every stage consumes
//! and produces immutable [`Cohort`] values. Missing cells are `None`, never
//! a sentinel number, because binary columns legitimately contain 0.

mod csv_io;
mod synth;

pub use csv_io::{load_csv, write_csv};
pub use synth::{
    synthesize, CorrelationSpec, InteractionTerm, SignalTerm, SignalTransform, SynthesisSpec,
};

use std::collections::HashSet;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Patient-selection funnel behind the bundled defaults: screened records,
/// the three exclusion steps, and the resulting cohort size. The arithmetic
/// is checked by a unit test; the final count sizes the default synthetic
/// cohort.
pub mod funnel {
    /// Records screened by diagnosis code.
    pub const SCREENED: usize = 13_389;
    /// Excluded: no ICU stay.
    pub const NO_ICU_STAY: usize = 162;
    /// Excluded: missing natriuretic-peptide biomarker records.
    pub const NO_BIOMARKER: usize = 4_871;
    /// Excluded: missing echocardiography records.
    pub const NO_ECHO: usize = 7_179;
    /// Final cohort size after all exclusions.
    pub const FINAL_COHORT: usize = 1_177;
}

// ---------------------------------------------------------------------------
// Feature schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Continuous,
    Binary,
}

/// One feature: name, kind, units, and optional summary statistics
/// (mean/std for continuous features, prevalence for binary ones).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    pub kind: FeatureKind,
    #[serde(default)]
    pub units: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prevalence: Option<f64>,
}

impl Feature {
    pub fn continuous(name: &str, units: &str, mean: f64, std: f64) -> Feature {
        Feature {
            name: name.to_string(),
            kind: FeatureKind::Continuous,
            units: units.to_string(),
            mean: Some(mean),
            std: Some(std),
            prevalence: None,
        }
    }

    pub fn binary(name: &str, units: &str, prevalence: f64) -> Feature {
        Feature {
            name: name.to_string(),
            kind: FeatureKind::Binary,
            units: units.to_string(),
            mean: None,
            std: None,
            prevalence: Some(prevalence),
        }
    }

    fn validate(&self) -> Result<()> {
        match self.kind {
            FeatureKind::Continuous => {
                if self.prevalence.is_some() {
                    return Err(Error::SchemaMismatch(format!(
                        "continuous feature '{}' carries a prevalence",
                        self.name
                    )));
                }
                if let Some(s) = self.std {
                    if !(s >= 0.0) {
                        return Err(Error::SchemaMismatch(format!(
                            "feature '{}' has negative std {s}",
                            self.name
                        )));
                    }
                }
            }
            FeatureKind::Binary => {
                if self.mean.is_some() || self.std.is_some() {
                    return Err(Error::SchemaMismatch(format!(
                        "binary feature '{}' carries mean/std",
                        self.name
                    )));
                }
                if let Some(p) = self.prevalence {
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Error::SchemaMismatch(format!(
                            "feature '{}' prevalence {p} outside [0,1]",
                            self.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Ordered list of features with unique names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Feature>", into = "Vec<Feature>")]
pub struct FeatureSchema {
    features: Vec<Feature>,
}

impl TryFrom<Vec<Feature>> for FeatureSchema {
    type Error = Error;
    fn try_from(features: Vec<Feature>) -> Result<Self> {
        FeatureSchema::new(features)
    }
}

impl From<FeatureSchema> for Vec<Feature> {
    fn from(s: FeatureSchema) -> Vec<Feature> {
        s.features
    }
}

impl PartialEq<Feature> for Feature {
    fn eq(&self, other: &Feature) -> bool {
        self.name == other.name && self.kind == other.kind
    }
}

impl FeatureSchema {
    pub fn new(features: Vec<Feature>) -> Result<FeatureSchema> {
        let mut seen = HashSet::new();
        for f in &features {
            f.validate()?;
            if !seen.insert(f.name.clone()) {
                return Err(Error::SchemaMismatch(format!(
                    "duplicate feature name '{}'",
                    f.name
                )));
            }
        }
        Ok(FeatureSchema { features })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn get(&self, index: usize) -> &Feature {
        &self.features[index]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Feature> {
        self.features.iter()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name.clone()).collect()
    }

    /// Subset preserving order; errors on unknown names.
    pub fn without(&self, drop: &[String]) -> Result<FeatureSchema> {
        for name in drop {
            if self.index_of(name).is_none() {
                return Err(Error::Config(format!("unknown feature '{name}'")));
            }
        }
        FeatureSchema::new(
            self.features
                .iter()
                .filter(|f| !drop.contains(&f.name))
                .cloned()
                .collect(),
        )
    }

    pub fn from_json(json: &str) -> Result<FeatureSchema> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<FeatureSchema> {
        FeatureSchema::from_json(&std::fs::read_to_string(path)?)
    }

    /// The bundled schema: the full feature catalog with its published
    /// summary statistics, used by the default synthetic cohort.
    pub fn bundled() -> &'static FeatureSchema {
        static SCHEMA: OnceLock<FeatureSchema> = OnceLock::new();
        SCHEMA.get_or_init(|| {
            FeatureSchema::from_json(include_str!("../../data/schema.json"))
                .expect("bundled schema is valid")
        })
    }
}

// ---------------------------------------------------------------------------
// Cohort
// ---------------------------------------------------------------------------

/// Immutable table of feature values plus a binary outcome per row.
///
/// `values` is row-major with `None` marking missing cells; `outcomes` uses
/// the same convention. Row ids are opaque and unique.
#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    schema: FeatureSchema,
    values: Vec<Option<f64>>,
    outcomes: Vec<Option<u8>>,
    row_ids: Vec<String>,
}

impl Cohort {
    pub fn new(
        schema: FeatureSchema,
        values: Vec<Option<f64>>,
        outcomes: Vec<Option<u8>>,
        row_ids: Vec<String>,
    ) -> Result<Cohort> {
        let p = schema.len();
        let n = row_ids.len();
        if outcomes.len() != n {
            return Err(Error::Data(format!(
                "outcome length {} does not match {} rows",
                outcomes.len(),
                n
            )));
        }
        if values.len() != n * p {
            return Err(Error::Data(format!(
                "value matrix has {} cells, expected {n} x {p}",
                values.len()
            )));
        }
        let mut seen = HashSet::new();
        for id in &row_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::Data(format!("duplicate row id '{id}'")));
            }
        }
        for (j, f) in schema.iter().enumerate() {
            for i in 0..n {
                if let Some(v) = values[i * p + j] {
                    if !v.is_finite() {
                        return Err(Error::Data(format!(
                            "column '{}' contains non-finite value at row {i}; use a missing marker",
                            f.name
                        )));
                    }
                    if f.kind == FeatureKind::Binary && v != 0.0 && v != 1.0 {
                        return Err(Error::Data(format!(
                            "binary column '{}' contains {v} at row {i}",
                            f.name
                        )));
                    }
                }
            }
        }
        for o in &outcomes {
            if let Some(v) = o {
                if *v > 1 {
                    return Err(Error::Data(format!("outcome value {v} is not 0/1")));
                }
            }
        }
        Ok(Cohort {
            schema,
            values,
            outcomes,
            row_ids,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn value(&self, row: usize, col: usize) -> Option<f64> {
        self.values[row * self.schema.len() + col]
    }

    pub fn row(&self, row: usize) -> &[Option<f64>] {
        let p = self.schema.len();
        &self.values[row * p..(row + 1) * p]
    }

    pub fn outcome(&self, row: usize) -> Option<u8> {
        self.outcomes[row]
    }

    pub fn row_id(&self, row: usize) -> &str {
        &self.row_ids[row]
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    /// Non-missing values of one column.
    pub fn column_values(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows()).filter_map(|i| self.value(i, col)).collect()
    }

    /// Count of (negative, positive, missing) outcomes.
    pub fn outcome_counts(&self) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for o in &self.outcomes {
            match o {
                Some(0) => c.0 += 1,
                Some(_) => c.1 += 1,
                None => c.2 += 1,
            }
        }
        c
    }

    /// Dense 0/1 labels; errors if any outcome is missing.
    pub fn labels(&self) -> Result<Vec<u8>> {
        self.outcomes
            .iter()
            .enumerate()
            .map(|(i, o)| {
                o.ok_or_else(|| Error::Data(format!("row '{}' has missing outcome", self.row_ids[i])))
            })
            .collect()
    }

    pub fn has_missing_cells(&self) -> bool {
        self.values.iter().any(Option::is_none)
    }

    pub fn missing_cell_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// New cohort containing `rows` (by index, kept in the given order).
    pub fn select_rows(&self, rows: &[usize]) -> Cohort {
        let p = self.schema.len();
        let mut values = Vec::with_capacity(rows.len() * p);
        let mut outcomes = Vec::with_capacity(rows.len());
        let mut row_ids = Vec::with_capacity(rows.len());
        for &i in rows {
            values.extend_from_slice(&self.values[i * p..(i + 1) * p]);
            outcomes.push(self.outcomes[i]);
            row_ids.push(self.row_ids[i].clone());
        }
        Cohort {
            schema: self.schema.clone(),
            values,
            outcomes,
            row_ids,
        }
    }

    /// New cohort keeping only the named columns' complement; errors on
    /// unknown names.
    pub fn drop_features(&self, drop: &[String]) -> Result<Cohort> {
        let schema = self.schema.without(drop)?;
        let keep: Vec<usize> = self
            .schema
            .iter()
            .enumerate()
            .filter(|(_, f)| !drop.contains(&f.name))
            .map(|(j, _)| j)
            .collect();
        self.select_columns_by_index(schema, &keep)
    }

    fn select_columns_by_index(&self, schema: FeatureSchema, keep: &[usize]) -> Result<Cohort> {
        let p = self.schema.len();
        let mut values = Vec::with_capacity(self.n_rows() * keep.len());
        for i in 0..self.n_rows() {
            for &j in keep {
                values.push(self.values[i * p + j]);
            }
        }
        Cohort::new(schema, values, self.outcomes.clone(), self.row_ids.clone())
    }

    /// Replace a single cell (used by preprocessing; returns a new cohort).
    pub(crate) fn with_values(&self, values: Vec<Option<f64>>) -> Cohort {
        debug_assert_eq!(values.len(), self.values.len());
        Cohort {
            schema: self.schema.clone(),
            values,
            outcomes: self.outcomes.clone(),
            row_ids: self.row_ids.clone(),
        }
    }

    pub(crate) fn raw_values(&self) -> &[Option<f64>] {
        &self.values
    }

    /// Append exact copies of existing rows with fresh row ids.
    pub(crate) fn append_copies(&self, rows: &[usize], ids: Vec<String>) -> Result<Cohort> {
        let p = self.schema.len();
        let mut values = self.values.clone();
        let mut outcomes = self.outcomes.clone();
        let mut row_ids = self.row_ids.clone();
        for (&i, id) in rows.iter().zip(ids) {
            values.extend_from_slice(&self.values[i * p..(i + 1) * p]);
            outcomes.push(self.outcomes[i]);
            row_ids.push(id);
        }
        Cohort::new(self.schema.clone(), values, outcomes, row_ids)
    }
}

// ---------------------------------------------------------------------------
// Train/test split
// ---------------------------------------------------------------------------

/// Partition a cohort into (train, test).
///
/// With `stratified`, rows are shuffled and drawn per outcome stratum so
/// each class lands in the test side at `test_fraction` to within one row;
/// both classes must be present. Output row order follows the input order.
pub fn split(
    cohort: &Cohort,
    test_fraction: f64,
    stratified: bool,
    seed_value: u64,
) -> Result<(Cohort, Cohort)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Parameter(format!(
            "test_fraction {test_fraction} outside (0,1)"
        )));
    }
    let n = cohort.n_rows();
    let mut rng = seed::rng(seed::derive(seed_value, "split"));
    let mut test_idx: Vec<usize> = Vec::new();
    if stratified {
        let (neg, pos, _) = cohort.outcome_counts();
        if neg == 0 || pos == 0 {
            return Err(Error::Stratification(
                "stratified split requires both outcome classes".into(),
            ));
        }
        // Strata in fixed order: negatives, positives, then missing-outcome
        // rows (each stratum sampled at the same fraction).
        for class in [Some(0u8), Some(1u8), None] {
            let mut members: Vec<usize> =
                (0..n).filter(|&i| cohort.outcome(i) == class).collect();
            if members.is_empty() {
                continue;
            }
            members.shuffle(&mut rng);
            let k = (members.len() as f64 * test_fraction).round() as usize;
            test_idx.extend_from_slice(&members[..k]);
        }
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let k = (n as f64 * test_fraction).round() as usize;
        test_idx.extend_from_slice(&order[..k]);
    }
    let test_set: HashSet<usize> = test_idx.iter().copied().collect();
    let train_rows: Vec<usize> = (0..n).filter(|i| !test_set.contains(i)).collect();
    let mut test_rows: Vec<usize> = test_idx;
    test_rows.sort_unstable();
    Ok((cohort.select_rows(&train_rows), cohort.select_rows(&test_rows)))
}
