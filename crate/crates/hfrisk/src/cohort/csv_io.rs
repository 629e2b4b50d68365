//! CSV ingestion and emission.
//!
//! Format: UTF-8, comma separated, header row of feature names plus an
//! `outcome` column; an empty cell is a missing marker. An optional leading
//! `row_id` column carries row identifiers; without it, ids are assigned
//! positionally. Columns may appear in any order in the file; the loaded
//! cohort always uses schema order. Columns not named by the schema (other
//! than `outcome`/`row_id`) are ignored.

use std::path::Path;

use crate::error::{Error, Result};

use super::{Cohort, FeatureKind, FeatureSchema};

const OUTCOME_COLUMN: &str = "outcome";
const ROW_ID_COLUMN: &str = "row_id";

/// Load a cohort from `path`, validating it against `schema`.
///
/// Continuous cells that are empty or unparseable become missing markers.
/// Binary columns (and the outcome) must contain only `0`, `1`, or empty;
/// anything else is a parse error naming the offending row and column.
pub fn load_csv(path: &Path, schema: &FeatureSchema) -> Result<Cohort> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)?;
    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let mut feature_cols = Vec::with_capacity(schema.len());
    for f in schema.iter() {
        let idx = headers
            .iter()
            .position(|h| h == &f.name)
            .ok_or_else(|| Error::SchemaMismatch(format!("missing column '{}'", f.name)))?;
        feature_cols.push(idx);
    }
    let outcome_col = headers
        .iter()
        .position(|h| h == OUTCOME_COLUMN)
        .ok_or_else(|| Error::SchemaMismatch(format!("missing column '{OUTCOME_COLUMN}'")))?;
    let row_id_col = headers.iter().position(|h| h == ROW_ID_COLUMN);

    let mut values = Vec::new();
    let mut outcomes = Vec::new();
    let mut row_ids = Vec::new();
    for (row_index, record) in reader.records().enumerate() {
        let record = record?;
        for (j, f) in schema.iter().enumerate() {
            let cell = record.get(feature_cols[j]).unwrap_or("").trim();
            values.push(parse_cell(cell, f.kind, row_index + 1, &f.name)?);
        }
        let outcome_cell = record.get(outcome_col).unwrap_or("").trim();
        let outcome = parse_cell(outcome_cell, FeatureKind::Binary, row_index + 1, OUTCOME_COLUMN)?;
        outcomes.push(outcome.map(|v| v as u8));
        let id = match row_id_col {
            Some(c) => record.get(c).unwrap_or("").trim().to_string(),
            None => format!("r{row_index}"),
        };
        row_ids.push(id);
    }
    Cohort::new(schema.clone(), values, outcomes, row_ids)
}

fn parse_cell(cell: &str, kind: FeatureKind, row: usize, column: &str) -> Result<Option<f64>> {
    if cell.is_empty() {
        return Ok(None);
    }
    match kind {
        FeatureKind::Continuous => Ok(cell.parse::<f64>().ok().filter(|v| v.is_finite())),
        FeatureKind::Binary => match cell.parse::<f64>() {
            Ok(v) if v == 0.0 || v == 1.0 => Ok(Some(v)),
            _ => Err(Error::Parse {
                row,
                column: column.to_string(),
                message: format!("expected 0, 1, or empty, found '{cell}'"),
            }),
        },
    }
}

/// Write a cohort to `path`. Missing cells become empty strings; values are
/// formatted with the shortest round-trip representation so a reload
/// reproduces them exactly.
pub fn write_csv(cohort: &Cohort, path: &Path, include_row_ids: bool) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = Vec::new();
    if include_row_ids {
        header.push(ROW_ID_COLUMN.to_string());
    }
    header.extend(cohort.schema().iter().map(|f| f.name.clone()));
    header.push(OUTCOME_COLUMN.to_string());
    writer.write_record(&header)?;

    for i in 0..cohort.n_rows() {
        let mut record: Vec<String> = Vec::with_capacity(header.len());
        if include_row_ids {
            record.push(cohort.row_id(i).to_string());
        }
        for j in 0..cohort.n_features() {
            record.push(match cohort.value(i, j) {
                Some(v) => format_value(v),
                None => String::new(),
            });
        }
        record.push(match cohort.outcome(i) {
            Some(v) => v.to_string(),
            None => String::new(),
        });
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

fn format_value(v: f64) -> String {
    // Shortest round-trip formatting; integral values print without ".0"
    // noise only when they came in that way, which `{}` already handles.
    format!("{v}")
}
