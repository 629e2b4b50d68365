//! CSV renderings of the run artifacts. All writers are deterministic:
//! fixed column order, shortest-round-trip float formatting.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;
use crate::eval::EvalReport;
use crate::explain::{ShapMatrix, ShapSummary};
use crate::stats::{TTestResult, VifReport};

pub fn write_text(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, content)?;
    Ok(())
}

fn csv_row(cells: &[String]) -> String {
    let escaped: Vec<String> = cells
        .iter()
        .map(|c| {
            if c.contains(',') || c.contains('"') || c.contains('\n') {
                format!("\"{}\"", c.replace('"', "\"\""))
            } else {
                c.clone()
            }
        })
        .collect();
    escaped.join(",")
}

pub fn to_csv(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", headers.join(","));
    for row in rows {
        let _ = writeln!(out, "{}", csv_row(row));
    }
    out
}

pub fn ttest_csv(rows: &[TTestResult]) -> String {
    to_csv(
        &[
            "feature",
            "train_mean",
            "train_std",
            "train_n",
            "test_mean",
            "test_std",
            "test_n",
            "t_statistic",
            "degrees_of_freedom",
            "p_value",
        ],
        &rows
            .iter()
            .map(|r| {
                vec![
                    r.feature.clone(),
                    format!("{}", r.mean_a),
                    format!("{}", r.std_a),
                    format!("{}", r.n_a),
                    format!("{}", r.mean_b),
                    format!("{}", r.std_b),
                    format!("{}", r.n_b),
                    format!("{}", r.t_statistic),
                    format!("{}", r.degrees_of_freedom),
                    format!("{}", r.p_value),
                ]
            })
            .collect::<Vec<_>>(),
    )
}

pub fn vif_csv(report: &VifReport) -> String {
    to_csv(
        &["feature", "vif", "removed", "removal_round"],
        &report
            .entries
            .iter()
            .map(|e| {
                vec![
                    e.feature.clone(),
                    if e.vif.is_finite() {
                        format!("{}", e.vif)
                    } else {
                        "inf".to_string()
                    },
                    e.removed.to_string(),
                    e.removal_round.map_or(String::new(), |r| r.to_string()),
                ]
            })
            .collect::<Vec<_>>(),
    )
}

pub fn eval_reports_csv(reports: &[EvalReport]) -> String {
    to_csv(
        &[
            "model",
            "dataset",
            "auroc",
            "auroc_ci_lower",
            "auroc_ci_upper",
            "accuracy",
            "accuracy_ci_lower",
            "accuracy_ci_upper",
        ],
        &reports
            .iter()
            .map(|r| {
                vec![
                    r.model_name.clone(),
                    r.dataset.to_string(),
                    format!("{}", r.auc),
                    format!("{}", r.auc_ci.lower),
                    format!("{}", r.auc_ci.upper),
                    format!("{}", r.accuracy),
                    format!("{}", r.accuracy_ci.lower),
                    format!("{}", r.accuracy_ci.upper),
                ]
            })
            .collect::<Vec<_>>(),
    )
}

pub fn roc_csv(report: &EvalReport) -> String {
    to_csv(
        &["threshold", "fpr", "tpr"],
        &report
            .roc
            .points
            .iter()
            .map(|p| {
                vec![
                    format!("{}", p.threshold),
                    format!("{}", p.fpr),
                    format!("{}", p.tpr),
                ]
            })
            .collect::<Vec<_>>(),
    )
}

pub fn shap_ranking_csv(summary: &ShapSummary) -> String {
    to_csv(
        &["feature", "mean_abs_attribution"],
        &summary
            .ranking
            .iter()
            .map(|(name, value)| vec![name.clone(), format!("{value}")])
            .collect::<Vec<_>>(),
    )
}

pub fn shap_beeswarm_csv(summary: &ShapSummary) -> String {
    to_csv(
        &["feature", "value", "attribution"],
        &summary
            .beeswarm
            .iter()
            .map(|p| {
                vec![
                    p.feature.clone(),
                    p.value.map_or(String::new(), |v| format!("{v}")),
                    format!("{}", p.attribution),
                ]
            })
            .collect::<Vec<_>>(),
    )
}

pub fn shap_matrix_csv(matrix: &ShapMatrix) -> String {
    let mut headers: Vec<&str> = vec!["row_id"];
    for name in &matrix.feature_names {
        headers.push(name.as_str());
    }
    let rows: Vec<Vec<String>> = (0..matrix.n_rows())
        .map(|i| {
            let mut row = vec![matrix.row_ids[i].clone()];
            row.extend(matrix.row(i).iter().map(|v| format!("{v}")));
            row
        })
        .collect();
    to_csv(&headers, &rows)
}

pub fn directions_csv(directions: &[(String, i8)]) -> String {
    to_csv(
        &["feature", "direction"],
        &directions
            .iter()
            .map(|(name, sign)| vec![name.clone(), sign.to_string()])
            .collect::<Vec<_>>(),
    )
}
