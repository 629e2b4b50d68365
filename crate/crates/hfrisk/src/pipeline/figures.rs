//! Figure emission from a completed run directory. Every figure is a
//! self-contained SVG rebuilt purely from on-disk artifacts, so
//! regenerating against an untouched directory is byte-identical.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::boost::BoostedEnsemble;
use crate::error::{Error, Result};
use crate::eval::EvalReport;
use crate::model::FittedModel;

use super::svg;
use super::{artifacts, ShapOutputs};

fn read_to_string(path: &Path, stage: &str) -> Result<String> {
    if !path.exists() {
        return Err(Error::MissingArtifact(stage.to_string()));
    }
    Ok(std::fs::read_to_string(path)?)
}

/// Build the figure set for `dir`: importance bars, the ROC overlay, the
/// attribution bar and beeswarm charts, and — when ablation artifacts are
/// present — the ablation boxplot. Returns the paths written.
pub fn emit_figures(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();

    // Importance bars from the boosted model (top 20 by total gain).
    let model_json = read_to_string(&dir.join("model_gbdt.json"), "train")?;
    let model = FittedModel::from_json(&model_json)?;
    let gbdt: &BoostedEnsemble = model
        .as_gbdt()
        .ok_or_else(|| Error::MissingArtifact("train".to_string()))?;
    let importance: Vec<(String, f64)> =
        gbdt.gain_importance().into_iter().take(20).collect();
    let path = dir.join("figure_importance.svg");
    artifacts::write_text(
        &path,
        &svg::bar_chart("Top features by total split gain", "total gain", &importance),
    )?;
    written.push(path);

    // ROC overlay from the test-side reports.
    let reports: Vec<EvalReport> =
        serde_json::from_str(&read_to_string(&dir.join("report_test.json"), "eval")?)?;
    let series: Vec<(String, Vec<(f64, f64)>)> = reports
        .iter()
        .map(|r| {
            (
                format!("{} (AUC {:.4})", r.model_name, r.auc),
                r.roc.points.iter().map(|p| (p.fpr, p.tpr)).collect(),
            )
        })
        .collect();
    let path = dir.join("figure_roc.svg");
    artifacts::write_text(&path, &svg::roc_chart("Test-set ROC curves", &series))?;
    written.push(path);

    // Attribution bar chart and beeswarm from the explanation summary.
    let shap: ShapOutputs =
        serde_json::from_str(&read_to_string(&dir.join("shap_summary.json"), "shap")?)?;
    let path = dir.join("figure_shap_bar.svg");
    artifacts::write_text(
        &path,
        &svg::bar_chart(
            "Mean absolute attribution (margin space)",
            "mean |attribution|",
            &shap.summary.ranking,
        ),
    )?;
    written.push(path);

    // Beeswarm: per ranked feature, (attribution, normalized value) points.
    let mut per_feature: BTreeMap<&str, Vec<(f64, Option<f64>)>> = BTreeMap::new();
    let mut bounds: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    for point in &shap.summary.beeswarm {
        if let Some(v) = point.value {
            let entry = bounds
                .entry(point.feature.as_str())
                .or_insert((f64::INFINITY, f64::NEG_INFINITY));
            entry.0 = entry.0.min(v);
            entry.1 = entry.1.max(v);
        }
    }
    for point in &shap.summary.beeswarm {
        let normalized = point.value.map(|v| {
            let (lo, hi) = bounds[point.feature.as_str()];
            if hi > lo {
                (v - lo) / (hi - lo)
            } else {
                0.5
            }
        });
        per_feature
            .entry(point.feature.as_str())
            .or_default()
            .push((point.attribution, normalized));
    }
    let swarm: Vec<(String, Vec<(f64, Option<f64>)>)> = shap
        .summary
        .ranking
        .iter()
        .map(|(name, _)| {
            (
                name.clone(),
                per_feature.get(name.as_str()).cloned().unwrap_or_default(),
            )
        })
        .collect();
    let path = dir.join("figure_shap_beeswarm.svg");
    artifacts::write_text(
        &path,
        &svg::beeswarm("Per-row attributions colored by feature value", &swarm),
    )?;
    written.push(path);

    // Ablation boxplot, only when the ablation stage has run.
    let ablation_path = dir.join("ablation_report.json");
    if ablation_path.exists() {
        let report: super::AblationReport =
            serde_json::from_str(&std::fs::read_to_string(&ablation_path)?)?;
        let path = dir.join("figure_ablation.svg");
        artifacts::write_text(&path, &super::ablation::boxplot_svg(&report))?;
        written.push(path);
    }

    Ok(written)
}
