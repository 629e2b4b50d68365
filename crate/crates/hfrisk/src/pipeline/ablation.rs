//! Ablation driver: re-run grid search and evaluation with feature sets
//! removed, recording the bootstrap test-AUC distribution per
//! configuration. The baseline (nothing removed) is always present and
//! evaluated first; configurations are independent and seeded per index,
//! so the report does not depend on evaluation order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{auc, grid_search_with_refit, GridSearchOptions};
use crate::model::ModelSpec;
use crate::seed;
use crate::stats::{bootstrap_distribution, BootstrapCI};

use super::{artifacts, svg, Runner};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationConfigResult {
    pub label: String,
    pub excluded: Vec<String>,
    /// AUC of the refit winner on the untouched test split.
    pub point_auc: f64,
    /// Mean of the bootstrap AUC distribution.
    pub mean_auc: f64,
    pub ci: BootstrapCI,
    pub distribution: Vec<f64>,
    /// Winning grid cell per configuration.
    pub best_spec: ModelSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationReport {
    pub configurations: Vec<AblationConfigResult>,
    /// Index of the configuration with the highest mean AUC.
    pub best_index: usize,
}

impl AblationReport {
    pub fn best(&self) -> &AblationConfigResult {
        &self.configurations[self.best_index]
    }

    pub fn baseline(&self) -> &AblationConfigResult {
        &self.configurations[0]
    }
}

fn label_for(set: &[String]) -> String {
    if set.is_empty() {
        "baseline".to_string()
    } else {
        format!("-{}", set.join(",-"))
    }
}

pub(super) fn ensure_ablation(runner: &mut Runner) -> Result<AblationReport> {
    let stage = "ablate";
    let view = runner.modeling_view()?;
    let hash = runner.stage_hash(stage, &["prep", "vif"]);
    let names = [
        "ablation_report.json",
        "ablation_distributions.csv",
        "figure_ablation.svg",
    ];
    if runner.is_fresh(stage, &hash) {
        runner.mark_fresh(stage, hash);
        return runner.read_json("ablation_report.json");
    }

    // Candidate sets from config; the baseline is prepended when absent.
    let mut sets: Vec<Vec<String>> = Vec::new();
    if !runner.config.ablation_sets.iter().any(|s| s.is_empty()) {
        sets.push(Vec::new());
    }
    sets.extend(runner.config.ablation_sets.iter().cloned());
    sets.sort_by_key(|s| usize::from(!s.is_empty()));
    for set in &sets {
        for feature in set {
            if view.schema.index_of(feature).is_none() {
                return Err(Error::Config(format!(
                    "ablation candidate '{feature}' not in the modeling feature set"
                )));
            }
        }
    }

    // The headline learner is ablated by default; a config flag widens the
    // sweep to every family.
    let families = runner.config.grids.family_grids();
    let grid: Vec<ModelSpec> = if runner.config.ablation_all_families {
        families.into_iter().flat_map(|(_, cells)| cells).collect()
    } else {
        families
            .into_iter()
            .find(|(name, _)| *name == "gbdt")
            .map(|(_, cells)| cells)
            .unwrap_or_default()
    };
    if grid.is_empty() {
        return Err(Error::Config("ablation grid is empty".into()));
    }

    let mut configurations = Vec::with_capacity(sets.len());
    for (i, set) in sets.iter().enumerate() {
        let config_seed = seed::derive_indexed(runner.config.seed, "ablation", i as u64);
        let (train, balanced, test) = if set.is_empty() {
            (
                view.train.clone(),
                view.train_balanced.clone(),
                view.test.clone(),
            )
        } else {
            (
                view.train.drop_features(set)?,
                view.train_balanced.drop_features(set)?,
                view.test.drop_features(set)?,
            )
        };
        let options = GridSearchOptions {
            folds: runner.config.eval.folds,
            seed: config_seed,
            oversample_training_folds: runner.config.preprocess.oversample_to_balance,
        };
        let result = grid_search_with_refit(&grid, &train, &balanced, &options)
            .map_err(|e| super::with_stage(stage, e))?;
        let scores = result.model.predict_proba(&test)?;
        let labels = test.labels()?;
        let point_auc = auc(&scores, &labels)?;
        let mut distribution = bootstrap_distribution(
            auc,
            &scores,
            &labels,
            runner.config.eval.n_resamples,
            seed::derive(config_seed, "ablation-dist"),
        )?;
        let mean_auc = if distribution.is_empty() {
            point_auc
        } else {
            distribution.iter().sum::<f64>() / distribution.len() as f64
        };
        let ci = distribution_ci(
            &mut distribution,
            point_auc,
            runner.config.eval.alpha,
            config_seed,
        );
        configurations.push(AblationConfigResult {
            label: label_for(set),
            excluded: set.clone(),
            point_auc,
            mean_auc,
            ci,
            distribution,
            best_spec: result.best_spec().clone(),
        });
    }

    let best_index = configurations
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.mean_auc.total_cmp(&b.mean_auc))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let report = AblationReport {
        configurations,
        best_index,
    };

    runner.write_json("ablation_report.json", &report)?;
    artifacts::write_text(
        &runner.path("ablation_distributions.csv"),
        &distributions_csv(&report),
    )?;
    artifacts::write_text(&runner.path("figure_ablation.svg"), &boxplot_svg(&report))?;
    runner.record(stage, hash, &names)?;
    Ok(report)
}

fn distribution_ci(
    distribution: &mut [f64],
    point: f64,
    alpha: f64,
    seed_value: u64,
) -> BootstrapCI {
    if distribution.is_empty() {
        return BootstrapCI {
            point,
            lower: point,
            upper: point,
            n_resamples: 0,
            alpha,
            seed: seed_value,
        };
    }
    distribution.sort_by(f64::total_cmp);
    BootstrapCI {
        point,
        lower: crate::stats::percentile_of_sorted(distribution, alpha / 2.0),
        upper: crate::stats::percentile_of_sorted(distribution, 1.0 - alpha / 2.0),
        n_resamples: distribution.len(),
        alpha,
        seed: seed_value,
    }
}

fn distributions_csv(report: &AblationReport) -> String {
    let rows: Vec<Vec<String>> = report
        .configurations
        .iter()
        .flat_map(|config| {
            config
                .distribution
                .iter()
                .enumerate()
                .map(|(i, v)| vec![config.label.clone(), i.to_string(), format!("{v}")])
                .collect::<Vec<_>>()
        })
        .collect();
    artifacts::to_csv(&["configuration", "resample", "auc"], &rows)
}

/// Boxplot of the bootstrap distributions: whiskers at the 2.5/97.5
/// percentiles, box at the quartiles.
pub(super) fn boxplot_svg(report: &AblationReport) -> String {
    let groups: Vec<(String, svg::BoxStats)> = report
        .configurations
        .iter()
        .map(|config| {
            let mut sorted = config.distribution.clone();
            sorted.sort_by(f64::total_cmp);
            let stats = if sorted.is_empty() {
                svg::BoxStats {
                    low_whisker: config.point_auc,
                    q1: config.point_auc,
                    median: config.point_auc,
                    q3: config.point_auc,
                    high_whisker: config.point_auc,
                }
            } else {
                svg::BoxStats {
                    low_whisker: crate::stats::percentile_of_sorted(&sorted, 0.025),
                    q1: crate::stats::percentile_of_sorted(&sorted, 0.25),
                    median: crate::stats::percentile_of_sorted(&sorted, 0.5),
                    q3: crate::stats::percentile_of_sorted(&sorted, 0.75),
                    high_whisker: crate::stats::percentile_of_sorted(&sorted, 0.975),
                }
            };
            (config.label.clone(), stats)
        })
        .collect();
    svg::box_plot("Test AUC by ablation configuration", "bootstrap AUC", &groups)
}
