//! Stratified k-fold grid search scored by mean validation AUC.
//!
//! Oversampling, when enabled, happens inside each training fold only —
//! validation folds are never oversampled and never see duplicates of
//! their own rows. The winning cell (earliest on ties) is refit on the
//! full training cohort.

use serde::{Deserialize, Serialize};

use crate::cohort::Cohort;
use crate::error::{Error, Result};
use crate::model::{FittedModel, ModelSpec};
use crate::preprocess::oversample;
use crate::seed;

use super::auc;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSearchOptions {
    pub folds: usize,
    pub seed: u64,
    /// Oversample each training fold (and the final refit) to class balance.
    pub oversample_training_folds: bool,
}

impl Default for GridSearchOptions {
    fn default() -> Self {
        GridSearchOptions {
            folds: 5,
            seed: 0,
            oversample_training_folds: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridCellResult {
    pub spec: ModelSpec,
    pub fold_aucs: Vec<f64>,
    pub mean_auc: Option<f64>,
    /// Failure message when the cell could not be evaluated.
    pub error: Option<String>,
}

/// Row-id bookkeeping for leakage audits: per fold, the validation ids and
/// the training ids actually used (after any oversampling).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldDiagnostics {
    pub validation_row_ids: Vec<Vec<String>>,
    pub training_row_ids: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub cells: Vec<GridCellResult>,
    pub best_index: usize,
    pub model: FittedModel,
    pub folds: FoldDiagnostics,
}

impl GridSearchResult {
    pub fn best_spec(&self) -> &ModelSpec {
        &self.cells[self.best_index].spec
    }

    pub fn best_mean_auc(&self) -> f64 {
        self.cells[self.best_index].mean_auc.unwrap_or(f64::NAN)
    }
}

/// Stratified fold assignment: per class, shuffle then deal round-robin.
/// Returns fold index per row.
fn assign_folds(train: &Cohort, folds: usize, seed_value: u64) -> Result<Vec<usize>> {
    let labels = train.labels()?;
    let mut assignment = vec![0usize; labels.len()];
    let mut rng = seed::rng(seed::derive(seed_value, "cv-folds"));
    for class in [0u8, 1u8] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < folds {
            return Err(Error::SingleClass(format!(
                "class {class} has {} rows, fewer than {folds} folds",
                members.len()
            )));
        }
        use rand::seq::SliceRandom;
        members.shuffle(&mut rng);
        for (k, &row) in members.iter().enumerate() {
            assignment[row] = k % folds;
        }
    }
    Ok(assignment)
}

/// Grid search that refits the winner on an internally oversampled copy of
/// `train` (when enabled). The pipeline uses [`grid_search_with_refit`] to
/// supply its canonical balanced training cohort instead.
pub fn grid_search(
    grid: &[ModelSpec],
    train: &Cohort,
    options: &GridSearchOptions,
) -> Result<GridSearchResult> {
    let refit_cohort = if options.oversample_training_folds {
        let (balanced, _) = oversample(train, seed::derive(options.seed, "refit-oversample"))?;
        balanced
    } else {
        train.clone()
    };
    grid_search_with_refit(grid, train, &refit_cohort, options)
}

pub fn grid_search_with_refit(
    grid: &[ModelSpec],
    train: &Cohort,
    refit_on: &Cohort,
    options: &GridSearchOptions,
) -> Result<GridSearchResult> {
    if grid.is_empty() {
        return Err(Error::Parameter("grid must be non-empty".into()));
    }
    if options.folds < 2 {
        return Err(Error::Parameter(format!(
            "folds must be >= 2, got {}",
            options.folds
        )));
    }
    let assignment = assign_folds(train, options.folds, options.seed)?;

    // Build fold cohorts once; all cells share them (and the per-fold
    // oversampling draw), which keeps cells comparable.
    let mut fold_train = Vec::with_capacity(options.folds);
    let mut fold_valid = Vec::with_capacity(options.folds);
    for fold in 0..options.folds {
        let train_rows: Vec<usize> = (0..train.n_rows())
            .filter(|&i| assignment[i] != fold)
            .collect();
        let valid_rows: Vec<usize> = (0..train.n_rows())
            .filter(|&i| assignment[i] == fold)
            .collect();
        let mut fold_cohort = train.select_rows(&train_rows);
        if options.oversample_training_folds {
            let (balanced, _) = oversample(
                &fold_cohort,
                seed::derive_indexed(options.seed, "cv-oversample", fold as u64),
            )?;
            fold_cohort = balanced;
        }
        fold_train.push(fold_cohort);
        fold_valid.push(train.select_rows(&valid_rows));
    }
    let diagnostics = FoldDiagnostics {
        validation_row_ids: fold_valid.iter().map(|c| c.row_ids().to_vec()).collect(),
        training_row_ids: fold_train.iter().map(|c| c.row_ids().to_vec()).collect(),
    };

    let mut cells = Vec::with_capacity(grid.len());
    for (cell_index, spec) in grid.iter().enumerate() {
        let mut fold_aucs = Vec::with_capacity(options.folds);
        let mut failure: Option<String> = None;
        for fold in 0..options.folds {
            let seeded = spec.with_seed(seed::derive_indexed(
                options.seed,
                "cv-fit",
                (cell_index * options.folds + fold) as u64,
            ));
            match seeded
                .fit(&fold_train[fold])
                .and_then(|m| m.predict_proba(&fold_valid[fold]))
                .and_then(|scores| auc(&scores, &fold_valid[fold].labels()?))
            {
                Ok(score) => fold_aucs.push(score),
                Err(err) => {
                    failure = Some(err.to_string());
                    break;
                }
            }
        }
        let mean_auc = if failure.is_none() {
            Some(fold_aucs.iter().sum::<f64>() / fold_aucs.len() as f64)
        } else {
            None
        };
        cells.push(GridCellResult {
            spec: spec.clone(),
            fold_aucs,
            mean_auc,
            error: failure,
        });
    }

    // Earliest cell wins ties.
    let mut best_index = None;
    let mut best_score = f64::NEG_INFINITY;
    for (i, cell) in cells.iter().enumerate() {
        if let Some(score) = cell.mean_auc {
            if score > best_score {
                best_score = score;
                best_index = Some(i);
            }
        }
    }
    let best_index = best_index.ok_or_else(|| {
        Error::SearchFailed(format!(
            "all {} grid cells failed; first error: {}",
            cells.len(),
            cells[0].error.as_deref().unwrap_or("unknown")
        ))
    })?;

    let model = cells[best_index]
        .spec
        .with_seed(seed::derive(options.seed, "refit"))
        .fit(refit_on)?;

    Ok(GridSearchResult {
        cells,
        best_index,
        model,
        folds: diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::ForestParams;
    use crate::boost::BoostParams;
    use crate::cohort::{synthesize, FeatureSchema, SignalTerm, SynthesisSpec};
    use crate::cohort::Feature;
    use crate::preprocess::{is_oversampled_duplicate, oversample_origin};
    use std::collections::HashSet;

    fn planted_cohort(n: usize, seed: u64) -> Cohort {
        synthesize(&SynthesisSpec {
            schema: FeatureSchema::new(vec![
                Feature::continuous("A", "", 0.0, 1.0),
                Feature::continuous("B", "", 0.0, 1.0),
                Feature::continuous("C", "", 0.0, 1.0),
            ])
            .unwrap(),
            n,
            outcome_rate: 0.3,
            signal: vec![SignalTerm::linear("A", 1.8), SignalTerm::linear("B", -1.0)],
            interactions: vec![],
            missing_rate: 0.0,
            seed,
            correlation: None,
        })
        .unwrap()
    }

    #[test]
    fn single_cell_grid_wins_trivially() {
        let train = planted_cohort(200, 1);
        let grid = vec![ModelSpec::Knn { k: 5 }];
        let result = grid_search(&grid, &train, &GridSearchOptions::default()).unwrap();
        assert_eq!(result.best_index, 0);
        assert!(result.best_mean_auc() > 0.5);
    }

    #[test]
    fn duplicate_cells_tie_break_to_earliest() {
        let train = planted_cohort(150, 2);
        let grid = vec![ModelSpec::Knn { k: 11 }, ModelSpec::Knn { k: 11 }];
        let result = grid_search(&grid, &train, &GridSearchOptions::default()).unwrap();
        assert_eq!(result.best_index, 0);
        assert_eq!(
            result.cells[0].mean_auc.unwrap(),
            result.cells[1].mean_auc.unwrap()
        );
    }

    #[test]
    fn strong_cell_beats_degenerate_cell() {
        let train = planted_cohort(400, 3);
        let grid = vec![
            ModelSpec::Gbdt(BoostParams {
                n_trees: 1,
                max_depth: 1,
                learning_rate: 0.01,
                ..BoostParams::default()
            }),
            ModelSpec::Gbdt(BoostParams {
                n_trees: 80,
                max_depth: 3,
                learning_rate: 0.2,
                ..BoostParams::default()
            }),
        ];
        let result = grid_search(&grid, &train, &GridSearchOptions::default()).unwrap();
        assert_eq!(result.best_index, 1);
    }

    #[test]
    fn failed_cells_are_recorded_and_search_continues() {
        let train = planted_cohort(120, 4);
        let grid = vec![
            ModelSpec::Knn { k: 4 }, // even k: parameter error
            ModelSpec::Knn { k: 5 },
        ];
        let result = grid_search(&grid, &train, &GridSearchOptions::default()).unwrap();
        assert!(result.cells[0].error.is_some());
        assert_eq!(result.best_index, 1);

        let all_bad = vec![ModelSpec::Knn { k: 4 }, ModelSpec::Knn { k: 0 }];
        assert!(matches!(
            grid_search(&all_bad, &train, &GridSearchOptions::default()),
            Err(Error::SearchFailed(_))
        ));
    }

    #[test]
    fn validation_folds_partition_and_never_hold_duplicates() {
        let train = planted_cohort(200, 5);
        let grid = vec![ModelSpec::Forest(ForestParams {
            n_trees: 5,
            max_depth: Some(3),
            ..ForestParams::default()
        })];
        let options = GridSearchOptions {
            folds: 5,
            seed: 11,
            oversample_training_folds: true,
        };
        let result = grid_search(&grid, &train, &options).unwrap();
        let mut seen: HashSet<&str> = HashSet::new();
        for (fold, valid_ids) in result.folds.validation_row_ids.iter().enumerate() {
            let valid: HashSet<&str> = valid_ids.iter().map(String::as_str).collect();
            for id in valid_ids {
                assert!(!is_oversampled_duplicate(id), "duplicate {id} in validation");
                assert!(seen.insert(id), "row {id} appears in two validation folds");
            }
            for id in &result.folds.training_row_ids[fold] {
                // No training row (or duplicate origin) may sit in this
                // fold's validation set.
                assert!(
                    !valid.contains(oversample_origin(id)),
                    "fold {fold} trains on validation row {id}"
                );
            }
        }
        assert_eq!(seen.len(), train.n_rows());
    }

    #[test]
    fn deterministic_under_seed() {
        let train = planted_cohort(150, 6);
        let grid = vec![
            ModelSpec::Gbdt(BoostParams {
                n_trees: 10,
                ..BoostParams::default()
            }),
            ModelSpec::Knn { k: 7 },
        ];
        let options = GridSearchOptions {
            folds: 4,
            seed: 21,
            oversample_training_folds: true,
        };
        let a = grid_search(&grid, &train, &options).unwrap();
        let b = grid_search(&grid, &train, &options).unwrap();
        assert_eq!(a.best_index, b.best_index);
        for (x, y) in a.cells.iter().zip(&b.cells) {
            assert_eq!(x.fold_aucs, y.fold_aucs);
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        let train = planted_cohort(60, 7);
        assert!(matches!(
            grid_search(&[], &train, &GridSearchOptions::default()),
            Err(Error::Parameter(_))
        ));
        let grid = vec![ModelSpec::Knn { k: 3 }];
        let options = GridSearchOptions {
            folds: 1,
            ..GridSearchOptions::default()
        };
        assert!(matches!(
            grid_search(&grid, &train, &options),
            Err(Error::Parameter(_))
        ));
    }
}
