//! The uniform model contract the evaluation layer works against: a
//! parameter specification that can fit itself on a cohort, and a fitted
//! model that predicts probabilities. Serialized models share one JSON
//! envelope with a `kind` discriminator.

use serde::{Deserialize, Serialize};

use crate::baselines::{
    fit_forest, fit_knn, fit_logistic, predict_knn, ForestModel, ForestParams, KnnModel,
    LinearModel, LogisticParams, Penalty,
};
use crate::boost::{fit as fit_boost, BoostParams, BoostedEnsemble};
use crate::cohort::Cohort;
use crate::error::{Error, Result};

/// Fixed display order for comparison tables.
pub const MODEL_ORDER: [&str; 5] = ["gbdt", "logistic", "random_forest", "lasso", "knn"];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum ModelSpec {
    Gbdt(BoostParams),
    Logistic(LogisticParams),
    Forest(ForestParams),
    Knn { k: usize },
}

impl ModelSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            ModelSpec::Gbdt(_) => "gbdt",
            ModelSpec::Logistic(p) => match p.penalty {
                Penalty::L1 => "lasso",
                _ => "logistic",
            },
            ModelSpec::Forest(_) => "random_forest",
            ModelSpec::Knn { .. } => "knn",
        }
    }

    /// Seed-bearing specs get the derived seed; KNN is deterministic.
    pub fn with_seed(&self, seed: u64) -> ModelSpec {
        match self {
            ModelSpec::Gbdt(p) => {
                let mut p = p.clone();
                p.seed = seed;
                ModelSpec::Gbdt(p)
            }
            ModelSpec::Forest(p) => {
                let mut p = p.clone();
                p.seed = seed;
                ModelSpec::Forest(p)
            }
            other => other.clone(),
        }
    }

    pub fn fit(&self, train: &Cohort) -> Result<FittedModel> {
        Ok(match self {
            ModelSpec::Gbdt(p) => FittedModel::Gbdt(fit_boost(train, p)?),
            ModelSpec::Logistic(p) => FittedModel::Linear(fit_logistic(train, p)?),
            ModelSpec::Forest(p) => FittedModel::Forest(fit_forest(train, p)?),
            ModelSpec::Knn { k } => FittedModel::Knn(fit_knn(train, *k)?),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedModel {
    Gbdt(BoostedEnsemble),
    Linear(LinearModel),
    Forest(ForestModel),
    Knn(KnnModel),
}

impl FittedModel {
    pub fn kind_name(&self) -> &'static str {
        match self {
            FittedModel::Gbdt(_) => "gbdt",
            FittedModel::Linear(m) => match m.penalty {
                Penalty::L1 => "lasso",
                _ => "logistic",
            },
            FittedModel::Forest(_) => "random_forest",
            FittedModel::Knn(_) => "knn",
        }
    }

    pub fn predict_proba(&self, rows: &Cohort) -> Result<Vec<f64>> {
        match self {
            FittedModel::Gbdt(m) => m.predict_proba(rows),
            FittedModel::Linear(m) => m.predict_proba(rows),
            FittedModel::Forest(m) => m.predict_proba(rows),
            FittedModel::Knn(m) => predict_knn(m, rows),
        }
    }

    pub fn as_gbdt(&self) -> Option<&BoostedEnsemble> {
        match self {
            FittedModel::Gbdt(m) => Some(m),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<FittedModel> {
        Ok(serde_json::from_str(json)?)
    }
}

/// Shared schema-alignment check: cohort features must match the fitted
/// feature names exactly and in order.
pub fn check_feature_names(expected: &[String], rows: &Cohort) -> Result<()> {
    let got: Vec<&str> = rows.schema().iter().map(|f| f.name.as_str()).collect();
    let want: Vec<&str> = expected.iter().map(String::as_str).collect();
    if got != want {
        return Err(Error::SchemaMismatch(format!(
            "model expects features {want:?}, cohort has {got:?}"
        )));
    }
    Ok(())
}
