//! Second-order gradient-boosted regression trees with a logistic
//! objective: per-row gradient/hessian statistics, L2-regularized leaf
//! weights, gamma-thresholded split gain, and exact greedy split search
//! over midpoints between consecutive sorted feature values. Cohort sizes
//! here are small enough that exact search is cheap; there is no histogram
//! approximation.

mod train;

use serde::{Deserialize, Serialize};

use crate::cohort::Cohort;
use crate::error::{Error, Result};
use crate::stats::special::{logit, sigmoid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoostParams {
    pub n_trees: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    /// Minimum hessian sum allowed in each child of a split.
    pub min_child_weight: f64,
    /// L2 penalty on leaf weights.
    pub reg_lambda: f64,
    /// Split gain threshold subtracted from every candidate gain.
    pub gamma: f64,
    pub subsample: f64,
    pub colsample: f64,
    pub base_score: f64,
    pub seed: u64,
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams {
            n_trees: 200,
            learning_rate: 0.1,
            max_depth: 3,
            min_child_weight: 1.0,
            reg_lambda: 1.0,
            gamma: 0.0,
            subsample: 1.0,
            colsample: 1.0,
            base_score: 0.5,
            seed: 0,
        }
    }
}

impl BoostParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Parameter("n_trees must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::Parameter(format!(
                "learning_rate {} outside (0,1]",
                self.learning_rate
            )));
        }
        if self.max_depth == 0 {
            return Err(Error::Parameter("max_depth must be >= 1".into()));
        }
        if self.min_child_weight < 0.0 {
            return Err(Error::Parameter("min_child_weight must be >= 0".into()));
        }
        if self.reg_lambda < 0.0 {
            return Err(Error::Parameter("reg_lambda must be >= 0".into()));
        }
        if self.gamma < 0.0 {
            return Err(Error::Parameter("gamma must be >= 0".into()));
        }
        for (name, v) in [("subsample", self.subsample), ("colsample", self.colsample)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Parameter(format!("{name} {v} outside (0,1]")));
            }
        }
        if !(self.base_score > 0.0 && self.base_score < 1.0) {
            return Err(Error::Parameter(format!(
                "base_score {} outside (0,1)",
                self.base_score
            )));
        }
        Ok(())
    }
}

/// A regression tree node. Leaf weights already include the learning-rate
/// shrinkage, so prediction is a plain sum over trees. `cover` is the
/// hessian-weighted training coverage recorded at fit time; the Shapley
/// explainer uses it as the background distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum TreeNode {
    Leaf {
        weight: f64,
        cover: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        /// Where rows with a missing value for `feature` are routed.
        default_left: bool,
        /// Realized split gain, the quantity maximized during search.
        gain: f64,
        cover: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    /// Leaf weight reached by `row` (missing values follow the node's
    /// default direction).
    pub fn route(&self, row: &[Option<f64>]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { weight, .. } => return *weight,
                TreeNode::Split {
                    feature,
                    threshold,
                    default_left,
                    left,
                    right,
                    ..
                } => {
                    let go_left = match row[*feature] {
                        Some(v) => v < *threshold,
                        None => *default_left,
                    };
                    node = if go_left { left } else { right };
                }
            }
        }
    }

    pub fn cover(&self) -> f64 {
        match self {
            TreeNode::Leaf { cover, .. } | TreeNode::Split { cover, .. } => *cover,
        }
    }

    /// Cover-weighted expected output of the subtree.
    pub fn expected_value(&self) -> f64 {
        match self {
            TreeNode::Leaf { weight, .. } => *weight,
            TreeNode::Split { left, right, cover, .. } => {
                if *cover <= 0.0 {
                    return 0.5 * (left.expected_value() + right.expected_value());
                }
                (left.cover() * left.expected_value() + right.cover() * right.expected_value())
                    / cover
            }
        }
    }

    pub fn max_depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.max_depth().max(right.max_depth()),
        }
    }

    fn accumulate_gain(&self, into: &mut [f64]) {
        if let TreeNode::Split {
            feature,
            gain,
            left,
            right,
            ..
        } = self
        {
            into[*feature] += gain;
            left.accumulate_gain(into);
            right.accumulate_gain(into);
        }
    }
}

/// Additive ensemble of regression trees under a logistic link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedEnsemble {
    pub params: BoostParams,
    pub base_margin: f64,
    pub feature_names: Vec<String>,
    pub trees: Vec<TreeNode>,
    /// Mean training logistic loss after each boosting round.
    pub training_loss: Vec<f64>,
}

impl BoostedEnsemble {
    /// Structurally empty ensemble predicting `base_score` everywhere.
    pub fn empty(feature_names: Vec<String>, base_score: f64) -> BoostedEnsemble {
        BoostedEnsemble {
            params: BoostParams::default(),
            base_margin: logit(base_score),
            feature_names,
            trees: Vec::new(),
            training_loss: Vec::new(),
        }
    }

    fn check_schema(&self, rows: &Cohort) -> Result<()> {
        let names: Vec<&str> = rows.schema().iter().map(|f| f.name.as_str()).collect();
        let own: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        if names != own {
            return Err(Error::SchemaMismatch(format!(
                "model was fitted on {} features, cohort provides {}",
                own.len(),
                names.len()
            )));
        }
        Ok(())
    }

    /// Raw margin per row: base margin plus the sum of routed leaf weights.
    pub fn predict_margin(&self, rows: &Cohort) -> Result<Vec<f64>> {
        self.check_schema(rows)?;
        let mut margins = vec![self.base_margin; rows.n_rows()];
        for i in 0..rows.n_rows() {
            let row = rows.row(i);
            for tree in &self.trees {
                margins[i] += tree.route(row);
            }
        }
        Ok(margins)
    }

    /// Event probability per row, sigmoid of the margin; always strictly
    /// inside (0, 1).
    pub fn predict_proba(&self, rows: &Cohort) -> Result<Vec<f64>> {
        Ok(self.predict_margin(rows)?.into_iter().map(sigmoid).collect())
    }

    /// Per-feature total realized split gain across all trees, sorted
    /// descending with ties broken by feature name.
    pub fn gain_importance(&self) -> Vec<(String, f64)> {
        let mut gains = vec![0.0; self.feature_names.len()];
        for tree in &self.trees {
            tree.accumulate_gain(&mut gains);
        }
        let mut ranked: Vec<(String, f64)> = self
            .feature_names
            .iter()
            .cloned()
            .zip(gains)
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<BoostedEnsemble> {
        Ok(serde_json::from_str(json)?)
    }
}

/// Fit an ensemble on `train`; deterministic given (data, params).
pub fn fit(train: &Cohort, params: &BoostParams) -> Result<BoostedEnsemble> {
    train::fit_impl(train, params)
}
