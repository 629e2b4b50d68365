//! Random forest of gini-split CART classification trees, each trained on
//! its own bootstrap resample with a random feature subset per split.
//! Probability is the mean of per-tree leaf class frequencies. Per-tree
//! seeds derive from (seed, tree index), so training is deterministic and
//! trees are independent.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cohort::Cohort;
use crate::error::{Error, Result};
use crate::seed;

use super::{dense_matrix, two_class_labels};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// None grows to purity.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Features considered per split; None means floor(sqrt(p)).
    pub n_features_per_split: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: None,
            min_samples_leaf: 1,
            n_features_per_split: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestParams {
    fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Parameter("n_trees must be >= 1".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::Parameter("min_samples_leaf must be >= 1".into()));
        }
        if self.max_depth == Some(0) {
            return Err(Error::Parameter("max_depth must be >= 1 when set".into()));
        }
        if self.n_features_per_split == Some(0) {
            return Err(Error::Parameter(
                "n_features_per_split must be >= 1 when set".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
enum CartNode {
    Leaf {
        positive_fraction: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<CartNode>,
        right: Box<CartNode>,
    },
}

impl CartNode {
    fn route(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                CartNode::Leaf { positive_fraction } => return *positive_fraction,
                CartNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] < *threshold { left } else { right };
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestModel {
    pub params: ForestParams,
    pub feature_names: Vec<String>,
    trees: Vec<CartNode>,
}

impl ForestModel {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Mean of per-tree leaf positive frequencies.
    pub fn predict_proba(&self, rows: &Cohort) -> Result<Vec<f64>> {
        crate::model::check_feature_names(&self.feature_names, rows)?;
        let matrix = dense_matrix(rows)?;
        let p = self.feature_names.len();
        let mut out = Vec::with_capacity(rows.n_rows());
        for i in 0..rows.n_rows() {
            let row = &matrix[i * p..(i + 1) * p];
            let sum: f64 = self.trees.iter().map(|t| t.route(row)).sum();
            out.push(sum / self.trees.len() as f64);
        }
        Ok(out)
    }
}

pub fn fit_forest(train: &Cohort, params: &ForestParams) -> Result<ForestModel> {
    params.validate()?;
    let labels = two_class_labels(train)?;
    let n = train.n_rows();
    let p = train.n_features();
    let matrix = dense_matrix(train)?;
    let per_split = params
        .n_features_per_split
        .unwrap_or_else(|| ((p as f64).sqrt().floor() as usize).max(1))
        .min(p);
    let mut trees = Vec::with_capacity(params.n_trees);
    for t in 0..params.n_trees {
        let mut rng = seed::rng(seed::derive_indexed(params.seed, "forest-tree", t as u64));
        let rows: Vec<usize> = if params.bootstrap {
            (0..n).map(|_| rng.gen_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        trees.push(grow(
            &matrix,
            &labels,
            p,
            rows,
            0,
            params,
            per_split,
            &mut rng,
        ));
    }
    Ok(ForestModel {
        params: params.clone(),
        feature_names: train.schema().names(),
        trees,
    })
}

fn gini(pos: f64, total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    let q = pos / total;
    2.0 * q * (1.0 - q)
}

#[allow(clippy::too_many_arguments)]
fn grow(
    matrix: &[f64],
    labels: &[u8],
    p: usize,
    rows: Vec<usize>,
    depth: usize,
    params: &ForestParams,
    per_split: usize,
    rng: &mut rand_chacha::ChaCha12Rng,
) -> CartNode {
    let total = rows.len() as f64;
    let positives = rows.iter().filter(|&&i| labels[i] == 1).count() as f64;
    let leaf = CartNode::Leaf {
        positive_fraction: positives / total,
    };
    if positives == 0.0 || positives == total {
        return leaf;
    }
    if let Some(max_depth) = params.max_depth {
        if depth >= max_depth {
            return leaf;
        }
    }
    if rows.len() < 2 * params.min_samples_leaf {
        return leaf;
    }

    // Random feature subset for this split (without replacement).
    let mut candidates: Vec<usize> = (0..p).collect();
    candidates.shuffle(rng);
    candidates.truncate(per_split);
    candidates.sort_unstable();

    let parent_impurity = gini(positives, total);
    let mut best: Option<(f64, usize, f64)> = None; // (decrease, feature, threshold)
    let mut order = rows.clone();
    for &f in &candidates {
        order.sort_by(|&a, &b| {
            matrix[a * p + f]
                .total_cmp(&matrix[b * p + f])
                .then(a.cmp(&b))
        });
        let mut left_pos = 0.0;
        for w in 0..order.len() - 1 {
            left_pos += f64::from(labels[order[w]]);
            let left_n = (w + 1) as f64;
            let a = matrix[order[w] * p + f];
            let b = matrix[order[w + 1] * p + f];
            if b <= a {
                continue;
            }
            let threshold = 0.5 * (a + b);
            if !(threshold > a && threshold <= b) {
                continue;
            }
            let right_n = total - left_n;
            if (left_n as usize) < params.min_samples_leaf
                || (right_n as usize) < params.min_samples_leaf
            {
                continue;
            }
            let weighted = (left_n * gini(left_pos, left_n)
                + right_n * gini(positives - left_pos, right_n))
                / total;
            let decrease = parent_impurity - weighted;
            let improves = match best {
                None => decrease > 1e-15,
                Some((d, bf, bt)) => {
                    decrease > d + 1e-15
                        || ((decrease - d).abs() <= 1e-15 && (f, threshold) < (bf, bt))
                }
            };
            if improves {
                best = Some((decrease, f, threshold));
            }
        }
    }

    match best {
        None => leaf,
        Some((_, feature, threshold)) => {
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
                .into_iter()
                .partition(|&i| matrix[i * p + feature] < threshold);
            let left = grow(matrix, labels, p, left_rows, depth + 1, params, per_split, rng);
            let right = grow(matrix, labels, p, right_rows, depth + 1, params, per_split, rng);
            CartNode::Split {
                feature,
                threshold,
                left: Box::new(left),
                right: Box::new(right),
            }
        }
    }
}
