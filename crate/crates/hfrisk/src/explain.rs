//! Exact per-prediction Shapley attribution for the boosted ensemble.
//!
//! Attributions are computed per tree by the polynomial-time path-weight
//! recursion against the tree-path conditional expectation, with the
//! per-node hessian-weighted training coverage recorded at fit time as the
//! background distribution, then summed across trees (Shapley linearity).
//! Values live in margin (log-odds) space so local accuracy is exact:
//! `base_value + Σ_j values[i,j]` equals the model margin of row `i`.

use serde::{Deserialize, Serialize};

use crate::boost::{BoostedEnsemble, TreeNode};
use crate::cohort::Cohort;
use crate::error::{Error, Result};

/// Per-row, per-feature margin-space attributions plus the shared base
/// value (the cover-weighted expected ensemble margin).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShapMatrix {
    /// Row-major n × p attribution values.
    pub values: Vec<f64>,
    pub base_value: f64,
    pub feature_names: Vec<String>,
    pub row_ids: Vec<String>,
}

impl ShapMatrix {
    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.feature_names.len();
        &self.values[i * p..(i + 1) * p]
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.feature_names.len() + col]
    }
}

// ---------------------------------------------------------------------------
// Path recursion
// ---------------------------------------------------------------------------

const SENTINEL_FEATURE: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
struct PathElement {
    feature: usize,
    zero_fraction: f64,
    one_fraction: f64,
    pweight: f64,
}

#[derive(Debug, Clone, Default)]
struct Path {
    items: Vec<PathElement>,
}

impl Path {
    fn at(&mut self, i: usize) -> &mut PathElement {
        if i == self.items.len() {
            self.items.push(PathElement {
                feature: SENTINEL_FEATURE,
                zero_fraction: 0.0,
                one_fraction: 0.0,
                pweight: 0.0,
            });
        }
        &mut self.items[i]
    }

    fn get(&self, i: usize) -> PathElement {
        self.items[i]
    }
}

fn extend_path(
    path: &mut Path,
    unique_depth: usize,
    zero_fraction: f64,
    one_fraction: f64,
    feature: usize,
) {
    *path.at(unique_depth) = PathElement {
        feature,
        zero_fraction,
        one_fraction,
        pweight: if unique_depth == 0 { 1.0 } else { 0.0 },
    };
    for i in (0..unique_depth).rev() {
        path.at(i + 1).pweight +=
            one_fraction * path.get(i).pweight * (i + 1) as f64 / (unique_depth + 1) as f64;
        path.at(i).pweight =
            zero_fraction * path.get(i).pweight * (unique_depth - i) as f64
                / (unique_depth + 1) as f64;
    }
}

fn unwind_path(path: &mut Path, unique_depth: usize, path_index: usize) {
    let one_fraction = path.get(path_index).one_fraction;
    let zero_fraction = path.get(path_index).zero_fraction;
    let mut next_one_portion = path.get(unique_depth).pweight;
    for i in (0..unique_depth).rev() {
        if one_fraction != 0.0 {
            let tmp = path.get(i).pweight;
            path.at(i).pweight =
                next_one_portion * (unique_depth + 1) as f64 / ((i + 1) as f64 * one_fraction);
            next_one_portion = tmp
                - path.get(i).pweight * zero_fraction * (unique_depth - i) as f64
                    / (unique_depth + 1) as f64;
        } else {
            path.at(i).pweight = path.get(i).pweight * (unique_depth + 1) as f64
                / (zero_fraction * (unique_depth - i) as f64);
        }
    }
    for i in path_index..unique_depth {
        let next = path.get(i + 1);
        let element = path.at(i);
        element.feature = next.feature;
        element.zero_fraction = next.zero_fraction;
        element.one_fraction = next.one_fraction;
    }
}

/// Total permutation weight if the extension at `path_index` were unwound.
fn unwound_path_sum(path: &Path, unique_depth: usize, path_index: usize) -> f64 {
    let one_fraction = path.get(path_index).one_fraction;
    let zero_fraction = path.get(path_index).zero_fraction;
    let mut next_one_portion = path.get(unique_depth).pweight;
    let mut total = 0.0;
    for i in (0..unique_depth).rev() {
        if one_fraction != 0.0 {
            let tmp =
                next_one_portion * (unique_depth + 1) as f64 / ((i + 1) as f64 * one_fraction);
            total += tmp;
            next_one_portion = path.get(i).pweight
                - tmp * zero_fraction * (unique_depth - i) as f64 / (unique_depth + 1) as f64;
        } else if zero_fraction != 0.0 {
            total += path.get(i).pweight * (unique_depth + 1) as f64
                / (zero_fraction * (unique_depth - i) as f64);
        } else {
            debug_assert_eq!(path.get(i).pweight, 0.0);
        }
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    node: &TreeNode,
    row: &[Option<f64>],
    phi: &mut [f64],
    mut path: Path,
    mut unique_depth: usize,
    parent_zero_fraction: f64,
    parent_one_fraction: f64,
    parent_feature: usize,
) {
    // A branch whose zero and one fractions are both zero contributes
    // nothing anywhere down the subtree.
    if parent_zero_fraction == 0.0 && parent_one_fraction == 0.0 && unique_depth > 0 {
        return;
    }
    extend_path(
        &mut path,
        unique_depth,
        parent_zero_fraction,
        parent_one_fraction,
        parent_feature,
    );
    match node {
        TreeNode::Leaf { weight, .. } => {
            for i in 1..=unique_depth {
                let w = unwound_path_sum(&path, unique_depth, i);
                let element = path.get(i);
                phi[element.feature] +=
                    w * (element.one_fraction - element.zero_fraction) * weight;
            }
        }
        TreeNode::Split {
            feature,
            threshold,
            default_left,
            cover,
            left,
            right,
            ..
        } => {
            let go_left = match row[*feature] {
                Some(v) => v < *threshold,
                None => *default_left,
            };
            let (hot, cold): (&TreeNode, &TreeNode) =
                if go_left { (left, right) } else { (right, left) };
            let mut incoming_zero = 1.0;
            let mut incoming_one = 1.0;
            let mut found = None;
            for i in 0..=unique_depth {
                if path.get(i).feature == *feature {
                    found = Some(i);
                    break;
                }
            }
            if let Some(i) = found {
                incoming_zero = path.get(i).zero_fraction;
                incoming_one = path.get(i).one_fraction;
                unwind_path(&mut path, unique_depth, i);
                unique_depth -= 1;
            }
            let ratio = |child: &TreeNode| {
                if *cover > 0.0 {
                    child.cover() / cover
                } else {
                    0.0
                }
            };
            recurse(
                hot,
                row,
                phi,
                path.clone(),
                unique_depth + 1,
                incoming_zero * ratio(hot),
                incoming_one,
                *feature,
            );
            recurse(
                cold,
                row,
                phi,
                path,
                unique_depth + 1,
                incoming_zero * ratio(cold),
                0.0,
                *feature,
            );
        }
    }
}

/// Attribution of one tree's output for one row, added into `phi`.
fn tree_shap_row(tree: &TreeNode, row: &[Option<f64>], phi: &mut [f64]) {
    recurse(tree, row, phi, Path::default(), 0, 1.0, 1.0, SENTINEL_FEATURE);
}

/// Exact Shapley values of the ensemble margin for every row of `rows`.
pub fn tree_shap(model: &BoostedEnsemble, rows: &Cohort) -> Result<ShapMatrix> {
    let names: Vec<&str> = rows.schema().iter().map(|f| f.name.as_str()).collect();
    let own: Vec<&str> = model.feature_names.iter().map(String::as_str).collect();
    if names != own {
        return Err(Error::SchemaMismatch(
            "cohort schema does not match the fitted ensemble".into(),
        ));
    }
    let n = rows.n_rows();
    let p = model.feature_names.len();
    let mut values = vec![0.0_f64; n * p];
    for i in 0..n {
        let row = rows.row(i);
        let phi = &mut values[i * p..(i + 1) * p];
        for tree in &model.trees {
            tree_shap_row(tree, row, phi);
        }
    }
    let base_value = model.base_margin
        + model.trees.iter().map(TreeNode::expected_value).sum::<f64>();
    Ok(ShapMatrix {
        values,
        base_value,
        feature_names: model.feature_names.clone(),
        row_ids: rows.row_ids().to_vec(),
    })
}

// ---------------------------------------------------------------------------
// Aggregates
// ---------------------------------------------------------------------------

/// One beeswarm export point: an attribution paired with its raw feature
/// value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BeeswarmPoint {
    pub feature: String,
    pub value: Option<f64>,
    pub attribution: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShapSummary {
    /// Mean absolute attribution per feature, strongest first; ties break
    /// by feature name.
    pub ranking: Vec<(String, f64)>,
    /// (attribution, raw value) pairs for the top-ranked features.
    pub beeswarm: Vec<BeeswarmPoint>,
    pub top_k: usize,
    /// True when the requested top_k exceeded the feature count.
    pub clipped: bool,
}

/// Rank features by mean |attribution| and export beeswarm pairs for the
/// strongest `top_k` of them.
pub fn shap_summary(shap: &ShapMatrix, cohort: &Cohort, top_k: usize) -> Result<ShapSummary> {
    if shap.row_ids != cohort.row_ids() {
        return Err(Error::Data(
            "attribution matrix and cohort rows are not aligned".into(),
        ));
    }
    let p = shap.n_features();
    let n = shap.n_rows();
    let clipped = top_k > p;
    let top_k = top_k.min(p);
    let mut means: Vec<(String, f64)> = (0..p)
        .map(|j| {
            let mean = (0..n).map(|i| shap.value(i, j).abs()).sum::<f64>() / n.max(1) as f64;
            (shap.feature_names[j].clone(), mean)
        })
        .collect();
    means.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let ranking: Vec<(String, f64)> = means.into_iter().take(top_k).collect();
    let mut beeswarm = Vec::with_capacity(top_k * n);
    for (name, _) in &ranking {
        let j = cohort.schema().index_of(name).unwrap();
        for i in 0..n {
            beeswarm.push(BeeswarmPoint {
                feature: name.clone(),
                value: cohort.value(i, j),
                attribution: shap.value(i, j),
            });
        }
    }
    Ok(ShapSummary {
        ranking,
        beeswarm,
        top_k,
        clipped,
    })
}

/// Sign of the Spearman rank correlation between a feature's values and its
/// attributions: +1, −1, or 0 (constant feature or no association). This is
/// the operational form of "higher values push risk up/down".
pub fn direction_check(shap: &ShapMatrix, cohort: &Cohort, feature: &str) -> Result<i8> {
    let j = cohort
        .schema()
        .index_of(feature)
        .ok_or_else(|| Error::Config(format!("unknown feature '{feature}'")))?;
    if shap.row_ids != cohort.row_ids() {
        return Err(Error::Data(
            "attribution matrix and cohort rows are not aligned".into(),
        ));
    }
    let pairs: Vec<(f64, f64)> = (0..cohort.n_rows())
        .filter_map(|i| cohort.value(i, j).map(|v| (v, shap.value(i, j))))
        .collect();
    if pairs.len() < 2 {
        return Ok(0);
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let rho = spearman(&xs, &ys);
    Ok(if rho > 0.0 {
        1
    } else if rho < 0.0 {
        -1
    } else {
        0
    })
}

/// Average ranks (midranks for ties), then Pearson correlation of the ranks.
fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let rx = midranks(xs);
    let ry = midranks(ys);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for i in 0..rx.len() {
        cov += (rx[i] - mx) * (ry[i] - my);
        vx += (rx[i] - mx).powi(2);
        vy += (ry[i] - my).powi(2);
    }
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx.sqrt() * vy.sqrt())
}

fn midranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}
