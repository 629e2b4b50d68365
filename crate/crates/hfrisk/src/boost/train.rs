//! Boosting round and tree-growing internals.
//!
//! Trees grow level-wise over presorted feature columns: one pass per
//! (feature, level) walks the globally sorted indices and dispatches rows to
//! per-node running sums, so split search costs O(features × rows) per
//! level. Candidate thresholds are midpoints between consecutive distinct
//! sorted values; gain ties break toward the lowest feature index, then the
//! lowest threshold, which makes fitting deterministic.

use rand::seq::SliceRandom;

use crate::cohort::Cohort;
use crate::error::{Error, Result};
use crate::seed;
use crate::stats::special::{logistic_loss, logit, sigmoid};

use super::{BoostParams, BoostedEnsemble, TreeNode};

const HESSIAN_FLOOR: f64 = 1e-16;

#[derive(Debug, Clone, Copy)]
struct SplitCandidate {
    gain: f64,
    feature: usize,
    threshold: f64,
    default_left: bool,
}

/// Arena node used while growing one tree.
struct BuildNode {
    g: f64,
    h: f64,
    depth: usize,
    best: Option<SplitCandidate>,
    split: Option<(usize, f64, bool, f64)>, // feature, threshold, default_left, gain
    children: Option<(usize, usize)>,
}

pub(crate) fn fit_impl(train: &Cohort, params: &BoostParams) -> Result<BoostedEnsemble> {
    params.validate()?;
    let labels = train.labels()?;
    let n = train.n_rows();
    let p = train.n_features();
    let positives = labels.iter().filter(|&&l| l == 1).count();
    if positives == 0 || positives == n {
        return Err(Error::SingleClass(
            "boosting requires both outcome classes in training data".into(),
        ));
    }

    // Column-major values with NaN as the missing marker, plus presorted
    // non-missing indices per feature (ties resolved by row index).
    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(n); p];
    for i in 0..n {
        let row = train.row(i);
        for j in 0..p {
            columns[j].push(row[j].unwrap_or(f64::NAN));
        }
    }
    let mut sorted_idx: Vec<Vec<u32>> = Vec::with_capacity(p);
    let mut missing_idx: Vec<Vec<u32>> = Vec::with_capacity(p);
    for col in &columns {
        let mut idx: Vec<u32> = (0..n as u32).filter(|&i| !col[i as usize].is_nan()).collect();
        idx.sort_by(|&a, &b| {
            col[a as usize]
                .total_cmp(&col[b as usize])
                .then(a.cmp(&b))
        });
        sorted_idx.push(idx);
        missing_idx.push((0..n as u32).filter(|&i| col[i as usize].is_nan()).collect());
    }

    let base_margin = logit(params.base_score);
    let mut margins = vec![base_margin; n];
    let mut g = vec![0.0_f64; n];
    let mut h = vec![0.0_f64; n];
    let y: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();

    let mut trees = Vec::with_capacity(params.n_trees);
    let mut training_loss = Vec::with_capacity(params.n_trees);

    let n_sub = ((n as f64 * params.subsample).floor() as usize).max(1);
    let p_sub = ((p as f64 * params.colsample).floor() as usize).max(1);

    for round in 0..params.n_trees {
        for i in 0..n {
            let prob = sigmoid(margins[i]);
            g[i] = prob - y[i];
            h[i] = prob * (1.0 - prob);
        }

        let row_set: Vec<u32> = if n_sub < n {
            let mut rng = seed::rng(seed::derive_indexed(params.seed, "boost-rows", round as u64));
            let mut all: Vec<u32> = (0..n as u32).collect();
            all.shuffle(&mut rng);
            all.truncate(n_sub);
            all
        } else {
            (0..n as u32).collect()
        };
        let features: Vec<usize> = if p_sub < p {
            let mut rng = seed::rng(seed::derive_indexed(params.seed, "boost-cols", round as u64));
            let mut all: Vec<usize> = (0..p).collect();
            all.shuffle(&mut rng);
            all.truncate(p_sub);
            all.sort_unstable();
            all
        } else {
            (0..p).collect()
        };

        let tree = grow_tree(
            params,
            &columns,
            &sorted_idx,
            &missing_idx,
            &features,
            &row_set,
            &g,
            &h,
            n,
        );
        for (i, margin) in margins.iter_mut().enumerate() {
            *margin += route_columns(&tree, &columns, i);
        }
        let loss: f64 = margins
            .iter()
            .zip(&y)
            .map(|(&m, &label)| logistic_loss(m, label))
            .sum::<f64>()
            / n as f64;
        training_loss.push(loss);
        trees.push(tree);
    }

    Ok(BoostedEnsemble {
        params: params.clone(),
        base_margin,
        feature_names: train.schema().names(),
        trees,
        training_loss,
    })
}

fn route_columns(tree: &TreeNode, columns: &[Vec<f64>], row: usize) -> f64 {
    let mut node = tree;
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
                let v = columns[*feature][row];
                let go_left = if v.is_nan() { *default_left } else { v < *threshold };
                node = if go_left { left } else { right };
            }
        }
    }
}

fn leaf_weight(g: f64, h: f64, params: &BoostParams) -> f64 {
    params.learning_rate * (-g / (h + params.reg_lambda).max(HESSIAN_FLOOR))
}

#[allow(clippy::too_many_arguments)]
fn grow_tree(
    params: &BoostParams,
    columns: &[Vec<f64>],
    sorted_idx: &[Vec<u32>],
    missing_idx: &[Vec<u32>],
    features: &[usize],
    row_set: &[u32],
    g: &[f64],
    h: &[f64],
    n: usize,
) -> TreeNode {
    const INACTIVE: i32 = -1;
    let lambda = params.reg_lambda;

    let mut node_of = vec![INACTIVE; n];
    let (mut root_g, mut root_h) = (0.0, 0.0);
    for &i in row_set {
        node_of[i as usize] = 0;
        root_g += g[i as usize];
        root_h += h[i as usize];
    }
    let mut arena = vec![BuildNode {
        g: root_g,
        h: root_h,
        depth: 0,
        best: None,
        split: None,
        children: None,
    }];
    let mut active: Vec<usize> = vec![0];

    while !active.is_empty() {
        let depth = arena[active[0]].depth;
        if depth >= params.max_depth {
            break;
        }
        // Dense slots for this level.
        let mut slot_of = vec![usize::MAX; arena.len()];
        for (slot, &id) in active.iter().enumerate() {
            slot_of[id] = slot;
            arena[id].best = None;
        }
        let n_slots = active.len();
        let parent_score: Vec<f64> = active
            .iter()
            .map(|&id| {
                let node = &arena[id];
                node.g * node.g / (node.h + lambda).max(HESSIAN_FLOOR)
            })
            .collect();

        let mut run_g = vec![0.0_f64; n_slots];
        let mut run_h = vec![0.0_f64; n_slots];
        let mut run_prev = vec![0.0_f64; n_slots];
        let mut run_seen = vec![false; n_slots];
        let mut miss_g = vec![0.0_f64; n_slots];
        let mut miss_h = vec![0.0_f64; n_slots];

        for &f in features {
            run_g.iter_mut().for_each(|v| *v = 0.0);
            run_h.iter_mut().for_each(|v| *v = 0.0);
            run_seen.iter_mut().for_each(|v| *v = false);
            let has_missing = !missing_idx[f].is_empty();
            if has_missing {
                miss_g.iter_mut().for_each(|v| *v = 0.0);
                miss_h.iter_mut().for_each(|v| *v = 0.0);
                for &i in &missing_idx[f] {
                    let node = node_of[i as usize];
                    if node >= 0 {
                        if let Some(&slot) = slot_of.get(node as usize) {
                            if slot != usize::MAX {
                                miss_g[slot] += g[i as usize];
                                miss_h[slot] += h[i as usize];
                            }
                        }
                    }
                }
            }
            let col = &columns[f];
            for &i in &sorted_idx[f] {
                let node = node_of[i as usize];
                if node < 0 {
                    continue;
                }
                let slot = slot_of[node as usize];
                if slot == usize::MAX {
                    continue;
                }
                let v = col[i as usize];
                if run_seen[slot] && v > run_prev[slot] {
                    let threshold = 0.5 * (run_prev[slot] + v);
                    // Guard against midpoint collapse onto an endpoint.
                    if threshold > run_prev[slot] && threshold <= v {
                        let node_ref = &arena[active[slot]];
                        let (gm, hm) = if has_missing {
                            (miss_g[slot], miss_h[slot])
                        } else {
                            (0.0, 0.0)
                        };
                        evaluate_candidate(
                            params,
                            node_ref.g,
                            node_ref.h,
                            parent_score[slot],
                            run_g[slot],
                            run_h[slot],
                            gm,
                            hm,
                            f,
                            threshold,
                            &mut arena[active[slot]].best,
                        );
                    }
                }
                run_g[slot] += g[i as usize];
                run_h[slot] += h[i as usize];
                run_prev[slot] = v;
                run_seen[slot] = true;
            }
        }

        // Materialize the accepted splits and partition rows.
        let mut next_active = Vec::new();
        for &id in &active {
            let best = arena[id].best;
            if let Some(c) = best {
                if c.gain > 0.0 {
                    let left_id = arena.len();
                    let right_id = arena.len() + 1;
                    let child_depth = arena[id].depth + 1;
                    arena.push(BuildNode {
                        g: 0.0,
                        h: 0.0,
                        depth: child_depth,
                        best: None,
                        split: None,
                        children: None,
                    });
                    arena.push(BuildNode {
                        g: 0.0,
                        h: 0.0,
                        depth: child_depth,
                        best: None,
                        split: None,
                        children: None,
                    });
                    arena[id].split = Some((c.feature, c.threshold, c.default_left, c.gain));
                    arena[id].children = Some((left_id, right_id));
                    next_active.push(left_id);
                    next_active.push(right_id);
                }
            }
        }
        if next_active.is_empty() {
            break;
        }
        for i in 0..n {
            let node = node_of[i];
            if node < 0 {
                continue;
            }
            let id = node as usize;
            if let (Some((feature, threshold, default_left, _)), Some((l, r))) =
                (arena[id].split, arena[id].children)
            {
                let v = columns[feature][i];
                let go_left = if v.is_nan() { default_left } else { v < threshold };
                let child = if go_left { l } else { r };
                node_of[i] = child as i32;
                arena[child].g += g[i];
                arena[child].h += h[i];
            }
        }
        active = next_active;
    }

    materialize(&arena, 0, params)
}

#[allow(clippy::too_many_arguments)]
fn evaluate_candidate(
    params: &BoostParams,
    total_g: f64,
    total_h: f64,
    parent_score: f64,
    run_g: f64,
    run_h: f64,
    miss_g: f64,
    miss_h: f64,
    feature: usize,
    threshold: f64,
    best: &mut Option<SplitCandidate>,
) {
    let lambda = params.reg_lambda;
    let score = |gl: f64, hl: f64| -> Option<f64> {
        let gr = total_g - gl;
        let hr = total_h - hl;
        if hl < params.min_child_weight || hr < params.min_child_weight {
            return None;
        }
        Some(
            0.5 * (gl * gl / (hl + lambda).max(HESSIAN_FLOOR)
                + gr * gr / (hr + lambda).max(HESSIAN_FLOOR)
                - parent_score)
                - params.gamma,
        )
    };
    // Missing rows go to the gain-maximizing side; with none present both
    // directions coincide and the default stays left.
    let mut candidate: Option<(f64, bool)> = None;
    if let Some(gain) = score(run_g + miss_g, run_h + miss_h) {
        candidate = Some((gain, true));
    }
    if miss_g != 0.0 || miss_h != 0.0 {
        if let Some(gain) = score(run_g, run_h) {
            let better = match candidate {
                None => true,
                Some((existing, _)) => gain > existing,
            };
            if better {
                candidate = Some((gain, false));
            }
        }
    }
    if let Some((gain, default_left)) = candidate {
        let improves = match best {
            None => true,
            Some(b) => gain > b.gain,
        };
        if improves {
            *best = Some(SplitCandidate {
                gain,
                feature,
                threshold,
                default_left,
            });
        }
    }
}

fn materialize(arena: &[BuildNode], id: usize, params: &BoostParams) -> TreeNode {
    let node = &arena[id];
    match (node.split, node.children) {
        (Some((feature, threshold, default_left, gain)), Some((l, r))) => TreeNode::Split {
            feature,
            threshold,
            default_left,
            gain,
            cover: node.h,
            left: Box::new(materialize(arena, l, params)),
            right: Box::new(materialize(arena, r, params)),
        },
        _ => TreeNode::Leaf {
            weight: leaf_weight(node.g, node.h, params),
            cover: node.h,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boost::tests::cohort_from;
    use crate::boost::fit;
    use rand::Rng;

    #[test]
    fn perfect_single_feature_split_matches_closed_form() {
        // Feature X separates the labels at 2.5; with lambda = 0 and one
        // depth-1 tree the leaf weights are -G/H of each side.
        let rows: Vec<Vec<f64>> = vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]];
        let labels = [0, 0, 1, 1];
        let params = BoostParams {
            n_trees: 1,
            learning_rate: 1.0,
            max_depth: 1,
            min_child_weight: 0.0,
            reg_lambda: 0.0,
            gamma: 0.0,
            ..BoostParams::default()
        };
        let model = fit(&cohort_from(&["X"], &rows, &labels), &params).unwrap();
        match &model.trees[0] {
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
                ..
            } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 2.5);
                // At base_score 0.5 every row has p = 0.5: g = ±0.5, h = 0.25.
                // Left (labels 0): G = 1.0, H = 0.5 -> weight = -2.0.
                // Right (labels 1): G = -1.0, H = 0.5 -> weight = +2.0.
                match (left.as_ref(), right.as_ref()) {
                    (TreeNode::Leaf { weight: wl, .. }, TreeNode::Leaf { weight: wr, .. }) => {
                        assert!((wl + 2.0).abs() < 1e-12, "left {wl}");
                        assert!((wr - 2.0).abs() < 1e-12, "right {wr}");
                    }
                    other => panic!("expected two leaves, got {other:?}"),
                }
            }
            other => panic!("expected root split, got {other:?}"),
        }
    }

    #[test]
    fn pure_leaf_weight_formula() {
        // G = 4, H = 8, lambda = 1 gives -G/(H+lambda) = -4/9 before
        // shrinkage.
        let params = BoostParams {
            learning_rate: 1.0,
            reg_lambda: 1.0,
            ..BoostParams::default()
        };
        assert!((leaf_weight(4.0, 8.0, &params) + 4.0 / 9.0).abs() < 1e-15);
        let half = BoostParams {
            learning_rate: 0.5,
            reg_lambda: 1.0,
            ..BoostParams::default()
        };
        assert!((leaf_weight(4.0, 8.0, &half) + 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn deterministic_fit_with_subsampling() {
        let mut rng = crate::seed::rng(3);
        let rows: Vec<Vec<f64>> = (0..80)
            .map(|_| (0..5).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let labels: Vec<u8> = rows.iter().map(|r| u8::from(r[0] + r[3] > 1.0)).collect();
        let cohort = cohort_from(&["A", "B", "C", "D", "E"], &rows, &labels);
        let params = BoostParams {
            n_trees: 12,
            subsample: 0.7,
            colsample: 0.6,
            seed: 9,
            ..BoostParams::default()
        };
        let a = fit(&cohort, &params).unwrap();
        let b = fit(&cohort, &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_class_and_zero_trees_error() {
        let cohort = cohort_from(&["X"], &[vec![1.0], vec![2.0]], &[1, 1]);
        assert!(matches!(
            fit(&cohort, &BoostParams::default()),
            Err(Error::SingleClass(_))
        ));
        let cohort2 = cohort_from(&["X"], &[vec![1.0], vec![2.0]], &[0, 1]);
        let params = BoostParams {
            n_trees: 0,
            ..BoostParams::default()
        };
        assert!(matches!(fit(&cohort2, &params), Err(Error::Parameter(_))));
    }

    #[test]
    fn training_loss_is_non_increasing() {
        let mut rng = crate::seed::rng(17);
        let rows: Vec<Vec<f64>> = (0..150)
            .map(|_| (0..4).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
            .collect();
        let labels: Vec<u8> = rows
            .iter()
            .map(|r| u8::from(r[0] - 0.5 * r[2] + 0.2 * rng.gen::<f64>() > 0.0))
            .collect();
        let cohort = cohort_from(&["A", "B", "C", "D"], &rows, &labels);
        let params = BoostParams {
            n_trees: 60,
            learning_rate: 0.3,
            ..BoostParams::default()
        };
        let model = fit(&cohort, &params).unwrap();
        for w in model.training_loss.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "loss rose: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = crate::seed::rng(5);
        for _ in 0..20 {
            let m: f64 = rng.gen::<f64>() * 16.0 - 8.0;
            let y: f64 = f64::from(rng.gen::<bool>());
            let g = sigmoid(m) - y;
            let h = sigmoid(m) * (1.0 - sigmoid(m));
            let eps = 1e-6;
            let fd_g = (logistic_loss(m + eps, y) - logistic_loss(m - eps, y)) / (2.0 * eps);
            assert!((g - fd_g).abs() < 1e-6, "g {g} vs {fd_g} at m={m}");
            let eps = 1e-4;
            let fd_h = (logistic_loss(m + eps, y) - 2.0 * logistic_loss(m, y)
                + logistic_loss(m - eps, y))
                / (eps * eps);
            assert!((h - fd_h).abs() < 1e-6, "h {h} vs {fd_h} at m={m}");
        }
    }

    #[test]
    fn missing_values_learn_a_default_direction() {
        // Rows with missing X behave like high-X rows, so the learned
        // default direction must be right.
        let schema = crate::cohort::FeatureSchema::new(vec![
            crate::cohort::Feature::continuous("X", "", 0.0, 1.0),
        ])
        .unwrap();
        let mut values: Vec<Option<f64>> = Vec::new();
        let mut labels: Vec<Option<u8>> = Vec::new();
        for i in 0..40 {
            if i % 4 == 0 {
                values.push(None);
                labels.push(Some(1));
            } else if i % 2 == 0 {
                values.push(Some(1.0 + (i % 8) as f64 * 0.01));
                labels.push(Some(1));
            } else {
                values.push(Some(-1.0 - (i % 8) as f64 * 0.01));
                labels.push(Some(0));
            }
        }
        let ids = (0..40).map(|i| format!("r{i}")).collect();
        let cohort = Cohort::new(schema, values, labels, ids).unwrap();
        let params = BoostParams {
            n_trees: 1,
            max_depth: 1,
            min_child_weight: 0.0,
            ..BoostParams::default()
        };
        let model = fit(&cohort, &params).unwrap();
        match &model.trees[0] {
            TreeNode::Split { default_left, .. } => assert!(!default_left),
            other => panic!("expected split, got {other:?}"),
        }
    }

    #[test]
    fn chosen_splits_match_exhaustive_enumeration() {
        // Exhaustive oracle over all (feature, midpoint) pairs; the chosen
        // root split must attain the oracle's maximum gain exactly.
        let mut rng = crate::seed::rng(23);
        for trial in 0..60 {
            let n = 5 + (rng.gen::<u32>() % 26) as usize;
            let p = 1 + (rng.gen::<u32>() % 4) as usize;
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    (0..p)
                        .map(|_| f64::from((rng.gen::<u32>() % 12) as i32) / 2.0)
                        .collect()
                })
                .collect();
            let labels: Vec<u8> = (0..n).map(|_| u8::from(rng.gen::<bool>())).collect();
            if labels.iter().all(|&l| l == 0) || labels.iter().all(|&l| l == 1) {
                continue;
            }
            let names: Vec<String> = (0..p).map(|j| format!("F{j}")).collect();
            let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let cohort = cohort_from(&name_refs, &rows, &labels);
            let params = BoostParams {
                n_trees: 1,
                max_depth: 1,
                learning_rate: 1.0,
                min_child_weight: 0.0,
                reg_lambda: 0.5,
                gamma: 0.0,
                ..BoostParams::default()
            };
            let model = fit(&cohort, &params).unwrap();
            let oracle = oracle_best_gains(&rows, &labels, params.reg_lambda);
            match &model.trees[0] {
                TreeNode::Split {
                    feature, threshold, ..
                } => {
                    let chosen = oracle
                        .iter()
                        .find(|(f, t, _)| f == feature && t == threshold)
                        .unwrap_or_else(|| panic!("trial {trial}: chosen split not enumerated"));
                    let max = oracle.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
                    assert_eq!(chosen.2, max, "trial {trial}");
                }
                TreeNode::Leaf { .. } => {
                    let max = oracle.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
                    assert!(max <= 0.0, "trial {trial}: leaf despite max gain {max}");
                }
            }
        }
    }

    /// All (feature, threshold, gain) candidates at the root, computed from
    /// scratch in sorted order with prefix sums.
    pub(crate) fn oracle_best_gains(
        rows: &[Vec<f64>],
        labels: &[u8],
        lambda: f64,
    ) -> Vec<(usize, f64, f64)> {
        let n = rows.len();
        let p = rows[0].len();
        let g: Vec<f64> = labels.iter().map(|&l| 0.5 - f64::from(l)).collect();
        let h = vec![0.25_f64; n];
        let total_g: f64 = g.iter().sum();
        let total_h: f64 = h.iter().sum();
        let parent = total_g * total_g / (total_h + lambda);
        let mut out = Vec::new();
        for f in 0..p {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| rows[a][f].total_cmp(&rows[b][f]).then(a.cmp(&b)));
            let mut gl = 0.0;
            let mut hl = 0.0;
            for w in 0..n - 1 {
                gl += g[idx[w]];
                hl += h[idx[w]];
                let (a, b) = (rows[idx[w]][f], rows[idx[w + 1]][f]);
                if b > a {
                    let t = 0.5 * (a + b);
                    if t > a && t <= b {
                        let gr = total_g - gl;
                        let hr = total_h - hl;
                        let gain = 0.5
                            * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent);
                        out.push((f, t, gain));
                    }
                }
            }
        }
        out
    }

    #[test]
    fn increasing_a_leaf_weight_never_decreases_probabilities() {
        let mut rng = crate::seed::rng(31);
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|_| (0..3).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let labels: Vec<u8> = rows.iter().map(|r| u8::from(r[1] > 0.5)).collect();
        let cohort = cohort_from(&["A", "B", "C"], &rows, &labels);
        let model = fit(
            &cohort,
            &BoostParams {
                n_trees: 5,
                ..BoostParams::default()
            },
        )
        .unwrap();
        let before = model.predict_proba(&cohort).unwrap();
        let mut bumped = model.clone();
        fn bump_first_leaf(node: &mut TreeNode, delta: f64) {
            match node {
                TreeNode::Leaf { weight, .. } => *weight += delta,
                TreeNode::Split { left, .. } => bump_first_leaf(left, delta),
            }
        }
        bump_first_leaf(&mut bumped.trees[2], 0.75);
        let after = bumped.predict_proba(&cohort).unwrap();
        for (b, a) in before.iter().zip(&after) {
            assert!(a >= b, "probability decreased: {b} -> {a}");
        }
    }

    #[test]
    fn probabilities_stay_strictly_inside_unit_interval() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64]).collect();
        let labels: Vec<u8> = (0..30).map(|i| u8::from(i >= 15)).collect();
        let cohort = cohort_from(&["X"], &rows, &labels);
        let model = fit(
            &cohort,
            &BoostParams {
                n_trees: 400,
                learning_rate: 1.0,
                reg_lambda: 0.0,
                min_child_weight: 0.0,
                ..BoostParams::default()
            },
        )
        .unwrap();
        for p in model.predict_proba(&cohort).unwrap() {
            assert!(p > 0.0 && p < 1.0);
        }
    }
}
