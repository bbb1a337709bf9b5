//! Regularized gradient-boosted regression trees with exact greedy splits.
//!
//! Squared-error objective, second-order boosting: with g = sum of
//! gradients and h = sum of hessians over a leaf, the optimal leaf weight is
//! w* = -G / (H + lambda) and a split is scored by
//!
//! gain = 1/2 * [ G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda)
//!                - (G_L+G_R)^2/(H_L+H_R+lambda) ] - gamma,
//!
//! accepted only when strictly positive. Split finding is exact greedy over
//! midpoints of adjacent distinct feature values. Rows with a missing value
//! (NaN) in the split feature are routed to whichever side yields the higher
//! gain; that side is recorded as the node's default direction. Trees store
//! raw leaf weights; the learning rate is applied at prediction time:
//! prediction = base_score + eta * sum of tree outputs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BoostError {
    #[error("hessian sum plus lambda must be positive, got {0}")]
    DegenerateLeaf(f64),
    #[error("training design is empty")]
    EmptyDesign,
    #[error("x and y have different row counts: {0} vs {1}")]
    ShapeMismatch(usize, usize),
    #[error("row has {got} features, model expects {expected}")]
    ColumnMismatch { expected: usize, got: usize },
    #[error("invalid parameter {name}: {value}")]
    InvalidParam { name: &'static str, value: f64 },
}

/// Hyperparameters for one training run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainParams {
    /// Number of boosting rounds (trees).
    pub n_rounds: usize,
    /// Learning rate in (0, 1], applied to every tree's output.
    pub eta: f64,
    /// Maximum tree depth; 1 gives stumps.
    pub max_depth: usize,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    /// Fixed cost per leaf subtracted from each split gain.
    pub gamma: f64,
    /// Minimum hessian sum required on each side of a split.
    pub min_child_weight: f64,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            n_rounds: 100,
            eta: 0.1,
            max_depth: 3,
            lambda: 1.0,
            gamma: 0.0,
            min_child_weight: 1.0,
        }
    }
}

impl TrainParams {
    pub fn validate(&self) -> Result<(), BoostError> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(BoostError::InvalidParam {
                name: "eta",
                value: self.eta,
            });
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(BoostError::InvalidParam {
                name: "lambda",
                value: self.lambda,
            });
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(BoostError::InvalidParam {
                name: "gamma",
                value: self.gamma,
            });
        }
        if !(self.min_child_weight >= 0.0 && self.min_child_weight.is_finite()) {
            return Err(BoostError::InvalidParam {
                name: "min_child_weight",
                value: self.min_child_weight,
            });
        }
        Ok(())
    }
}

/// A regression-tree node. Rows with NaN in the split feature follow
/// `default_left`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        weight: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        default_left: bool,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    /// Raw (unshrunk) output for one row.
    pub fn value(&self, row: &[f64]) -> f64 {
        match self {
            TreeNode::Leaf { weight } => *weight,
            TreeNode::Split {
                feature,
                threshold,
                default_left,
                left,
                right,
            } => {
                let v = row[*feature];
                let go_left = if v.is_nan() { *default_left } else { v < *threshold };
                if go_left {
                    left.value(row)
                } else {
                    right.value(row)
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    fn sum_squared_weights(&self) -> f64 {
        match self {
            TreeNode::Leaf { weight } => weight * weight,
            TreeNode::Split { left, right, .. } => {
                left.sum_squared_weights() + right.sum_squared_weights()
            }
        }
    }
}

/// Gradient and hessian of the squared-error loss 1/2 (y_hat - y)^2.
pub fn grad_hess(y: f64, y_hat: f64) -> (f64, f64) {
    (y_hat - y, 1.0)
}

/// Optimal leaf weight -G / (H + lambda).
pub fn leaf_weight(grad_sum: f64, hess_sum: f64, lambda: f64) -> Result<f64, BoostError> {
    let denom = hess_sum + lambda;
    if denom <= 0.0 {
        return Err(BoostError::DegenerateLeaf(denom));
    }
    Ok(-grad_sum / denom)
}

/// The winning split for one node, if any candidate has positive gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitDecision {
    pub feature: usize,
    pub threshold: f64,
    pub default_left: bool,
    pub gain: f64,
}

fn half_score(g: f64, h: f64, lambda: f64) -> f64 {
    g * g / (h + lambda)
}

/// Exact greedy split search over `rows`.
///
/// Every midpoint between adjacent distinct values of each feature is a
/// candidate threshold. Rows with NaN in the feature are tried on both
/// sides; the better side becomes the default direction. Candidates whose
/// children would fall below `min_child_weight` in hessian sum are skipped.
/// Ties in gain resolve to the lowest feature index, then the lowest
/// threshold, then default-left.
pub fn best_split(
    x: &[Vec<f64>],
    grad: &[f64],
    hess: &[f64],
    rows: &[usize],
    n_features: usize,
    lambda: f64,
    gamma: f64,
    min_child_weight: f64,
) -> Option<SplitDecision> {
    let mut g_parent = 0.0;
    let mut h_parent = 0.0;
    for &r in rows {
        g_parent += grad[r];
        h_parent += hess[r];
    }
    let parent_score = half_score(g_parent, h_parent, lambda);

    let mut best: Option<SplitDecision> = None;
    let mut present: Vec<(f64, usize)> = Vec::with_capacity(rows.len());
    for feature in 0..n_features {
        present.clear();
        let mut g_missing = 0.0;
        let mut h_missing = 0.0;
        let mut n_missing = 0usize;
        for &r in rows {
            let v = x[r][feature];
            if v.is_nan() {
                g_missing += grad[r];
                h_missing += hess[r];
                n_missing += 1;
            } else {
                present.push((v, r));
            }
        }
        if present.len() < 2 {
            continue;
        }
        present.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut g_left = 0.0;
        let mut h_left = 0.0;
        let (mut g_all, mut h_all) = (0.0, 0.0);
        for &(_, r) in &present {
            g_all += grad[r];
            h_all += hess[r];
        }
        for i in 0..present.len() - 1 {
            let (v, r) = present[i];
            g_left += grad[r];
            h_left += hess[r];
            let v_next = present[i + 1].0;
            if v == v_next {
                continue;
            }
            let threshold = 0.5 * (v + v_next);
            // Try missing rows on the left, then on the right; with no
            // missing rows the two are identical, so evaluate once.
            let directions: &[bool] = if n_missing == 0 { &[true] } else { &[true, false] };
            for &missing_left in directions {
                let (gl, hl, gr, hr) = if missing_left {
                    (
                        g_left + g_missing,
                        h_left + h_missing,
                        g_all - g_left,
                        h_all - h_left,
                    )
                } else {
                    (
                        g_left,
                        h_left,
                        g_all - g_left + g_missing,
                        h_all - h_left + h_missing,
                    )
                };
                if hl < min_child_weight || hr < min_child_weight {
                    continue;
                }
                let gain = 0.5
                    * (half_score(gl, hl, lambda) + half_score(gr, hr, lambda) - parent_score)
                    - gamma;
                if gain <= 0.0 {
                    continue;
                }
                // Strict improvement keeps the earliest candidate on ties,
                // which encodes the tie-break order.
                if best.is_none_or(|b| gain > b.gain) {
                    best = Some(SplitDecision {
                        feature,
                        threshold,
                        default_left: missing_left,
                        gain,
                    });
                }
            }
        }
    }
    best
}

/// Grow one tree on the given rows by recursive greedy splitting.
///
/// Recursion stops at `params.max_depth`, when fewer than two rows remain,
/// or when no candidate split has positive gain.
pub fn build_tree(
    x: &[Vec<f64>],
    grad: &[f64],
    hess: &[f64],
    rows: &[usize],
    n_features: usize,
    params: &TrainParams,
) -> TreeNode {
    assert!(!rows.is_empty(), "cannot grow a tree with no rows");
    grow(x, grad, hess, rows.to_vec(), n_features, params, 0)
}

fn grow(
    x: &[Vec<f64>],
    grad: &[f64],
    hess: &[f64],
    rows: Vec<usize>,
    n_features: usize,
    params: &TrainParams,
    depth: usize,
) -> TreeNode {
    let make_leaf = |rows: &[usize]| {
        let g: f64 = rows.iter().map(|&r| grad[r]).sum();
        let h: f64 = rows.iter().map(|&r| hess[r]).sum();
        let weight = leaf_weight(g, h, params.lambda)
            .expect("unit hessians make the leaf denominator positive");
        TreeNode::Leaf { weight }
    };
    if depth >= params.max_depth || rows.len() < 2 {
        return make_leaf(&rows);
    }
    let Some(split) = best_split(
        x,
        grad,
        hess,
        &rows,
        n_features,
        params.lambda,
        params.gamma,
        params.min_child_weight,
    ) else {
        return make_leaf(&rows);
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows.into_iter().partition(|&r| {
        let v = x[r][split.feature];
        if v.is_nan() {
            split.default_left
        } else {
            v < split.threshold
        }
    });
    let left = grow(x, grad, hess, left_rows, n_features, params, depth + 1);
    let right = grow(x, grad, hess, right_rows, n_features, params, depth + 1);
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        default_left: split.default_left,
        left: Box::new(left),
        right: Box::new(right),
    }
}

/// A trained ensemble. Trees hold raw weights; `eta` scales them only when
/// predicting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    pub base_score: f64,
    pub n_features: usize,
    pub params: TrainParams,
    pub trees: Vec<TreeNode>,
}

impl BoostedModel {
    /// prediction = base_score + eta * sum of tree outputs.
    pub fn predict(&self, row: &[f64]) -> Result<f64, BoostError> {
        if row.len() != self.n_features {
            return Err(BoostError::ColumnMismatch {
                expected: self.n_features,
                got: row.len(),
            });
        }
        let mut out = self.base_score;
        for tree in &self.trees {
            out += self.params.eta * tree.value(row);
        }
        Ok(out)
    }

    /// Training mean squared error before any tree and after each round,
    /// replayed in exactly the arithmetic order used by `train`. Length is
    /// `n_rounds + 1`.
    pub fn staged_training_mse(&self, x: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>, BoostError> {
        check_design(x, y)?;
        if x[0].len() != self.n_features {
            return Err(BoostError::ColumnMismatch {
                expected: self.n_features,
                got: x[0].len(),
            });
        }
        let mut preds = vec![self.base_score; y.len()];
        let mse = |preds: &[f64]| {
            preds
                .iter()
                .zip(y)
                .map(|(p, t)| (p - t) * (p - t))
                .sum::<f64>()
                / y.len() as f64
        };
        let mut out = Vec::with_capacity(self.trees.len() + 1);
        out.push(mse(&preds));
        for tree in &self.trees {
            for (i, row) in x.iter().enumerate() {
                preds[i] += self.params.eta * tree.value(row);
            }
            out.push(mse(&preds));
        }
        Ok(out)
    }
}

fn check_design(x: &[Vec<f64>], y: &[f64]) -> Result<(), BoostError> {
    if x.is_empty() || y.is_empty() {
        return Err(BoostError::EmptyDesign);
    }
    if x.len() != y.len() {
        return Err(BoostError::ShapeMismatch(x.len(), y.len()));
    }
    let width = x[0].len();
    if x.iter().any(|row| row.len() != width) {
        return Err(BoostError::ShapeMismatch(x.len(), y.len()));
    }
    Ok(())
}

/// Fit an ensemble of `params.n_rounds` trees to `(x, y)`. Missing predictor
/// values are NaN; `y` must be fully observed.
pub fn train(x: &[Vec<f64>], y: &[f64], params: &TrainParams) -> Result<BoostedModel, BoostError> {
    params.validate()?;
    check_design(x, y)?;
    let n = y.len();
    let n_features = x[0].len();
    let base_score = y.iter().sum::<f64>() / n as f64;
    let rows: Vec<usize> = (0..n).collect();

    let mut preds = vec![base_score; n];
    let mut grad = vec![0.0; n];
    let hess = vec![1.0; n];
    let mut trees = Vec::with_capacity(params.n_rounds);
    for _ in 0..params.n_rounds {
        for i in 0..n {
            let (g, _) = grad_hess(y[i], preds[i]);
            grad[i] = g;
        }
        let tree = build_tree(x, &grad, &hess, &rows, n_features, params);
        for (i, row) in x.iter().enumerate() {
            preds[i] += params.eta * tree.value(row);
        }
        trees.push(tree);
    }
    Ok(BoostedModel {
        base_score,
        n_features,
        params: *params,
        trees,
    })
}

/// Regularized objective of a fitted model on a dataset:
/// sum of 1/2 (y - y_hat)^2 plus, per tree, gamma * n_leaves +
/// 1/2 * lambda * sum of squared leaf weights. `params` supplies the
/// penalty coefficients so a model can be measured under any setting.
pub fn objective_value(
    model: &BoostedModel,
    x: &[Vec<f64>],
    y: &[f64],
    params: &TrainParams,
) -> Result<f64, BoostError> {
    check_design(x, y)?;
    let mut loss = 0.0;
    for (row, &t) in x.iter().zip(y) {
        let p = model.predict(row)?;
        loss += 0.5 * (t - p) * (t - p);
    }
    let mut penalty = 0.0;
    for tree in &model.trees {
        penalty += params.gamma * tree.n_leaves() as f64
            + 0.5 * params.lambda * tree.sum_squared_weights();
    }
    Ok(loss + penalty)
}
