//! Regression trees and gradient boosting.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Hessians are floored here to keep Newton targets finite.
const MIN_HESSIAN: f64 = 1e-16;

/// Work (rows times features) above which split search runs in parallel.
const PARALLEL_WORK: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub n_trees: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub subsample: f64,
    pub seed: u64,
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams {
            n_trees: 300,
            learning_rate: 0.1,
            max_depth: 6,
            min_samples_leaf: 5,
            subsample: 1.0,
            seed: 0,
        }
    }
}

impl BoostParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::validation("learning_rate must be positive"));
        }
        if self.max_depth == 0 || self.min_samples_leaf == 0 {
            return Err(Error::validation(
                "max_depth and min_samples_leaf must be positive",
            ));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return Err(Error::validation("subsample must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
    },
    /// Rows with `x[feature] < threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    /// Node arena; the root is node 0.
    pub nodes: Vec<Node>,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl RegressionTree {
    pub fn leaf(value: f64) -> Self {
        RegressionTree {
            nodes: vec![Node::Leaf { value }],
            max_depth: 0,
            min_samples_leaf: 1,
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[feature] < threshold { left } else { right },
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }
}

/// Column-major copy of a row matrix with per-feature sort orders.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    n_rows: usize,
    columns: Vec<Vec<f64>>,
    order: Vec<Vec<u32>>,
}

impl FeatureMatrix {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_rows = rows.len();
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        let mut columns = vec![Vec::with_capacity(n_rows); d];
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != d {
                return Err(Error::validation(format!(
                    "row {i} has {} features, expected {d}",
                    r.len()
                )));
            }
            for (j, &v) in r.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::validation(format!("non-finite feature at row {i}, column {j}")));
                }
                columns[j].push(v);
            }
        }
        let order = columns
            .iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..n_rows as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        Ok(FeatureMatrix {
            n_rows,
            columns,
            order,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct SplitCandidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

struct TreeBuilder<'a> {
    x: &'a FeatureMatrix,
    z: &'a [f64],
    w: &'a [f64],
    max_depth: usize,
    min_leaf: usize,
    nodes: Vec<Node>,
    go_left: Vec<bool>,
}

impl TreeBuilder<'_> {
    fn best_split_on(&self, feature: usize, idx: &[u32], total_s: f64, total_w: f64) -> Option<SplitCandidate> {
        let col = &self.x.columns[feature];
        let n = idx.len();
        let parent = total_s * total_s / total_w;
        let (mut s_l, mut w_l) = (0.0, 0.0);
        let mut best: Option<SplitCandidate> = None;
        for k in 0..n - 1 {
            let i = idx[k] as usize;
            s_l += self.w[i] * self.z[i];
            w_l += self.w[i];
            let left_n = k + 1;
            if left_n < self.min_leaf {
                continue;
            }
            if n - left_n < self.min_leaf {
                break;
            }
            let a = col[i];
            let b = col[idx[k + 1] as usize];
            if a == b {
                continue;
            }
            let (s_r, w_r) = (total_s - s_l, total_w - w_l);
            if w_l <= 0.0 || w_r <= 0.0 {
                continue;
            }
            let gain = s_l * s_l / w_l + s_r * s_r / w_r - parent;
            if best.is_none_or(|c| gain > c.gain) {
                let mut threshold = a + (b - a) / 2.0;
                if threshold <= a {
                    threshold = b;
                }
                best = Some(SplitCandidate {
                    feature,
                    threshold,
                    gain,
                });
            }
        }
        best
    }

    /// `sorted[f]` holds the node's rows ordered by feature `f`.
    fn build(&mut self, sorted: Vec<Vec<u32>>, depth: usize) -> usize {
        let rows = &sorted[0];
        let (mut s, mut w, mut scale) = (0.0, 0.0, 0.0);
        for &i in rows {
            let i = i as usize;
            s += self.w[i] * self.z[i];
            w += self.w[i];
            scale += self.w[i] * self.z[i] * self.z[i];
        }
        let value = if w > 0.0 { s / w } else { 0.0 };
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value });
        let n = rows.len();
        if depth >= self.max_depth || n < 2 * self.min_leaf || w <= 0.0 {
            return id;
        }

        let d = sorted.len();
        let candidates: Vec<Option<SplitCandidate>> = if n * d >= PARALLEL_WORK {
            (0..d)
                .into_par_iter()
                .map(|f| self.best_split_on(f, &sorted[f], s, w))
                .collect()
        } else {
            (0..d).map(|f| self.best_split_on(f, &sorted[f], s, w)).collect()
        };
        // Sequential reduction keeps the lowest feature index on ties.
        let mut best: Option<SplitCandidate> = None;
        for c in candidates.into_iter().flatten() {
            if best.is_none_or(|b| c.gain > b.gain) {
                best = Some(c);
            }
        }
        let Some(split) = best.filter(|b| b.gain > 1e-12 * scale.max(f64::MIN_POSITIVE)) else {
            return id;
        };

        let col = &self.x.columns[split.feature];
        for &i in rows {
            self.go_left[i as usize] = col[i as usize] < split.threshold;
        }
        let mut left = Vec::with_capacity(d);
        let mut right = Vec::with_capacity(d);
        for list in sorted {
            let (l, r): (Vec<u32>, Vec<u32>) = list.into_iter().partition(|&i| self.go_left[i as usize]);
            left.push(l);
            right.push(r);
        }
        let left_id = self.build(left, depth + 1);
        let right_id = self.build(right, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: left_id,
            right: right_id,
        };
        id
    }
}

/// Fits one tree to targets `z` with weights `w` on the rows in `subset`
/// (all rows when `None`). Leaves hold weighted target means.
pub fn fit_tree_on(
    x: &FeatureMatrix,
    z: &[f64],
    w: &[f64],
    max_depth: usize,
    min_samples_leaf: usize,
    subset: Option<&[bool]>,
) -> Result<RegressionTree> {
    let n = x.n_rows();
    if z.len() != n || w.len() != n {
        return Err(Error::validation("targets and weights must match the row count"));
    }
    if z.iter().chain(w).any(|v| !v.is_finite()) || w.iter().any(|&v| v < 0.0) {
        return Err(Error::validation("targets must be finite and weights non-negative"));
    }
    if n == 0 {
        return Err(Error::validation("cannot fit a tree on zero rows"));
    }
    let keep = |i: &u32| subset.is_none_or(|m| m[*i as usize]);
    let sorted: Vec<Vec<u32>> = if x.n_features() == 0 {
        vec![(0..n as u32).filter(keep).collect()]
    } else {
        x.order
            .iter()
            .map(|o| o.iter().copied().filter(keep).collect())
            .collect()
    };
    let mut builder = TreeBuilder {
        x,
        z,
        w,
        max_depth,
        min_leaf: min_samples_leaf.max(1),
        nodes: Vec::new(),
        go_left: vec![false; n],
    };
    if x.n_features() == 0 {
        // no split is possible; the builder only computes the leaf
        builder.max_depth = 0;
    }
    builder.build(sorted, 0);
    Ok(RegressionTree {
        nodes: builder.nodes,
        max_depth,
        min_samples_leaf,
    })
}

/// Fits one tree on a row matrix.
pub fn fit_tree<R: AsRef<[f64]>>(
    rows: &[R],
    targets: &[f64],
    weights: &[f64],
    params: &BoostParams,
) -> Result<RegressionTree> {
    params.validate()?;
    let x = FeatureMatrix::from_rows(rows)?;
    fit_tree_on(&x, targets, weights, params.max_depth, params.min_samples_leaf, None)
}

/// Supplies first and second derivatives of a loss at the current scores.
pub trait GradientSource {
    fn gradients(&mut self, scores: &[f64], grad: &mut [f64], hess: &mut [f64]);
}

pub enum Objective<'a> {
    LeastSquares(&'a [f64]),
    /// Labels in {0, 1}.
    Logistic(&'a [f64]),
    External {
        source: &'a mut dyn GradientSource,
        base_score: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    LeastSquares,
    Logistic,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEnsemble {
    pub base_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<RegressionTree>,
    pub n_features: usize,
    pub feature_names: Vec<String>,
    pub loss: LossKind,
    pub params: BoostParams,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    model: TreeEnsemble,
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl TreeEnsemble {
    pub fn predict_row(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.n_features {
            return Err(Error::validation(format!(
                "row has {} features, model expects {}",
                row.len(),
                self.n_features
            )));
        }
        let sum: f64 = self.trees.iter().map(|t| t.predict_row(row)).sum();
        Ok(self.base_score + self.learning_rate * sum)
    }

    pub fn predict<R: AsRef<[f64]>>(&self, rows: &[R]) -> Result<Vec<f64>> {
        rows.iter().map(|r| self.predict_row(r.as_ref())).collect()
    }

    pub fn predict_proba<R: AsRef<[f64]>>(&self, rows: &[R]) -> Result<Vec<f64>> {
        Ok(self.predict(rows)?.into_iter().map(sigmoid).collect())
    }

    /// The ensemble restricted to its first `k` trees.
    pub fn truncated(&self, k: usize) -> TreeEnsemble {
        TreeEnsemble {
            trees: self.trees[..k.min(self.trees.len())].to_vec(),
            ..self.clone()
        }
    }

    pub fn with_feature_names(mut self, names: &[&str]) -> Self {
        self.feature_names = names.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        let found = v.get("format_version").and_then(|f| f.as_u64()).unwrap_or(0) as u32;
        if found != MODEL_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                artifact: "model",
                expected: MODEL_FORMAT_VERSION,
                found,
            });
        }
        let file: ModelFile = serde_json::from_value(v)?;
        Ok(file.model)
    }
}

fn in_sample_mask(n: usize, params: &BoostParams, stage: usize) -> Option<Vec<bool>> {
    if params.subsample >= 1.0 {
        return None;
    }
    let k = ((params.subsample * n as f64).round() as usize).clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(stage as u64);
    let mut mask = vec![false; n];
    for i in sample(&mut rng, n, k) {
        mask[i] = true;
    }
    Some(mask)
}

/// Stagewise boosting; each tree fits Newton targets `-g/h` with weights `h`.
/// For least squares this is the plain residual mean.
pub fn gbdt_fit(x: &FeatureMatrix, objective: Objective<'_>, params: &BoostParams) -> Result<TreeEnsemble> {
    gbdt_fit_with(x, objective, params, |_, _| {})
}

/// As [`gbdt_fit`], calling `on_stage(stage, scores)` after every tree.
pub fn gbdt_fit_with(
    x: &FeatureMatrix,
    mut objective: Objective<'_>,
    params: &BoostParams,
    mut on_stage: impl FnMut(usize, &[f64]),
) -> Result<TreeEnsemble> {
    params.validate()?;
    let n = x.n_rows();
    if n == 0 {
        return Err(Error::validation("no training rows"));
    }
    let (base_score, loss) = match &objective {
        Objective::LeastSquares(y) => {
            check_len(y, n)?;
            (y.iter().sum::<f64>() / n as f64, LossKind::LeastSquares)
        }
        Objective::Logistic(y) => {
            check_len(y, n)?;
            if y.iter().any(|&v| v != 0.0 && v != 1.0) {
                return Err(Error::validation("logistic labels must be 0 or 1"));
            }
            let pos = y.iter().filter(|&&v| v == 1.0).count();
            if pos == 0 || pos == n {
                return Err(Error::validation("logistic loss needs both classes"));
            }
            let rate = pos as f64 / n as f64;
            ((rate / (1.0 - rate)).ln(), LossKind::Logistic)
        }
        Objective::External { base_score, .. } => (*base_score, LossKind::External),
    };

    let mut scores = vec![base_score; n];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut trees = Vec::with_capacity(params.n_trees);
    for stage in 0..params.n_trees {
        match &mut objective {
            Objective::LeastSquares(y) => {
                for i in 0..n {
                    grad[i] = scores[i] - y[i];
                    hess[i] = 1.0;
                }
            }
            Objective::Logistic(y) => {
                for i in 0..n {
                    let p = sigmoid(scores[i]);
                    grad[i] = p - y[i];
                    hess[i] = p * (1.0 - p);
                }
            }
            Objective::External { source, .. } => source.gradients(&scores, &mut grad, &mut hess),
        }
        for i in 0..n {
            let h = hess[i].max(MIN_HESSIAN);
            z[i] = -grad[i] / h;
            w[i] = h;
        }
        let mask = in_sample_mask(n, params, stage);
        let tree = fit_tree_on(x, &z, &w, params.max_depth, params.min_samples_leaf, mask.as_deref())?;
        let mut row = vec![0.0; x.n_features()];
        for (i, s) in scores.iter_mut().enumerate() {
            for (j, c) in x.columns.iter().enumerate() {
                row[j] = c[i];
            }
            *s += params.learning_rate * tree.predict_row(&row);
        }
        trees.push(tree);
        on_stage(stage, &scores);
    }
    Ok(TreeEnsemble {
        base_score,
        learning_rate: params.learning_rate,
        trees,
        n_features: x.n_features(),
        feature_names: Vec::new(),
        loss,
        params: *params,
    })
}

fn check_len(y: &[f64], n: usize) -> Result<()> {
    if y.len() != n {
        return Err(Error::validation(format!("{} labels for {n} rows", y.len())));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("labels must be finite"));
    }
    Ok(())
}
