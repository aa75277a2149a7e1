//! LambdaMART: boosted trees on NDCG@10 lambda gradients.

use crate::boosting::{gbdt_fit, BoostParams, FeatureMatrix, GradientSource, Objective, TreeEnsemble};
use crate::error::Result;

use super::metrics::{ideal_dcg_at, rank_order};
use super::{mean_ndcg10, QueryGroup, FEATURE_NAMES};

const CUTOFF: usize = 10;

struct Lambdas<'a> {
    groups: &'a [&'a QueryGroup],
    offsets: Vec<usize>,
    inv_idcg: Vec<f64>,
}

fn discount(position: usize) -> f64 {
    if position < CUTOFF {
        1.0 / ((position + 2) as f64).log2()
    } else {
        0.0
    }
}

impl GradientSource for Lambdas<'_> {
    fn gradients(&mut self, scores: &[f64], grad: &mut [f64], hess: &mut [f64]) {
        grad.fill(0.0);
        hess.fill(0.0);
        for (q, g) in self.groups.iter().enumerate() {
            let off = self.offsets[q];
            let s = &scores[off..off + g.len()];
            let mut pos = vec![0usize; g.len()];
            for (p, i) in rank_order(s, &g.doc_ids).into_iter().enumerate() {
                pos[i] = p;
            }
            for i in (0..g.len()).filter(|&i| g.labels[i]) {
                for j in (0..g.len()).filter(|&j| !g.labels[j]) {
                    let delta = (discount(pos[i]) - discount(pos[j])).abs() * self.inv_idcg[q];
                    if delta == 0.0 {
                        continue;
                    }
                    let rho = 1.0 / (1.0 + (s[i] - s[j]).exp());
                    let lambda = delta * rho;
                    let w = delta * rho * (1.0 - rho);
                    grad[off + i] -= lambda;
                    grad[off + j] += lambda;
                    hess[off + i] += w;
                    hess[off + j] += w;
                }
            }
        }
    }
}

pub(crate) fn fit(
    train: &[&QueryGroup],
    validation: &[&QueryGroup],
    params: &BoostParams,
) -> Result<TreeEnsemble> {
    let mut offsets = Vec::with_capacity(train.len());
    let mut rows = Vec::new();
    for g in train {
        offsets.push(rows.len());
        rows.extend(g.features.iter().map(|x| x.to_vec()));
    }
    let inv_idcg = train
        .iter()
        .map(|g| {
            let ideal = ideal_dcg_at::<f64>(g.n_relevant(), CUTOFF);
            if ideal > 0.0 {
                1.0 / ideal
            } else {
                0.0
            }
        })
        .collect();
    let x = FeatureMatrix::from_rows(&rows)?;
    let mut source = Lambdas {
        groups: train,
        offsets,
        inv_idcg,
    };
    let model = gbdt_fit(
        &x,
        Objective::External {
            source: &mut source,
            base_score: 0.0,
        },
        params,
    )?
    .with_feature_names(&FEATURE_NAMES);
    if validation.is_empty() || model.trees.is_empty() {
        return Ok(model);
    }
    let mut val_scores: Vec<Vec<f64>> = validation.iter().map(|g| vec![model.base_score; g.len()]).collect();
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (t, tree) in model.trees.iter().enumerate() {
        for (s, g) in val_scores.iter_mut().zip(validation) {
            for (v, x) in s.iter_mut().zip(&g.features) {
                *v += model.learning_rate * tree.predict_row(x);
            }
        }
        let v = mean_ndcg10(validation, &val_scores);
        if v > best.0 {
            best = (v, t + 1);
        }
    }
    Ok(model.truncated(best.1))
}
