//! AdaRank: boosting over single-feature rankers, weighted by NDCG@10.

use serde::{Deserialize, Serialize};

use super::{mean_ndcg10, QueryGroup, N_FEATURES};

const EPS: f64 = 1e-10;

/// Rounds stop once the best weak ranker's weighted NDCG@10 falls to this.
pub const MIN_WEAK_PERFORMANCE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaRankModel {
    /// `(feature, weight)` per round.
    pub rounds: Vec<(usize, f64)>,
}

impl AdaRankModel {
    pub fn score(&self, x: &[f64; N_FEATURES]) -> f64 {
        self.rounds.iter().map(|&(f, a)| a * x[f]).sum()
    }
}

pub(crate) fn fit(train: &[&QueryGroup], validation: &[&QueryGroup], max_rounds: usize) -> AdaRankModel {
    let m = train.len();
    let weak: Vec<[f64; N_FEATURES]> = train
        .iter()
        .map(|g| {
            std::array::from_fn(|f| {
                let s: Vec<f64> = g.features.iter().map(|x| x[f]).collect();
                g.ndcg(&s, 10)
            })
        })
        .collect();
    let mut p = vec![1.0 / m as f64; m];
    let mut combined: Vec<Vec<f64>> = train.iter().map(|g| vec![0.0; g.len()]).collect();
    let mut val_scores: Vec<Vec<f64>> = validation.iter().map(|g| vec![0.0; g.len()]).collect();
    let mut rounds = Vec::new();
    let mut best = (f64::NEG_INFINITY, 0usize);

    for _ in 0..max_rounds {
        let perf = |f: usize| (0..m).map(|i| p[i] * weak[i][f]).sum::<f64>();
        let mut k = 0;
        for f in 1..N_FEATURES {
            if perf(f) > perf(k) {
                k = f;
            }
        }
        if perf(k) <= MIN_WEAK_PERFORMANCE {
            break;
        }
        let num: f64 = (0..m).map(|i| p[i] * (1.0 + weak[i][k])).sum();
        let den: f64 = (0..m).map(|i| p[i] * (1.0 - weak[i][k])).sum();
        let alpha = 0.5 * ((num + EPS) / (den + EPS)).ln();
        rounds.push((k, alpha));

        let mut ndcg = vec![0.0; m];
        for (i, g) in train.iter().enumerate() {
            for (s, x) in combined[i].iter_mut().zip(&g.features) {
                *s += alpha * x[k];
            }
            ndcg[i] = g.ndcg(&combined[i], 10);
        }
        let z: f64 = ndcg.iter().map(|e| (-e).exp()).sum();
        for i in 0..m {
            p[i] = (-ndcg[i]).exp() / z;
        }

        if !validation.is_empty() {
            for (s, g) in val_scores.iter_mut().zip(validation) {
                for (v, x) in s.iter_mut().zip(&g.features) {
                    *v += alpha * x[k];
                }
            }
            let v = mean_ndcg10(validation, &val_scores);
            if v > best.0 {
                best = (v, rounds.len());
            }
        }
        if ndcg.iter().all(|&e| e >= 1.0) {
            break;
        }
    }
    if !validation.is_empty() && best.1 > 0 {
        rounds.truncate(best.1);
    }
    AdaRankModel { rounds }
}
