//! RankBoost with threshold weak learners in both orientations.

use serde::{Deserialize, Serialize};

use super::{mean_ndcg10, QueryGroup, N_FEATURES};

const EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    /// Fires for `x <= threshold` instead of `x > threshold`.
    pub negative: bool,
    pub alpha: f64,
}

impl Stump {
    fn fires(&self, x: &[f64; N_FEATURES]) -> bool {
        (x[self.feature] > self.threshold) != self.negative
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankBoostModel {
    pub stumps: Vec<Stump>,
}

impl RankBoostModel {
    pub fn score(&self, x: &[f64; N_FEATURES]) -> f64 {
        self.stumps
            .iter()
            .filter(|s| s.fires(x))
            .map(|s| s.alpha)
            .sum()
    }
}

fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

struct Doc {
    query: usize,
    relevant: bool,
    x: [f64; N_FEATURES],
}

/// Each query's pairs carry equal total initial weight; the pair
/// distribution is kept in factored log form.
pub(crate) fn fit(train: &[&QueryGroup], validation: &[&QueryGroup], rounds: usize) -> RankBoostModel {
    let mut docs = Vec::new();
    let mut log_d1 = Vec::new();
    let mut q = 0;
    for g in train {
        let r = g.n_relevant();
        if r == 0 || r == g.len() {
            continue;
        }
        log_d1.push(-(((r * (g.len() - r)) as f64).ln()));
        for (x, &l) in g.features.iter().zip(&g.labels) {
            docs.push(Doc { query: q, relevant: l, x: *x });
        }
        q += 1;
    }
    let n_queries = q;
    let order: Vec<Vec<usize>> = (0..N_FEATURES)
        .map(|f| {
            let mut idx: Vec<usize> = (0..docs.len()).collect();
            idx.sort_by(|&a, &b| docs[b].x[f].total_cmp(&docs[a].x[f]).then(a.cmp(&b)));
            idx
        })
        .collect();

    let mut score = vec![0.0; docs.len()];
    let mut val_scores: Vec<Vec<f64>> = validation.iter().map(|g| vec![0.0; g.len()]).collect();
    let mut stumps = Vec::new();
    let mut best = (f64::NEG_INFINITY, 0usize);
    let mut pi = vec![0.0; docs.len()];

    for _ in 0..rounds {
        if n_queries == 0 {
            break;
        }
        // log-sum of relevant exp(-F) and non-relevant exp(F) per query
        let mut a = vec![Vec::new(); n_queries];
        let mut b = vec![Vec::new(); n_queries];
        for (d, s) in docs.iter().zip(&score) {
            if d.relevant {
                a[d.query].push(-s);
            } else {
                b[d.query].push(*s);
            }
        }
        let la: Vec<f64> = a.into_iter().map(|v| log_sum_exp(v.into_iter())).collect();
        let lb: Vec<f64> = b.into_iter().map(|v| log_sum_exp(v.into_iter())).collect();
        let log_z = log_sum_exp((0..n_queries).map(|q| log_d1[q] + la[q] + lb[q]));
        for (i, d) in docs.iter().enumerate() {
            let q = d.query;
            pi[i] = if d.relevant {
                (log_d1[q] - score[i] + lb[q] - log_z).exp()
            } else {
                -(log_d1[q] + score[i] + la[q] - log_z).exp()
            };
        }

        let mut pick: Option<(usize, f64, f64)> = None;
        for (f, idx) in order.iter().enumerate() {
            let mut cum = 0.0;
            for k in 0..idx.len() - 1 {
                cum += pi[idx[k]];
                let hi = docs[idx[k]].x[f];
                let lo = docs[idx[k + 1]].x[f];
                if hi == lo {
                    continue;
                }
                if pick.is_none_or(|(_, _, r)| cum.abs() > r.abs()) {
                    let mut t = lo + (hi - lo) / 2.0;
                    if t >= hi {
                        t = lo;
                    }
                    pick = Some((f, t, cum));
                }
            }
        }
        let Some((feature, threshold, r)) = pick else { break };
        if r.abs() <= EPS {
            break;
        }
        let r_abs = r.abs().min(1.0);
        let stump = Stump {
            feature,
            threshold,
            negative: r < 0.0,
            alpha: 0.5 * ((1.0 + r_abs + EPS) / (1.0 - r_abs + EPS)).ln(),
        };
        for (s, d) in score.iter_mut().zip(&docs) {
            if stump.fires(&d.x) {
                *s += stump.alpha;
            }
        }
        stumps.push(stump);
        if !validation.is_empty() {
            for (s, g) in val_scores.iter_mut().zip(validation) {
                for (v, x) in s.iter_mut().zip(&g.features) {
                    if stump.fires(x) {
                        *v += stump.alpha;
                    }
                }
            }
            let v = mean_ndcg10(validation, &val_scores);
            if v > best.0 {
                best = (v, stumps.len());
            }
        }
    }
    if !validation.is_empty() && best.1 > 0 {
        stumps.truncate(best.1);
    }
    RankBoostModel { stumps }
}
