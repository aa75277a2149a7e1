//! Binary-relevance ranking metrics.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Cutoffs reported alongside MAP.
pub const CUTOFFS: [usize; 3] = [5, 10, 15];

fn discount<F: Real>(position: usize) -> F {
    // position is 0-based; rank = position + 1
    F::one() / F::from_usize_lossy(position + 2).log2()
}

/// DCG of the first `k` entries of a ranked relevance list.
pub fn dcg_at<F: Real>(ranked: &[bool], k: usize) -> F {
    ranked
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, &r)| r)
        .map(|(i, _)| discount::<F>(i))
        .sum()
}

/// DCG of an ideal list holding `n_relevant` relevant documents.
pub fn ideal_dcg_at<F: Real>(n_relevant: usize, k: usize) -> F {
    (0..n_relevant.min(k)).map(discount::<F>).sum()
}

/// NDCG@k with the ideal taken from the total number of relevant documents,
/// which may exceed those retrieved. Zero when nothing is relevant.
pub fn ndcg_at<F: Real>(ranked: &[bool], n_relevant: usize, k: usize) -> F {
    let ideal = ideal_dcg_at::<F>(n_relevant, k);
    if ideal == F::zero() {
        F::zero()
    } else {
        dcg_at::<F>(ranked, k) / ideal
    }
}

/// Average precision over `n_relevant` relevant documents.
pub fn average_precision<F: Real>(ranked: &[bool], n_relevant: usize) -> F {
    if n_relevant == 0 {
        return F::zero();
    }
    let mut hits = 0usize;
    let mut sum = F::zero();
    for (i, &r) in ranked.iter().enumerate() {
        if r {
            hits += 1;
            sum = sum + F::from_usize_lossy(hits) / F::from_usize_lossy(i + 1);
        }
    }
    sum / F::from_usize_lossy(n_relevant)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RankingMetrics<F> {
    pub ndcg5: F,
    pub ndcg10: F,
    pub ndcg15: F,
    pub map: F,
}

impl<F: Real> RankingMetrics<F> {
    pub const NAMES: [&'static str; 4] = ["NDCG@5", "NDCG@10", "NDCG@15", "MAP"];

    pub fn for_query(ranked: &[bool], n_relevant: usize) -> Self {
        RankingMetrics {
            ndcg5: ndcg_at(ranked, n_relevant, 5),
            ndcg10: ndcg_at(ranked, n_relevant, 10),
            ndcg15: ndcg_at(ranked, n_relevant, 15),
            map: average_precision(ranked, n_relevant),
        }
    }

    pub fn to_array(&self) -> [F; 4] {
        [self.ndcg5, self.ndcg10, self.ndcg15, self.map]
    }

    /// Macro average; all zeros for an empty input.
    pub fn mean(items: &[Self]) -> Self {
        if items.is_empty() {
            return RankingMetrics {
                ndcg5: F::zero(),
                ndcg10: F::zero(),
                ndcg15: F::zero(),
                map: F::zero(),
            };
        }
        let n = F::from_usize_lossy(items.len());
        let sum = |f: fn(&Self) -> F| items.iter().map(f).sum::<F>() / n;
        RankingMetrics {
            ndcg5: sum(|m| m.ndcg5),
            ndcg10: sum(|m| m.ndcg10),
            ndcg15: sum(|m| m.ndcg15),
            map: sum(|m| m.map),
        }
    }
}

/// Ranking order: score descending, ties by doc id ascending.
pub fn rank_order<F: Real, S: AsRef<str>>(scores: &[F], doc_ids: &[S]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(Ordering::Equal)
            .then_with(|| doc_ids[a].as_ref().cmp(doc_ids[b].as_ref()))
    });
    idx
}

/// Scored documents per query.
pub type Run<F> = BTreeMap<String, Vec<(String, F)>>;
/// Relevant document ids per query.
pub type Qrels = BTreeMap<String, BTreeSet<String>>;

/// Per-query metrics for every query of the run, in query id order.
pub fn evaluate_per_query<F: Real>(
    run: &Run<F>,
    qrels: &Qrels,
) -> Result<Vec<(String, RankingMetrics<F>)>> {
    let mut out = Vec::with_capacity(run.len());
    for (qid, docs) in run {
        let relevant = qrels
            .get(qid)
            .ok_or_else(|| Error::validation(format!("query {qid} missing from qrels")))?;
        let scores: Vec<F> = docs.iter().map(|(_, s)| *s).collect();
        let ids: Vec<&str> = docs.iter().map(|(d, _)| d.as_str()).collect();
        let ranked: Vec<bool> = rank_order(&scores, &ids)
            .into_iter()
            .map(|i| relevant.contains(ids[i]))
            .collect();
        out.push((qid.clone(), RankingMetrics::for_query(&ranked, relevant.len())));
    }
    Ok(out)
}

pub fn evaluate<F: Real>(run: &Run<F>, qrels: &Qrels) -> Result<RankingMetrics<F>> {
    let per: Vec<RankingMetrics<F>> = evaluate_per_query(run, qrels)?
        .into_iter()
        .map(|(_, m)| m)
        .collect();
    Ok(RankingMetrics::mean(&per))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_examples() {
        let top = [true, false, false];
        assert_eq!(ndcg_at::<f64>(&top, 1, 5), 1.0);
        assert_eq!(average_precision::<f64>(&[false, true], 1), 0.5);
        let two = [true, false, true, false, false];
        assert!((average_precision::<f64>(&two, 2) - 5.0 / 6.0).abs() < 1e-12);
        let expected = 1.5 / (1.0 + 1.0 / 3f64.log2());
        assert!((ndcg_at::<f64>(&two, 2, 5) - expected).abs() < 1e-12);
        assert!((ndcg_at::<f64>(&two, 2, 5) - 0.9197).abs() < 1e-4);
    }

    #[test]
    fn unretrieved_relevant_documents_count() {
        // one relevant retrieved at rank 1, another never retrieved
        assert_eq!(average_precision::<f64>(&[true], 2), 0.5);
        assert!(ndcg_at::<f64>(&[true], 2, 5) < 1.0);
    }

    #[test]
    fn ties_break_by_doc_id() {
        let order = rank_order(&[1.0, 2.0, 1.0], &["b", "c", "a"]);
        assert_eq!(order, vec![1, 2, 0]);
    }

    #[test]
    fn evaluate_requires_qrels() {
        let mut run: Run<f64> = BTreeMap::new();
        run.insert("q1".into(), vec![("d1".into(), 1.0)]);
        assert!(evaluate(&run, &Qrels::new()).is_err());
        let mut qrels = Qrels::new();
        qrels.insert("q1".into(), ["d1".to_string()].into());
        assert_eq!(evaluate(&run, &qrels).unwrap().map, 1.0);
    }

    #[test]
    fn f32_metrics() {
        let m = RankingMetrics::<f32>::for_query(&[false, true], 1);
        assert!((m.map - 0.5).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn bounded_and_ideal(rel in prop::collection::vec(any::<bool>(), 1..25)) {
            let n_rel = rel.iter().filter(|&&r| r).count();
            let m = RankingMetrics::<f64>::for_query(&rel, n_rel);
            for v in m.to_array() {
                prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
            }
            let mut ideal = rel.clone();
            ideal.sort_by(|a, b| b.cmp(a));
            let best = RankingMetrics::<f64>::for_query(&ideal, n_rel);
            if n_rel > 0 {
                prop_assert!((best.ndcg10 - 1.0).abs() < 1e-12);
                prop_assert!((best.map - 1.0).abs() < 1e-12);
            }
            // NDCG@k is 1 exactly when the top-k prefix is ideal
            for k in CUTOFFS {
                let prefix_ideal = rel.iter().take(n_rel.min(k)).all(|&r| r);
                if n_rel > 0 {
                    prop_assert_eq!((ndcg_at::<f64>(&rel, n_rel, k) - 1.0).abs() < 1e-12, prefix_ideal);
                }
            }
        }

        #[test]
        fn monotone_score_transform(scores in prop::collection::vec(-5.0f64..5.0, 1..15), seed in any::<u64>()) {
            let ids: Vec<String> = (0..scores.len()).map(|i| format!("d{i:02}")).collect();
            let rel: Vec<bool> = (0..scores.len()).map(|i| (seed >> (i % 64)) & 1 == 1).collect();
            let transformed: Vec<f64> = scores.iter().map(|s| s.exp() * 3.0 + 1.0).collect();
            let a: Vec<bool> = rank_order(&scores, &ids).into_iter().map(|i| rel[i]).collect();
            let b: Vec<bool> = rank_order(&transformed, &ids).into_iter().map(|i| rel[i]).collect();
            let n = rel.iter().filter(|&&r| r).count();
            prop_assert_eq!(RankingMetrics::<f64>::for_query(&a, n), RankingMetrics::<f64>::for_query(&b, n));
        }
    }
}
