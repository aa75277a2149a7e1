//! Click-derived relevance, three learning-to-rank algorithms, the
//! intent-aware mixture and cross-validated evaluation.

pub mod adarank;
pub mod lambdamart;
pub mod metrics;
pub mod rankboost;
pub mod trec;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boosting::{BoostParams, TreeEnsemble};
use crate::error::{Error, Result};
use crate::session_log::Session;
use crate::taxonomy::{IntentLabel, LabelValue};
use crate::text::{content_features, Bm25Params, Corpus, Tokenizer};
use metrics::{evaluate, ndcg_at, rank_order, Qrels, RankingMetrics, Run};

pub const N_FEATURES: usize = 5;
pub const FEATURE_NAMES: [&str; N_FEATURES] = crate::text::ContentFeatures::<f64>::NAMES;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingInstance {
    pub query_id: String,
    pub doc_id: String,
    pub features: [f64; N_FEATURES],
    pub relevance: u8,
    pub intent: IntentLabel,
    /// Cross-validation unit; the query id stands in when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_id: Option<String>,
}

/// All documents of one query.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryGroup {
    pub query_id: String,
    pub unit: String,
    pub intent: IntentLabel,
    pub doc_ids: Vec<String>,
    pub features: Vec<[f64; N_FEATURES]>,
    pub labels: Vec<bool>,
}

impl QueryGroup {
    pub fn len(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_ids.is_empty()
    }

    pub fn n_relevant(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    /// Relevance labels in ranked order for the given scores.
    pub fn ranked_labels(&self, scores: &[f64]) -> Vec<bool> {
        rank_order(scores, &self.doc_ids)
            .into_iter()
            .map(|i| self.labels[i])
            .collect()
    }

    pub fn ndcg(&self, scores: &[f64], k: usize) -> f64 {
        ndcg_at(&self.ranked_labels(scores), self.n_relevant(), k)
    }
}

/// Groups instances by query id (in id order), validating ids and labels.
pub fn group_instances(instances: &[RankingInstance]) -> Result<Vec<QueryGroup>> {
    let mut groups: BTreeMap<&str, QueryGroup> = BTreeMap::new();
    let mut seen: BTreeSet<(&str, &str)> = BTreeSet::new();
    for inst in instances {
        if inst.relevance > 1 {
            return Err(Error::validation(format!(
                "{}/{}: relevance must be 0 or 1",
                inst.query_id, inst.doc_id
            )));
        }
        if inst.features.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation(format!(
                "{}/{}: non-finite feature",
                inst.query_id, inst.doc_id
            )));
        }
        if !seen.insert((&inst.query_id, &inst.doc_id)) {
            return Err(Error::validation(format!(
                "duplicate pair {}/{}",
                inst.query_id, inst.doc_id
            )));
        }
        let g = groups.entry(&inst.query_id).or_insert_with(|| QueryGroup {
            query_id: inst.query_id.clone(),
            unit: inst.session_id.clone().unwrap_or_else(|| inst.query_id.clone()),
            intent: inst.intent,
            doc_ids: Vec::new(),
            features: Vec::new(),
            labels: Vec::new(),
        });
        if g.intent != inst.intent {
            return Err(Error::validation(format!(
                "query {} carries more than one intent",
                inst.query_id
            )));
        }
        g.doc_ids.push(inst.doc_id.clone());
        g.features.push(inst.features);
        g.labels.push(inst.relevance == 1);
    }
    Ok(groups.into_values().collect())
}

pub fn qrels_of<'a>(groups: impl IntoIterator<Item = &'a QueryGroup>) -> Qrels {
    groups
        .into_iter()
        .map(|g| {
            let rel = g
                .doc_ids
                .iter()
                .zip(&g.labels)
                .filter(|(_, &l)| l)
                .map(|(d, _)| d.clone())
                .collect();
            (g.query_id.clone(), rel)
        })
        .collect()
}

/// Mean NDCG@10 of per-group scores.
pub(crate) fn mean_ndcg10(groups: &[&QueryGroup], scores: &[Vec<f64>]) -> f64 {
    if groups.is_empty() {
        return 0.0;
    }
    groups
        .iter()
        .zip(scores)
        .map(|(g, s)| g.ndcg(s, 10))
        .sum::<f64>()
        / groups.len() as f64
}

/// Relevance from clicks: clicked results are relevant, the other shown
/// results are not. Queries without a resolvable click are dropped, as are
/// sessions whose intent is not one of the four studied intents.
pub fn labels_from_clicks(
    sessions: &[Session],
    corpus: &Corpus,
    tokenizer: &Tokenizer,
    bm25: &Bm25Params,
) -> Result<Vec<RankingInstance>> {
    let mut out = Vec::new();
    for s in sessions {
        let Some(intent) = s.intent.and_then(LabelValue::intent) else {
            continue;
        };
        if !IntentLabel::STUDIED.contains(&intent) {
            continue;
        }
        for (k, q) in s.queries.iter().enumerate() {
            let mut docs: Vec<&str> = Vec::new();
            for d in &q.results {
                if !docs.contains(&d.as_str()) {
                    docs.push(d);
                }
            }
            let clicked: BTreeSet<&str> = q
                .clicks
                .iter()
                .filter_map(|c| q.results.get(c.rank as usize - 1).map(String::as_str))
                .collect();
            if clicked.is_empty() {
                continue;
            }
            let terms = tokenizer.tokenize(&q.query_text);
            if terms.is_empty() {
                continue;
            }
            let query_id = format!("{}#{k}", s.session_id);
            for d in docs {
                let f = content_features::<f64>(&terms, d, corpus, bm25)?;
                out.push(RankingInstance {
                    query_id: query_id.clone(),
                    doc_id: d.to_string(),
                    features: f.to_array(),
                    relevance: clicked.contains(d) as u8,
                    intent,
                    session_id: Some(s.session_id.clone()),
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    AdaRank,
    RankBoost,
    LambdaMart,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::AdaRank, Algorithm::RankBoost, Algorithm::LambdaMart];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::AdaRank => "AdaRank",
            Algorithm::RankBoost => "RankBoost",
            Algorithm::LambdaMart => "LambdaMART",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adarank" => Ok(Algorithm::AdaRank),
            "rankboost" => Ok(Algorithm::RankBoost),
            "lambdamart" => Ok(Algorithm::LambdaMart),
            other => Err(Error::validation(format!("unknown algorithm {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub adarank_rounds: usize,
    pub rankboost_rounds: usize,
    pub boost: BoostParams,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            adarank_rounds: 100,
            rankboost_rounds: 300,
            boost: BoostParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", content = "model", rename_all = "snake_case")]
pub enum Ranker {
    AdaRank(adarank::AdaRankModel),
    RankBoost(rankboost::RankBoostModel),
    LambdaMart(TreeEnsemble),
}

impl Ranker {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            Ranker::AdaRank(_) => Algorithm::AdaRank,
            Ranker::RankBoost(_) => Algorithm::RankBoost,
            Ranker::LambdaMart(_) => Algorithm::LambdaMart,
        }
    }

    pub fn score(&self, x: &[f64; N_FEATURES]) -> Result<f64> {
        match self {
            Ranker::AdaRank(m) => Ok(m.score(x)),
            Ranker::RankBoost(m) => Ok(m.score(x)),
            Ranker::LambdaMart(m) => m.predict_row(x),
        }
    }

    pub fn score_group(&self, g: &QueryGroup) -> Result<Vec<f64>> {
        g.features.iter().map(|x| self.score(x)).collect()
    }
}

/// Trains one ranker. With a non-empty `validation` set the number of
/// rounds is chosen by validation NDCG@10.
pub fn train(
    algorithm: Algorithm,
    train: &[&QueryGroup],
    validation: &[&QueryGroup],
    params: &TrainParams,
) -> Result<Ranker> {
    if train.len() < 2 {
        return Err(Error::validation("training needs at least two query groups"));
    }
    let labels = || train.iter().flat_map(|g| g.labels.iter().copied());
    if !labels().any(|l| l) || labels().all(|l| l) {
        return Err(Error::validation(
            "training needs both relevant and non-relevant documents",
        ));
    }
    Ok(match algorithm {
        Algorithm::AdaRank => Ranker::AdaRank(adarank::fit(train, validation, params.adarank_rounds)),
        Algorithm::RankBoost => {
            Ranker::RankBoost(rankboost::fit(train, validation, params.rankboost_rounds))
        }
        Algorithm::LambdaMart => {
            Ranker::LambdaMart(lambdamart::fit(train, validation, &params.boost)?)
        }
    })
}

/// Per-intent sub-rankers combined by `P(r|q) = sum_i P(i|q) P(r|q,i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentAwareRanker {
    pub rankers: BTreeMap<IntentLabel, Ranker>,
}

impl IntentAwareRanker {
    /// Every intent served by the same model.
    pub fn shared(ranker: Ranker, intents: &[IntentLabel]) -> Self {
        IntentAwareRanker {
            rankers: intents.iter().map(|&i| (i, ranker.clone())).collect(),
        }
    }

    /// Score under a hard intent indicator.
    pub fn score(&self, intent: IntentLabel, x: &[f64; N_FEATURES]) -> Result<f64> {
        self.rankers
            .get(&intent)
            .ok_or(Error::UnsupportedIntent(intent))?
            .score(x)
    }

    /// Score under a soft intent distribution.
    pub fn score_mixture(&self, weights: &[(IntentLabel, f64)], x: &[f64; N_FEATURES]) -> Result<f64> {
        let mut total = 0.0;
        for &(intent, p) in weights {
            if p != 0.0 {
                total += p * self.score(intent, x)?;
            }
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntentMode {
    Agnostic,
    /// One sub-ranker trained per intent.
    Aware,
    /// The agnostic model installed as every intent's sub-ranker.
    AwareShared,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub val_fraction: f64,
    pub seed: u64,
    pub params: TrainParams,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 5,
            val_fraction: 0.1,
            seed: 0,
            params: TrainParams::default(),
        }
    }
}

/// Fold per group; groups sharing a unit share a fold, and units are dealt
/// round-robin within each intent after a seeded shuffle.
pub fn assign_folds(groups: &[QueryGroup], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::validation("at least two folds are required"));
    }
    let mut units: BTreeMap<IntentLabel, BTreeSet<&str>> = BTreeMap::new();
    for g in groups {
        units.entry(g.intent).or_default().insert(&g.unit);
    }
    let total: usize = units.values().map(BTreeSet::len).sum();
    if total < k {
        return Err(Error::validation(format!("{total} units cannot fill {k} folds")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of: BTreeMap<&str, usize> = BTreeMap::new();
    let mut next = 0;
    for list in units.values() {
        let mut order: Vec<&str> = list.iter().copied().collect();
        order.shuffle(&mut rng);
        for u in order {
            fold_of.entry(u).or_insert_with(|| {
                next += 1;
                (next - 1) % k
            });
        }
    }
    Ok(groups.iter().map(|g| fold_of[g.unit.as_str()]).collect())
}

/// Splits training group indices into (train, validation), holding out
/// about `fraction` of each intent's units.
fn validation_split(
    groups: &[QueryGroup],
    train_idx: &[usize],
    fraction: f64,
    seed: u64,
) -> (Vec<usize>, Vec<usize>) {
    if fraction <= 0.0 {
        return (train_idx.to_vec(), Vec::new());
    }
    let mut units: BTreeMap<IntentLabel, BTreeSet<&str>> = BTreeMap::new();
    for &i in train_idx {
        units.entry(groups[i].intent).or_default().insert(&groups[i].unit);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut held: BTreeSet<&str> = BTreeSet::new();
    for list in units.values() {
        if list.len() < 2 {
            continue;
        }
        let mut order: Vec<&str> = list.iter().copied().collect();
        order.shuffle(&mut rng);
        let n = ((fraction * order.len() as f64).round() as usize).clamp(1, order.len() - 1);
        held.extend(&order[..n]);
    }
    train_idx
        .iter()
        .partition(|&&i| !held.contains(groups[i].unit.as_str()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub algorithm: Algorithm,
    pub mode: IntentMode,
    /// Mean of the per-fold metrics.
    pub metrics: RankingMetrics<f64>,
    pub fold_metrics: Vec<RankingMetrics<f64>>,
    /// Test-fold scores of every query.
    pub run: Run<f64>,
}

fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(fold as u64 + 1))
}

fn run_fold(
    groups: &[QueryGroup],
    fold_of: &[usize],
    fold: usize,
    algorithm: Algorithm,
    mode: IntentMode,
    config: &CvConfig,
) -> Result<Run<f64>> {
    let test: Vec<&QueryGroup> = groups
        .iter()
        .zip(fold_of)
        .filter(|(_, &f)| f == fold)
        .map(|(g, _)| g)
        .collect();
    let train_all: Vec<usize> = (0..groups.len()).filter(|&i| fold_of[i] != fold).collect();
    let (tr, va) = validation_split(groups, &train_all, config.val_fraction, fold_seed(config.seed, fold));
    let pick = |idx: &[usize], intent: Option<IntentLabel>| -> Vec<&QueryGroup> {
        idx.iter()
            .map(|&i| &groups[i])
            .filter(|g| intent.is_none_or(|x| g.intent == x))
            .collect()
    };
    let params = TrainParams {
        boost: BoostParams {
            seed: fold_seed(config.seed, fold),
            ..config.params.boost
        },
        ..config.params
    };
    let scorer: Box<dyn Fn(&QueryGroup) -> Result<Vec<f64>> + Sync> = match mode {
        IntentMode::Agnostic => {
            let r = train(algorithm, &pick(&tr, None), &pick(&va, None), &params)?;
            Box::new(move |g| r.score_group(g))
        }
        IntentMode::AwareShared => {
            let r = train(algorithm, &pick(&tr, None), &pick(&va, None), &params)?;
            let intents: BTreeSet<IntentLabel> = groups.iter().map(|g| g.intent).collect();
            let iar = IntentAwareRanker::shared(r, &intents.into_iter().collect::<Vec<_>>());
            Box::new(move |g| g.features.iter().map(|x| iar.score(g.intent, x)).collect())
        }
        IntentMode::Aware => {
            let intents: BTreeSet<IntentLabel> = groups.iter().map(|g| g.intent).collect();
            let trained: Vec<(IntentLabel, Ranker)> = intents
                .into_par_iter()
                .map(|i| {
                    let t = pick(&tr, Some(i));
                    if t.is_empty() {
                        return Err(Error::validation(format!(
                            "intent {} absent from training fold {fold}",
                            i.code()
                        )));
                    }
                    Ok((i, train(algorithm, &t, &pick(&va, Some(i)), &params)?))
                })
                .collect::<Result<_>>()?;
            let iar = IntentAwareRanker {
                rankers: trained.into_iter().collect(),
            };
            Box::new(move |g| g.features.iter().map(|x| iar.score(g.intent, x)).collect())
        }
    };
    let mut run = Run::new();
    for g in test {
        let scores = scorer(g)?;
        run.insert(
            g.query_id.clone(),
            g.doc_ids.iter().cloned().zip(scores).collect(),
        );
    }
    Ok(run)
}

pub fn cross_validate(
    groups: &[QueryGroup],
    algorithm: Algorithm,
    mode: IntentMode,
    config: &CvConfig,
) -> Result<CvOutcome> {
    if !(0.0..1.0).contains(&config.val_fraction) {
        return Err(Error::validation("val_fraction must lie in [0, 1)"));
    }
    let fold_of = assign_folds(groups, config.folds, config.seed)?;
    let runs: Vec<Run<f64>> = (0..config.folds)
        .into_par_iter()
        .map(|f| run_fold(groups, &fold_of, f, algorithm, mode, config))
        .collect::<Result<_>>()?;
    let qrels = qrels_of(groups);
    let fold_metrics = runs
        .iter()
        .map(|r| evaluate(r, &qrels))
        .collect::<Result<Vec<_>>>()?;
    let run = runs.into_iter().flatten().collect();
    Ok(CvOutcome {
        algorithm,
        mode,
        metrics: RankingMetrics::mean(&fold_metrics),
        fold_metrics,
        run,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub algorithm: Algorithm,
    pub base: RankingMetrics<f64>,
    pub aware: RankingMetrics<f64>,
    /// Relative improvement of aware over base, in percent.
    pub improvement: [f64; 4],
}

/// Percent change of each metric, 0 where the base is 0.
pub fn relative_improvement(base: &RankingMetrics<f64>, aware: &RankingMetrics<f64>) -> [f64; 4] {
    let (b, w) = (base.to_array(), aware.to_array());
    std::array::from_fn(|i| {
        if b[i] == 0.0 {
            0.0
        } else {
            100.0 * (w[i] - b[i]) / b[i]
        }
    })
}

/// Agnostic against intent-aware models on identical folds.
pub fn compare_intent_modes(
    groups: &[QueryGroup],
    algorithms: &[Algorithm],
    aware_mode: IntentMode,
    config: &CvConfig,
) -> Result<Vec<ComparisonRow>> {
    algorithms
        .iter()
        .map(|&a| {
            let base = cross_validate(groups, a, IntentMode::Agnostic, config)?.metrics;
            let aware = cross_validate(groups, a, aware_mode, config)?.metrics;
            Ok(ComparisonRow {
                algorithm: a,
                base,
                aware,
                improvement: relative_improvement(&base, &aware),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    pub(crate) fn perfect_groups(n: usize, seed: u64, feature: usize, sign: f64) -> Vec<QueryGroup> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|q| {
                let mut features = Vec::new();
                let mut labels = Vec::new();
                for d in 0..10 {
                    let rel = d < 3;
                    let mut x: [f64; 5] = std::array::from_fn(|_| rng.random::<f64>());
                    let offset = q as f64 * 0.01;
                    x[feature] = sign * (if rel { 1.0 } else { 0.0 } + offset + 0.5 * rng.random::<f64>());
                    features.push(x);
                    labels.push(rel);
                }
                QueryGroup {
                    query_id: format!("q{q:03}"),
                    unit: format!("s{q:03}"),
                    intent: IntentLabel::STUDIED[q % 4],
                    doc_ids: (0..10).map(|d| format!("d{d:02}")).collect(),
                    features,
                    labels,
                }
            })
            .collect()
    }

    fn train_ndcg(r: &Ranker, groups: &[QueryGroup]) -> f64 {
        let refs: Vec<&QueryGroup> = groups.iter().collect();
        let scores: Vec<Vec<f64>> = groups.iter().map(|g| r.score_group(g).unwrap()).collect();
        mean_ndcg10(&refs, &scores)
    }

    #[test]
    fn perfect_feature_is_found_by_all_algorithms() {
        let groups = perfect_groups(40, 1, 3, 1.0);
        let refs: Vec<&QueryGroup> = groups.iter().collect();
        let params = TrainParams {
            boost: BoostParams { n_trees: 50, ..BoostParams::default() },
            ..TrainParams::default()
        };
        for a in Algorithm::ALL {
            let r = train(a, &refs, &[], &params).unwrap();
            assert_eq!(train_ndcg(&r, &groups), 1.0, "{}", a.name());
        }
    }

    #[test]
    fn rankboost_finds_negative_orientation() {
        let groups = perfect_groups(40, 2, 0, -1.0);
        let refs: Vec<&QueryGroup> = groups.iter().collect();
        let r = train(Algorithm::RankBoost, &refs, &[], &TrainParams::default()).unwrap();
        assert_eq!(train_ndcg(&r, &groups), 1.0);
        let Ranker::RankBoost(m) = &r else { unreachable!() };
        assert!(m.stumps[0].negative && m.stumps[0].feature == 0);
    }

    #[test]
    fn hard_indicator_and_mixture() {
        let groups = perfect_groups(20, 3, 1, 1.0);
        let refs: Vec<&QueryGroup> = groups.iter().collect();
        let a = train(Algorithm::AdaRank, &refs, &[], &TrainParams::default()).unwrap();
        let b = train(Algorithm::RankBoost, &refs, &[], &TrainParams::default()).unwrap();
        let iar = IntentAwareRanker {
            rankers: [(IntentLabel::Penalty, a.clone()), (IntentLabel::Procedure, b.clone())].into(),
        };
        let x = [0.1, 0.7, 0.3, 0.2, 0.9];
        assert_eq!(iar.score(IntentLabel::Penalty, &x).unwrap(), a.score(&x).unwrap());
        let mix = iar
            .score_mixture(&[(IntentLabel::Penalty, 0.5), (IntentLabel::Procedure, 0.5)], &x)
            .unwrap();
        assert!((mix - 0.5 * (a.score(&x).unwrap() + b.score(&x).unwrap())).abs() < 1e-12);
        assert!(matches!(
            iar.score(IntentLabel::Characterization, &x),
            Err(Error::UnsupportedIntent(IntentLabel::Characterization))
        ));
        let shared = IntentAwareRanker::shared(a.clone(), &IntentLabel::STUDIED);
        for i in IntentLabel::STUDIED {
            assert_eq!(shared.score(i, &x).unwrap(), a.score(&x).unwrap());
        }
    }

    #[test]
    fn single_group_top_positive() {
        let g = QueryGroup {
            query_id: "q".into(),
            unit: "q".into(),
            intent: IntentLabel::Penalty,
            doc_ids: vec!["a".into(), "b".into(), "c".into()],
            features: vec![[0.0; 5]; 3],
            labels: vec![false, true, false],
        };
        assert_eq!(g.ndcg(&[0.1, 0.9, 0.2], 5), 1.0);
    }

    #[test]
    fn folds_partition_groups() {
        let groups = perfect_groups(50, 4, 0, 1.0);
        let folds = assign_folds(&groups, 5, 7).unwrap();
        let mut counts = [0usize; 5];
        for &f in &folds {
            counts[f] += 1;
        }
        assert_eq!(counts, [10; 5]);
        // each intent spread evenly
        for i in IntentLabel::STUDIED {
            let per: BTreeSet<usize> = groups.iter().zip(&folds).filter(|(g, _)| g.intent == i).map(|(_, &f)| f).collect();
            assert_eq!(per.len(), 5);
        }
    }

    #[test]
    fn validation_split_holds_out_per_intent() {
        let groups = perfect_groups(40, 5, 0, 1.0);
        let idx: Vec<usize> = (0..40).collect();
        let (tr, va) = validation_split(&groups, &idx, 0.1, 3);
        assert_eq!(tr.len() + va.len(), 40);
        assert_eq!(va.len(), 4);
        let intents: BTreeSet<IntentLabel> = va.iter().map(|&i| groups[i].intent).collect();
        assert_eq!(intents.len(), 4);
    }

    #[test]
    fn group_validation() {
        let inst = RankingInstance {
            query_id: "q".into(),
            doc_id: "d".into(),
            features: [0.0; 5],
            relevance: 1,
            intent: IntentLabel::Penalty,
            session_id: None,
        };
        assert!(group_instances(&[inst.clone(), inst.clone()]).is_err());
        let mut other = inst.clone();
        other.doc_id = "e".into();
        other.intent = IntentLabel::Procedure;
        assert!(group_instances(&[inst.clone(), other]).is_err());
        let g = group_instances(&[inst]).unwrap();
        assert_eq!(g[0].unit, "q");
    }
}
