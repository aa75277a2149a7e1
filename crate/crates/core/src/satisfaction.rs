//! Satisfaction prediction from behavioral features.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::behavior::{p_click_given_hover, reciprocal_rank_stats};
use crate::boosting::{gbdt_fit, BoostParams, FeatureMatrix, Objective};
use crate::error::{Error, Result};
use crate::session_log::{QueryUnit, Session};
use crate::stats::auc;
use crate::taxonomy::{IntentLabel, LabelValue};
use crate::text::Tokenizer;

/// Attempts at drawing folds with both classes on every side.
const MAX_STRATIFY_ATTEMPTS: u64 = 10;

/// The 20 behavioral features, grouped Click (5), Hover (6), Dwell (5),
/// Query (4).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SatFeatures {
    pub num_clicks: f64,
    pub click_through_rate: f64,
    pub max_rr: f64,
    pub min_rr: f64,
    pub mean_rr: f64,

    pub num_hovers: f64,
    pub p_click_given_hover: f64,
    pub avg_skipped_between_hovers: f64,
    pub max_hover_rank: f64,
    pub min_hover_rank: f64,
    pub mean_hover_rank: f64,

    pub serp_dwell: f64,
    pub landing_dwell: f64,
    pub time_to_first_click: f64,
    pub avg_hover_dwell: f64,
    pub avg_click_dwell: f64,

    pub query_length_chars: f64,
    pub num_query_terms: f64,
    pub unique_term_ratio: f64,
    pub num_visited_pages: f64,
}

impl SatFeatures {
    pub const NAMES: [&'static str; 20] = [
        "num_clicks",
        "click_through_rate",
        "max_rr",
        "min_rr",
        "mean_rr",
        "num_hovers",
        "p_click_given_hover",
        "avg_skipped_between_hovers",
        "max_hover_rank",
        "min_hover_rank",
        "mean_hover_rank",
        "serp_dwell",
        "landing_dwell",
        "time_to_first_click",
        "avg_hover_dwell",
        "avg_click_dwell",
        "query_length_chars",
        "num_query_terms",
        "unique_term_ratio",
        "num_visited_pages",
    ];

    pub fn to_array(&self) -> [f64; 20] {
        [
            self.num_clicks,
            self.click_through_rate,
            self.max_rr,
            self.min_rr,
            self.mean_rr,
            self.num_hovers,
            self.p_click_given_hover,
            self.avg_skipped_between_hovers,
            self.max_hover_rank,
            self.min_hover_rank,
            self.mean_hover_rank,
            self.serp_dwell,
            self.landing_dwell,
            self.time_to_first_click,
            self.avg_hover_dwell,
            self.avg_click_dwell,
            self.query_length_chars,
            self.num_query_terms,
            self.unique_term_ratio,
            self.num_visited_pages,
        ]
    }

    pub fn from_array(v: [f64; 20]) -> Self {
        SatFeatures {
            num_clicks: v[0],
            click_through_rate: v[1],
            max_rr: v[2],
            min_rr: v[3],
            mean_rr: v[4],
            num_hovers: v[5],
            p_click_given_hover: v[6],
            avg_skipped_between_hovers: v[7],
            max_hover_rank: v[8],
            min_hover_rank: v[9],
            mean_hover_rank: v[10],
            serp_dwell: v[11],
            landing_dwell: v[12],
            time_to_first_click: v[13],
            avg_hover_dwell: v[14],
            avg_click_dwell: v[15],
            query_length_chars: v[16],
            num_query_terms: v[17],
            unique_term_ratio: v[18],
            num_visited_pages: v[19],
        }
    }
}

/// Which groups had undefined values replaced by 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImputedFlags {
    pub click: bool,
    pub hover: bool,
    pub dwell: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatInstance {
    pub query_id: String,
    /// Cross-validation unit; the query id stands in when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_id: Option<String>,
    pub features: SatFeatures,
    #[serde(default)]
    pub imputed: ImputedFlags,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intent: Option<IntentLabel>,
    /// 1 = satisfied.
    pub label: u8,
}

impl SatInstance {
    fn cv_unit(&self) -> &str {
        self.session_id.as_deref().unwrap_or(&self.query_id)
    }

    pub fn validate(&self) -> Result<()> {
        if self.label > 1 {
            return Err(Error::validation(format!(
                "{}: label must be 0 or 1",
                self.query_id
            )));
        }
        if self.features.to_array().iter().any(|v| !v.is_finite()) {
            return Err(Error::validation(format!(
                "{}: non-finite feature",
                self.query_id
            )));
        }
        Ok(())
    }
}

/// Maps the five-level scale to dissatisfied (1-3) and satisfied (4-5).
pub fn binarize(satisfaction: u8) -> Result<u8> {
    match satisfaction {
        1..=3 => Ok(0),
        4 | 5 => Ok(1),
        other => Err(Error::validation(format!(
            "satisfaction {other} outside 1..=5"
        ))),
    }
}

fn mean(v: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (mut s, mut n) = (0.0, 0usize);
    for x in v {
        s += x;
        n += 1;
    }
    (n > 0).then(|| s / n as f64)
}

/// Mean of `|r[k+1] - r[k]| - 1` over consecutive hovered ranks, floored at 0.
pub fn avg_skipped_between_hovers(ranks_in_time_order: &[u32]) -> f64 {
    mean(ranks_in_time_order.windows(2).map(|w| {
        (w[0].abs_diff(w[1]) as f64 - 1.0).max(0.0)
    }))
    .unwrap_or(0.0)
}

pub fn extract_features(q: &QueryUnit, tokenizer: &Tokenizer) -> (SatFeatures, ImputedFlags) {
    let n_clicks = q.clicks.len();
    let n_hovers = q.hovers.len();
    let ranks: Vec<u32> = q.clicks.iter().map(|c| c.rank).collect();
    let (max_rr, min_rr, mean_rr) = reciprocal_rank_stats(&ranks);
    let impressions = if q.results.is_empty() {
        10 * q.pages_viewed as usize
    } else {
        q.results.len()
    };
    let ctr = if impressions == 0 {
        0.0
    } else {
        (n_clicks as f64 / impressions as f64).min(1.0)
    };

    let hover_ranks: Vec<u32> = q.hovers.iter().map(|h| h.rank).collect();
    let hr = || hover_ranks.iter().map(|&r| r as f64);
    let tokens = tokenizer.tokenize(&q.query_text);
    let unique: BTreeSet<&String> = tokens.iter().collect();

    let features = SatFeatures {
        num_clicks: n_clicks as f64,
        click_through_rate: ctr,
        max_rr,
        min_rr,
        mean_rr,
        num_hovers: n_hovers as f64,
        p_click_given_hover: p_click_given_hover(q).unwrap_or(0.0),
        avg_skipped_between_hovers: avg_skipped_between_hovers(&hover_ranks),
        max_hover_rank: hr().reduce(f64::max).unwrap_or(0.0),
        min_hover_rank: hr().reduce(f64::min).unwrap_or(0.0),
        mean_hover_rank: mean(hr()).unwrap_or(0.0),
        serp_dwell: q.serp_time_seconds,
        landing_dwell: q.total_dwell_seconds(),
        time_to_first_click: q
            .clicks
            .iter()
            .map(|c| c.time)
            .min()
            .map_or(0.0, |t| (t - q.start_time) as f64 / 1000.0),
        avg_hover_dwell: mean(q.hovers.iter().map(|h| h.seconds())).unwrap_or(0.0),
        avg_click_dwell: mean(q.clicks.iter().map(|c| c.dwell_seconds)).unwrap_or(0.0),
        query_length_chars: q.query_text.trim().chars().count() as f64,
        num_query_terms: tokens.len() as f64,
        unique_term_ratio: if tokens.is_empty() {
            0.0
        } else {
            unique.len() as f64 / tokens.len() as f64
        },
        num_visited_pages: q.pages_viewed as f64,
    };
    let flags = ImputedFlags {
        click: n_clicks == 0,
        hover: n_hovers == 0,
        dwell: n_clicks == 0 || n_hovers == 0,
    };
    (features, flags)
}

/// One instance per rated query. Query ids are `<session id>#<position>`.
pub fn instances_from_sessions(sessions: &[Session], tokenizer: &Tokenizer) -> Result<Vec<SatInstance>> {
    let mut out = Vec::new();
    for s in sessions {
        let intent = match s.intent {
            Some(LabelValue::Intent(i)) => Some(i),
            _ => None,
        };
        for (k, q) in s.queries.iter().enumerate() {
            let Some(sat) = q.satisfaction else { continue };
            let (features, imputed) = extract_features(q, tokenizer);
            out.push(SatInstance {
                query_id: format!("{}#{k}", s.session_id),
                session_id: Some(s.session_id.clone()),
                features,
                imputed,
                intent,
                label: binarize(sat)?,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureGroup {
    Click,
    Hover,
    Dwell,
    Query,
    All,
}

impl FeatureGroup {
    pub const ROWS: [FeatureGroup; 5] = [
        FeatureGroup::Click,
        FeatureGroup::Hover,
        FeatureGroup::Dwell,
        FeatureGroup::Query,
        FeatureGroup::All,
    ];

    pub fn label(self) -> &'static str {
        match self {
            FeatureGroup::Click => "Click",
            FeatureGroup::Hover => "Hover",
            FeatureGroup::Dwell => "Dwell",
            FeatureGroup::Query => "Query",
            FeatureGroup::All => "All Features",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "click" => Ok(FeatureGroup::Click),
            "hover" => Ok(FeatureGroup::Hover),
            "dwell" => Ok(FeatureGroup::Dwell),
            "query" => Ok(FeatureGroup::Query),
            "all" => Ok(FeatureGroup::All),
            other => Err(Error::validation(format!("unknown feature group {other}"))),
        }
    }

    /// Model input columns, imputation flags included.
    pub fn columns(self) -> Vec<&'static str> {
        let n = &SatFeatures::NAMES;
        match self {
            FeatureGroup::Click => [&n[0..5], &["click_imputed"]].concat(),
            FeatureGroup::Hover => [&n[5..11], &["hover_imputed"]].concat(),
            FeatureGroup::Dwell => [&n[11..16], &["dwell_imputed"]].concat(),
            FeatureGroup::Query => n[16..20].to_vec(),
            FeatureGroup::All => [
                FeatureGroup::Click,
                FeatureGroup::Hover,
                FeatureGroup::Dwell,
                FeatureGroup::Query,
            ]
            .iter()
            .flat_map(|g| g.columns())
            .collect(),
        }
    }

    pub fn vector(self, inst: &SatInstance) -> Vec<f64> {
        let a = inst.features.to_array();
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        match self {
            FeatureGroup::Click => [&a[0..5], &[flag(inst.imputed.click)]].concat(),
            FeatureGroup::Hover => [&a[5..11], &[flag(inst.imputed.hover)]].concat(),
            FeatureGroup::Dwell => [&a[11..16], &[flag(inst.imputed.dwell)]].concat(),
            FeatureGroup::Query => a[16..20].to_vec(),
            FeatureGroup::All => [
                FeatureGroup::Click,
                FeatureGroup::Hover,
                FeatureGroup::Dwell,
                FeatureGroup::Query,
            ]
            .iter()
            .flat_map(|g| g.vector(inst))
            .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SatMode {
    IntentAgnostic,
    /// Agnostic features plus a one-hot encoding of the annotated intent.
    IntentAware,
    /// Only the instances of one intent.
    PerIntent(IntentLabel),
}

/// Assigns each instance a fold in `0..k`. Whole sessions share a fold;
/// sessions are stratified by their majority label. Redraws until every
/// train and test side holds both classes.
pub fn assign_folds(instances: &[SatInstance], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::validation("at least two folds are required"));
    }
    let mut units: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for inst in instances {
        let e = units.entry(inst.cv_unit()).or_default();
        e.0 += inst.label as usize;
        e.1 += 1;
    }
    if units.len() < k {
        return Err(Error::validation(format!(
            "{} sessions cannot fill {k} folds",
            units.len()
        )));
    }
    let (pos, neg): (Vec<&str>, Vec<&str>) = {
        let (p, n): (Vec<_>, Vec<_>) = units.iter().partition(|(_, (s, n))| 2 * s >= *n);
        (p.into_iter().map(|(u, _)| *u).collect(), n.into_iter().map(|(u, _)| *u).collect())
    };
    for attempt in 0..MAX_STRATIFY_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let mut fold_of: BTreeMap<&str, usize> = BTreeMap::new();
        let mut next = 0;
        for stratum in [&pos, &neg] {
            let mut order = stratum.to_vec();
            order.shuffle(&mut rng);
            for u in order {
                fold_of.insert(u, next % k);
                next += 1;
            }
        }
        let folds: Vec<usize> = instances.iter().map(|i| fold_of[i.cv_unit()]).collect();
        let mut counts = vec![[0usize; 2]; k];
        for (inst, &f) in instances.iter().zip(&folds) {
            counts[f][inst.label as usize] += 1;
        }
        let total = [
            counts.iter().map(|c| c[0]).sum::<usize>(),
            counts.iter().map(|c| c[1]).sum::<usize>(),
        ];
        let ok = counts.iter().all(|c| {
            c[0] > 0 && c[1] > 0 && total[0] - c[0] > 0 && total[1] - c[1] > 0
        });
        if ok {
            return Ok(folds);
        }
    }
    Err(Error::validation(
        "could not draw folds with both classes in every train and test split",
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatResult {
    pub mode: SatMode,
    pub group: FeatureGroup,
    pub n_instances: usize,
    pub fold_aucs: Vec<f64>,
    pub mean_auc: f64,
}

fn design_row(inst: &SatInstance, group: FeatureGroup, one_hot: bool) -> Vec<f64> {
    let mut row = group.vector(inst);
    if one_hot {
        for i in IntentLabel::ALL {
            row.push(if inst.intent == Some(i) { 1.0 } else { 0.0 });
        }
    }
    row
}

pub fn run_experiment(
    instances: &[SatInstance],
    mode: SatMode,
    group: FeatureGroup,
    folds: usize,
    seed: u64,
    params: &BoostParams,
) -> Result<SatResult> {
    for i in instances {
        i.validate()?;
    }
    let selected: Vec<&SatInstance> = match mode {
        SatMode::PerIntent(target) => instances.iter().filter(|i| i.intent == Some(target)).collect(),
        SatMode::IntentAware => {
            if let Some(bad) = instances.iter().find(|i| i.intent.is_none()) {
                return Err(Error::validation(format!(
                    "{}: intent-aware mode needs an intent on every instance",
                    bad.query_id
                )));
            }
            instances.iter().collect()
        }
        SatMode::IntentAgnostic => instances.iter().collect(),
    };
    let owned: Vec<SatInstance> = selected.iter().map(|&i| i.clone()).collect();
    let fold_of = assign_folds(&owned, folds, seed)?;
    let one_hot = mode == SatMode::IntentAware;
    let rows: Vec<Vec<f64>> = owned.iter().map(|i| design_row(i, group, one_hot)).collect();
    let labels: Vec<f64> = owned.iter().map(|i| i.label as f64).collect();

    let fold_aucs = (0..folds)
        .into_par_iter()
        .map(|f| {
            let (mut tr_x, mut tr_y, mut te_x, mut te_y) = (vec![], vec![], vec![], vec![]);
            for (i, &fi) in fold_of.iter().enumerate() {
                if fi == f {
                    te_x.push(rows[i].as_slice());
                    te_y.push(labels[i] == 1.0);
                } else {
                    tr_x.push(rows[i].as_slice());
                    tr_y.push(labels[i]);
                }
            }
            let x = FeatureMatrix::from_rows(&tr_x)?;
            let p = BoostParams {
                seed: params.seed.wrapping_add(f as u64),
                ..*params
            };
            let model = gbdt_fit(&x, Objective::Logistic(&tr_y), &p)?;
            let scores = model.predict(&te_x)?;
            auc(&te_y, &scores)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean_auc = fold_aucs.iter().sum::<f64>() / folds as f64;
    Ok(SatResult {
        mode,
        group,
        n_instances: owned.len(),
        fold_aucs,
        mean_auc,
    })
}

/// Rows are feature groups; columns are the studied intents followed by
/// the agnostic and aware models over all instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatTable {
    pub columns: Vec<String>,
    pub rows: Vec<(FeatureGroup, Vec<Option<SatResult>>)>,
}

pub fn table_report(
    instances: &[SatInstance],
    groups: &[FeatureGroup],
    folds: usize,
    seed: u64,
    params: &BoostParams,
) -> Result<SatTable> {
    let mut modes: Vec<SatMode> = IntentLabel::STUDIED.iter().map(|&i| SatMode::PerIntent(i)).collect();
    modes.push(SatMode::IntentAgnostic);
    modes.push(SatMode::IntentAware);
    let mut columns: Vec<String> = IntentLabel::STUDIED.iter().map(|i| i.code().to_string()).collect();
    columns.push("Intent-agnostic".into());
    columns.push("Intent-aware".into());
    let mut rows = Vec::new();
    for &g in groups {
        let mut cells = Vec::with_capacity(modes.len());
        for &m in &modes {
            let cell = match run_experiment(instances, m, g, folds, seed, params) {
                Ok(r) => Some(r),
                // an intent with too little data leaves its cell empty
                Err(Error::Validation(_)) if matches!(m, SatMode::PerIntent(_)) => None,
                Err(e) => return Err(e),
            };
            cells.push(cell);
        }
        rows.push((g, cells));
    }
    Ok(SatTable { columns, rows })
}
