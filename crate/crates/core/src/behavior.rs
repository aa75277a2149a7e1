//! Behavioral measures, online metrics and their per-intent analysis.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::session_log::{ClickReason, QueryUnit, Session};
use crate::stats::{anova_oneway, holm_bonferroni, kruskal_wallis, pearson};
use crate::taxonomy::{IntentLabel, LabelValue};
use crate::TestResult;

/// Default dwell threshold for a satisfied click, in seconds.
pub const SATS_DWELL_SECONDS: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Query,
    Session,
}

/// Correction families for the multiple-comparison adjustment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MeasureGroup {
    TaskEvents,
    Click,
    Hover,
    Dwell,
}

impl MeasureGroup {
    pub fn label(self) -> &'static str {
        match self {
            MeasureGroup::TaskEvents => "Task Events",
            MeasureGroup::Click => "Click",
            MeasureGroup::Hover => "Hover",
            MeasureGroup::Dwell => "Dwell Time",
        }
    }
}

/// The behavioral measure registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Queries,
    Pages,
    SearchDepth,
    Clicks,
    MinClickRank,
    AvgClickRank,
    PctSatsClick,
    Hovers,
    MinHoverRank,
    AvgHoverRank,
    AvgHoverTime,
    PClickGivenHover,
    TaskTime,
    PctSerpTime,
    AvgClickDwell,
}

impl Measure {
    /// Report order.
    pub const ALL: [Measure; 15] = [
        Measure::Queries,
        Measure::Pages,
        Measure::SearchDepth,
        Measure::Clicks,
        Measure::MinClickRank,
        Measure::AvgClickRank,
        Measure::PctSatsClick,
        Measure::Hovers,
        Measure::MinHoverRank,
        Measure::AvgHoverRank,
        Measure::AvgHoverTime,
        Measure::PClickGivenHover,
        Measure::TaskTime,
        Measure::PctSerpTime,
        Measure::AvgClickDwell,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Queries => "queries",
            Measure::Pages => "pages",
            Measure::SearchDepth => "search_depth",
            Measure::Clicks => "clicks",
            Measure::MinClickRank => "min_click_rank",
            Measure::AvgClickRank => "avg_click_rank",
            Measure::PctSatsClick => "pct_sats_click",
            Measure::Hovers => "hovers",
            Measure::MinHoverRank => "min_hover_rank",
            Measure::AvgHoverRank => "avg_hover_rank",
            Measure::AvgHoverTime => "avg_hover_time",
            Measure::PClickGivenHover => "p_click_given_hover",
            Measure::TaskTime => "task_time",
            Measure::PctSerpTime => "pct_serp_time",
            Measure::AvgClickDwell => "avg_click_dwell",
        }
    }

    pub fn from_name(name: &str) -> Option<Measure> {
        Measure::ALL.into_iter().find(|m| m.name() == name)
    }

    pub fn label(self) -> &'static str {
        match self {
            Measure::Queries => "# query per session",
            Measure::Pages => "# pages per session",
            Measure::SearchDepth => "# search depth in pages",
            Measure::Clicks => "# clicks per session",
            Measure::MinClickRank => "min click rank per query",
            Measure::AvgClickRank => "avg click rank per query",
            Measure::PctSatsClick => "% sats click per query",
            Measure::Hovers => "# hovers per session",
            Measure::MinHoverRank => "min hover rank per query",
            Measure::AvgHoverRank => "avg hover rank per query",
            Measure::AvgHoverTime => "avg hover time (seconds) per query",
            Measure::PClickGivenHover => "P(click|hover) per query",
            Measure::TaskTime => "task time (seconds) per session",
            Measure::PctSerpTime => "% SERP time per session",
            Measure::AvgClickDwell => "avg click dwell (seconds) per query",
        }
    }

    pub fn group(self) -> MeasureGroup {
        use Measure::*;
        match self {
            Queries | Pages | SearchDepth => MeasureGroup::TaskEvents,
            Clicks | MinClickRank | AvgClickRank | PctSatsClick => MeasureGroup::Click,
            Hovers | MinHoverRank | AvgHoverRank | AvgHoverTime | PClickGivenHover => {
                MeasureGroup::Hover
            }
            TaskTime | PctSerpTime | AvgClickDwell => MeasureGroup::Dwell,
        }
    }

    pub fn scope(self) -> Scope {
        use Measure::*;
        match self {
            Queries | Pages | Clicks | Hovers | TaskTime | PctSerpTime => Scope::Session,
            _ => Scope::Query,
        }
    }
}

pub const ONLINE_METRICS: [&str; 10] = [
    "UCTR",
    "QCTR",
    "MaxRR",
    "MinRR",
    "MeanRR",
    "SumClickDwell",
    "AvgClickDwell",
    "QueryDwell",
    "TimeToFirstClick",
    "TimeToLastClick",
];

/// Named metric values; `None` marks an undefined value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    pub scope: Scope,
    pub values: BTreeMap<String, Option<f64>>,
}

impl MetricVector {
    fn new(scope: Scope) -> Self {
        MetricVector {
            scope,
            values: BTreeMap::new(),
        }
    }

    fn set(&mut self, name: &str, value: Option<f64>) {
        let value = value.filter(|v| v.is_finite());
        self.values.insert(name.to_string(), value);
    }

    /// The value of `name`, if registered and defined.
    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied().flatten()
    }

    pub fn measure(&self, m: Measure) -> Option<f64> {
        self.get(m.name())
    }
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

fn min_f(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    values.into_iter().reduce(f64::min)
}

fn max_f(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    values.into_iter().reduce(f64::max)
}

pub fn session_measures(s: &Session) -> MetricVector {
    let mut v = MetricVector::new(Scope::Session);
    let task = s.task_time_seconds();
    let serp: f64 = s.queries.iter().map(|q| q.serp_time_seconds).sum();
    v.set(Measure::Queries.name(), Some(s.queries.len() as f64));
    v.set(
        Measure::Pages.name(),
        Some(s.queries.iter().map(|q| q.pages_viewed as f64).sum()),
    );
    v.set(
        Measure::Clicks.name(),
        Some(s.queries.iter().map(|q| q.clicks.len() as f64).sum()),
    );
    v.set(
        Measure::Hovers.name(),
        Some(s.queries.iter().map(|q| q.hovers.len() as f64).sum()),
    );
    v.set(Measure::TaskTime.name(), Some(task));
    v.set(Measure::PctSerpTime.name(), (task > 0.0).then(|| serp / task));
    v
}

pub fn query_measures(q: &QueryUnit, sats_dwell_threshold_seconds: f64) -> MetricVector {
    let mut v = MetricVector::new(Scope::Query);
    let click_ranks = || q.clicks.iter().map(|c| c.rank as f64);
    let hover_ranks = || q.hovers.iter().map(|h| h.rank as f64);
    v.set(Measure::SearchDepth.name(), Some(q.pages_viewed as f64));
    v.set(Measure::MinClickRank.name(), min_f(click_ranks()));
    v.set(Measure::AvgClickRank.name(), mean(click_ranks()));
    v.set(
        Measure::PctSatsClick.name(),
        mean(q.clicks.iter().map(|c| {
            if c.dwell_seconds >= sats_dwell_threshold_seconds {
                1.0
            } else {
                0.0
            }
        })),
    );
    v.set(Measure::MinHoverRank.name(), min_f(hover_ranks()));
    v.set(Measure::AvgHoverRank.name(), mean(hover_ranks()));
    v.set(
        Measure::AvgHoverTime.name(),
        mean(q.hovers.iter().map(|h| h.seconds())),
    );
    v.set(Measure::PClickGivenHover.name(), p_click_given_hover(q));
    v.set(
        Measure::AvgClickDwell.name(),
        mean(q.clicks.iter().map(|c| c.dwell_seconds)),
    );
    v
}

/// Share of hovered ranks that were also clicked.
pub fn p_click_given_hover(q: &QueryUnit) -> Option<f64> {
    let hovered: BTreeSet<u32> = q.hovers.iter().map(|h| h.rank).collect();
    if hovered.is_empty() {
        return None;
    }
    let clicked: BTreeSet<u32> = q.clicks.iter().map(|c| c.rank).collect();
    Some(hovered.intersection(&clicked).count() as f64 / hovered.len() as f64)
}

/// (max, min, mean) reciprocal rank over click ranks, zeros when empty.
pub fn reciprocal_rank_stats(ranks: &[u32]) -> (f64, f64, f64) {
    if ranks.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let rr = || ranks.iter().map(|&r| 1.0 / r as f64);
    (
        max_f(rr()).unwrap_or(0.0),
        min_f(rr()).unwrap_or(0.0),
        mean(rr()).unwrap_or(0.0),
    )
}

pub fn online_metrics(q: &QueryUnit) -> MetricVector {
    let mut v = MetricVector::new(Scope::Query);
    let ranks: Vec<u32> = q.clicks.iter().map(|c| c.rank).collect();
    let (max_rr, min_rr, mean_rr) = reciprocal_rank_stats(&ranks);
    let n = q.clicks.len();
    v.set("UCTR", Some(if n > 0 { 1.0 } else { 0.0 }));
    v.set("QCTR", Some(n as f64));
    v.set("MaxRR", Some(max_rr));
    v.set("MinRR", Some(min_rr));
    v.set("MeanRR", Some(mean_rr));
    v.set("SumClickDwell", Some(q.total_dwell_seconds()));
    v.set("AvgClickDwell", mean(q.clicks.iter().map(|c| c.dwell_seconds)));
    v.set("QueryDwell", Some(q.duration_seconds()));
    let since_start = |t: i64| (t - q.start_time) as f64 / 1000.0;
    v.set(
        "TimeToFirstClick",
        q.clicks.iter().map(|c| c.time).min().map(since_start),
    );
    v.set(
        "TimeToLastClick",
        q.clicks.iter().map(|c| c.time).max().map(since_start),
    );
    v
}

/// How sessions are grouped for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    /// One group per intent category.
    Intent,
    /// Particular Case(s) against the learning intents.
    Criterion1,
    /// The three learning-about-law intents against each other.
    Criterion3,
}

impl Grouping {
    pub fn groups(self) -> Vec<&'static str> {
        match self {
            Grouping::Intent => IntentLabel::ALL.iter().map(|i| i.code()).collect(),
            Grouping::Criterion1 => vec!["PC", "Le"],
            Grouping::Criterion3 => vec!["Ch", "Pe", "Pr"],
        }
    }

    /// Index of the group a session intent belongs to, if any.
    pub fn group_of(self, intent: Option<LabelValue>) -> Option<usize> {
        let Some(LabelValue::Intent(i)) = intent else {
            return None;
        };
        match self {
            Grouping::Intent => Some(i.index()),
            Grouping::Criterion1 => Some(if i.is_learning() { 1 } else { 0 }),
            Grouping::Criterion3 => match i {
                IntentLabel::Characterization => Some(0),
                IntentLabel::Penalty => Some(1),
                IntentLabel::Procedure => Some(2),
                _ => None,
            },
        }
    }
}

/// Per-measure samples for each group. Session-scope measures contribute
/// one value per session, query-scope measures one value per query; undefined
/// values are left out.
pub fn measure_samples(
    sessions: &[Session],
    grouping: Grouping,
    sats_dwell_threshold_seconds: f64,
) -> BTreeMap<Measure, Vec<Vec<f64>>> {
    let k = grouping.groups().len();
    let mut out: BTreeMap<Measure, Vec<Vec<f64>>> =
        Measure::ALL.iter().map(|&m| (m, vec![Vec::new(); k])).collect();
    for s in sessions {
        let Some(g) = grouping.group_of(s.intent) else {
            continue;
        };
        let sv = session_measures(s);
        let qvs: Vec<MetricVector> = s
            .queries
            .iter()
            .map(|q| query_measures(q, sats_dwell_threshold_seconds))
            .collect();
        for m in Measure::ALL {
            let bucket = &mut out.get_mut(&m).expect("registered")[g];
            match m.scope() {
                Scope::Session => bucket.extend(sv.measure(m)),
                Scope::Query => bucket.extend(qvs.iter().filter_map(|v| v.measure(m))),
            }
        }
    }
    out
}

pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        "--"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorRow {
    pub measure: Measure,
    pub group: MeasureGroup,
    /// Mean per group; `None` when the group has no defined values.
    pub means: Vec<Option<f64>>,
    pub counts: Vec<usize>,
    /// `None` when fewer than two groups have data.
    pub test: Option<TestResult>,
    pub p_holm: Option<f64>,
}

impl BehaviorRow {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_holm.is_some_and(|p| p < alpha)
    }

    pub fn stars(&self) -> &'static str {
        self.p_holm.map_or("--", stars)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorReport {
    pub grouping: Grouping,
    pub groups: Vec<String>,
    pub sessions_used: usize,
    pub sessions_skipped: usize,
    pub rows: Vec<BehaviorRow>,
}

/// Group means, Kruskal-Wallis tests and Holm adjustment within each
/// measure group.
pub fn behavior_report(
    sessions: &[Session],
    grouping: Grouping,
    sats_dwell_threshold_seconds: f64,
) -> Result<BehaviorReport> {
    let samples = measure_samples(sessions, grouping, sats_dwell_threshold_seconds);
    let used = sessions
        .iter()
        .filter(|s| grouping.group_of(s.intent).is_some())
        .count();
    let mut rows = Vec::with_capacity(Measure::ALL.len());
    for m in Measure::ALL {
        let groups = &samples[&m];
        let present: Vec<&Vec<f64>> = groups.iter().filter(|g| !g.is_empty()).collect();
        let test = if present.len() >= 2 && present.iter().map(|g| g.len()).sum::<usize>() >= 3 {
            Some(kruskal_wallis(&present)?)
        } else {
            None
        };
        rows.push(BehaviorRow {
            measure: m,
            group: m.group(),
            means: groups.iter().map(|g| mean(g.iter().copied())).collect(),
            counts: groups.iter().map(Vec::len).collect(),
            test,
            p_holm: None,
        });
    }
    for family in [
        MeasureGroup::TaskEvents,
        MeasureGroup::Click,
        MeasureGroup::Hover,
        MeasureGroup::Dwell,
    ] {
        let idx: Vec<usize> = rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.group == family && r.test.is_some())
            .map(|(i, _)| i)
            .collect();
        let ps: Vec<f64> = idx
            .iter()
            .map(|&i| rows[i].test.as_ref().map_or(1.0, |t| t.p_value))
            .collect();
        if ps.is_empty() {
            continue;
        }
        for (&i, adj) in idx.iter().zip(holm_bonferroni(&ps)?) {
            rows[i].p_holm = Some(adj);
        }
    }
    Ok(BehaviorReport {
        grouping,
        groups: grouping.groups().iter().map(|s| s.to_string()).collect(),
        sessions_used: used,
        sessions_skipped: sessions.len() - used,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClickReasonReport {
    pub intents: Vec<IntentLabel>,
    /// Users with feedback per intent.
    pub users: Vec<usize>,
    /// Per reason, per intent: fraction of users selecting it at least once.
    pub proportions: BTreeMap<ClickReason, Vec<f64>>,
    /// Per reason: one-way ANOVA over per-user indicators, when defined.
    pub anova: BTreeMap<ClickReason, Option<TestResult>>,
    pub warning: Option<String>,
}

pub fn click_reason_distribution(sessions: &[Session]) -> ClickReasonReport {
    // intent -> user -> reasons ever selected
    let mut chosen: BTreeMap<IntentLabel, BTreeMap<&str, BTreeSet<ClickReason>>> = BTreeMap::new();
    for s in sessions {
        let Some(LabelValue::Intent(intent)) = s.intent else {
            continue;
        };
        for q in &s.queries {
            if let Some(reasons) = &q.click_reasons {
                chosen
                    .entry(intent)
                    .or_default()
                    .entry(s.user_id.as_str())
                    .or_default()
                    .extend(reasons.iter().copied());
            }
        }
    }
    if chosen.is_empty() {
        return ClickReasonReport {
            intents: Vec::new(),
            users: Vec::new(),
            proportions: BTreeMap::new(),
            anova: BTreeMap::new(),
            warning: Some("no click-reason feedback present".into()),
        };
    }
    let intents: Vec<IntentLabel> = chosen.keys().copied().collect();
    let users = chosen.values().map(BTreeMap::len).collect();
    let mut proportions = BTreeMap::new();
    let mut anova = BTreeMap::new();
    for reason in ClickReason::ALL {
        let groups: Vec<Vec<f64>> = chosen
            .values()
            .map(|by_user| {
                by_user
                    .values()
                    .map(|set| if set.contains(&reason) { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        proportions.insert(
            reason,
            groups.iter().map(|g| mean(g.iter().copied()).unwrap_or(0.0)).collect(),
        );
        anova.insert(reason, anova_oneway(&groups).ok());
    }
    ClickReasonReport {
        intents,
        users,
        proportions,
        anova,
        warning: None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCell {
    pub n: usize,
    /// `None` when the correlation is undefined (constant input or n < 3).
    pub test: Option<TestResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub intents: Vec<IntentLabel>,
    /// Per online metric, per intent.
    pub cells: BTreeMap<String, Vec<CorrelationCell>>,
}

/// Pearson correlation of each online metric with per-query satisfaction,
/// per intent. Queries lacking a rating or the metric are skipped pairwise.
pub fn satisfaction_correlations(
    sessions: &[Session],
    intents: &[IntentLabel],
) -> Result<CorrelationReport> {
    let mut cells = BTreeMap::new();
    let mut per_intent: Vec<Vec<(MetricVector, f64)>> = vec![Vec::new(); intents.len()];
    for s in sessions {
        let Some(LabelValue::Intent(i)) = s.intent else {
            continue;
        };
        let Some(slot) = intents.iter().position(|&x| x == i) else {
            continue;
        };
        for q in &s.queries {
            if let Some(sat) = q.satisfaction {
                per_intent[slot].push((online_metrics(q), sat as f64));
            }
        }
    }
    for name in ONLINE_METRICS {
        let mut row = Vec::with_capacity(intents.len());
        for rows in &per_intent {
            let (x, y): (Vec<f64>, Vec<f64>) =
                rows.iter().filter_map(|(v, s)| v.get(name).map(|m| (m, *s))).unzip();
            let test = match pearson(&x, &y) {
                Ok(t) => Some(t),
                Err(Error::UndefinedCorrelation(_)) | Err(Error::Validation(_)) => None,
                Err(e) => return Err(e),
            };
            row.push(CorrelationCell { n: x.len(), test });
        }
        cells.insert(name.to_string(), row);
    }
    Ok(CorrelationReport {
        intents: intents.to_vec(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session_log::{Click, Hover};
    use proptest::prelude::*;

    fn unit(clicks: &[(u32, i64, f64)], hovers: &[(u32, i64, i64)]) -> QueryUnit {
        QueryUnit {
            query_text: "loan fraud".into(),
            start_time: 0,
            end_time: 120_000,
            clicks: clicks
                .iter()
                .map(|&(rank, time, dwell_seconds)| Click { rank, time, dwell_seconds })
                .collect(),
            hovers: hovers
                .iter()
                .map(|&(rank, enter, exit)| Hover { rank, enter, exit })
                .collect(),
            pages_viewed: 1,
            serp_time_seconds: 60.0,
            satisfaction: None,
            click_reasons: None,
            results: Vec::new(),
        }
    }

    fn session(queries: Vec<QueryUnit>) -> Session {
        let end = queries.iter().map(|q| q.end_time).max().unwrap_or(0);
        Session {
            session_id: "u:0".into(),
            user_id: "u".into(),
            intent: None,
            queries,
            start_time: 0,
            end_time: end,
            events: Vec::new(),
        }
    }

    #[test]
    fn session_examples() {
        let s = session(vec![
            unit(&[(1, 10, 5.0)], &[]),
            unit(&[(1, 10, 5.0), (2, 20, 5.0), (3, 30, 5.0)], &[]),
        ]);
        let v = session_measures(&s);
        assert_eq!(v.measure(Measure::Clicks), Some(4.0));
        assert_eq!(v.measure(Measure::Queries), Some(2.0));
        let one = session(vec![unit(&[], &[])]);
        assert_eq!(session_measures(&one).measure(Measure::PctSerpTime), Some(0.5));
        let mut instant = session(vec![unit(&[], &[])]);
        instant.end_time = 0;
        assert_eq!(session_measures(&instant).measure(Measure::PctSerpTime), None);
        assert!(session_measures(&instant).values.contains_key("pct_serp_time"));
    }

    #[test]
    fn query_examples() {
        let q = unit(&[(2, 1, 45.0), (4, 2, 10.0)], &[]);
        let v = query_measures(&q, SATS_DWELL_SECONDS);
        assert_eq!(v.measure(Measure::MinClickRank), Some(2.0));
        assert_eq!(v.measure(Measure::AvgClickRank), Some(3.0));
        assert_eq!(v.measure(Measure::PctSatsClick), Some(0.5));
        assert_eq!(v.measure(Measure::PClickGivenHover), None);
        let h = unit(&[(2, 5, 1.0)], &[(1, 0, 1), (2, 1, 2), (3, 2, 3)]);
        let v = query_measures(&h, SATS_DWELL_SECONDS);
        assert!((v.measure(Measure::PClickGivenHover).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let none = query_measures(&unit(&[], &[]), SATS_DWELL_SECONDS);
        assert_eq!(none.measure(Measure::AvgClickRank), None);
        assert_eq!(none.measure(Measure::SearchDepth), Some(1.0));
    }

    #[test]
    fn online_examples() {
        let q = unit(&[(2, 5_000, 1.0), (4, 20_000, 1.0)], &[]);
        let v = online_metrics(&q);
        assert_eq!(v.get("MaxRR"), Some(0.5));
        assert_eq!(v.get("MinRR"), Some(0.25));
        assert_eq!(v.get("MeanRR"), Some(0.375));
        assert_eq!(v.get("TimeToFirstClick"), Some(5.0));
        assert_eq!(v.get("TimeToLastClick"), Some(20.0));
        let empty = online_metrics(&unit(&[], &[]));
        assert_eq!(empty.get("UCTR"), Some(0.0));
        assert_eq!(empty.get("QCTR"), Some(0.0));
        assert_eq!(empty.get("MaxRR"), Some(0.0));
        assert_eq!(empty.get("TimeToFirstClick"), None);
        for name in ONLINE_METRICS {
            assert!(empty.values.contains_key(name));
        }
    }

    fn feedback_session(user: &str, intent: IntentLabel, reasons: &[ClickReason]) -> Session {
        let mut q = unit(&[], &[]);
        q.click_reasons = Some(reasons.iter().copied().collect());
        let mut s = session(vec![q]);
        s.user_id = user.into();
        s.intent = Some(LabelValue::Intent(intent));
        s
    }

    #[test]
    fn click_reason_examples() {
        let one = [feedback_session(
            "u",
            IntentLabel::ParticularCase,
            &[ClickReason::Relevance, ClickReason::Region],
        )];
        let r = click_reason_distribution(&one);
        assert_eq!(r.intents, vec![IntentLabel::ParticularCase]);
        assert_eq!(r.proportions[&ClickReason::Relevance], vec![1.0]);
        assert_eq!(r.proportions[&ClickReason::Region], vec![1.0]);
        assert_eq!(r.proportions[&ClickReason::Diversity], vec![0.0]);

        let mut all = Vec::new();
        for intent in IntentLabel::STUDIED {
            for u in ["a", "b", "c"] {
                all.push(feedback_session(u, intent, &[ClickReason::Relevance]));
            }
        }
        let r = click_reason_distribution(&all);
        assert!(r.proportions[&ClickReason::Relevance].iter().all(|&p| p == 1.0));
        assert_eq!(r.users, vec![3, 3, 3, 3]);

        assert!(click_reason_distribution(&[session(vec![unit(&[], &[])])]).warning.is_some());
    }

    #[test]
    fn grouping_membership() {
        let pe = Some(LabelValue::Intent(IntentLabel::Penalty));
        assert_eq!(Grouping::Criterion1.group_of(pe), Some(1));
        assert_eq!(Grouping::Criterion3.group_of(pe), Some(1));
        let pc = Some(LabelValue::Intent(IntentLabel::ParticularCase));
        assert_eq!(Grouping::Criterion3.group_of(pc), None);
        assert_eq!(Grouping::Intent.group_of(Some(LabelValue::Multi)), None);
        let families: BTreeSet<MeasureGroup> = Measure::ALL.iter().map(|m| m.group()).collect();
        assert_eq!(families.len(), 4);
    }

    fn clicks_strategy() -> impl Strategy<Value = Vec<(u32, i64, f64)>> {
        prop::collection::vec((1u32..20, 0i64..100_000, 0.0f64..100.0), 0..8)
    }

    proptest! {
        #[test]
        fn click_order_invariance(clicks in clicks_strategy(), seed in any::<u64>()) {
            let mut shuffled = clicks.clone();
            let n = shuffled.len();
            if n > 1 {
                shuffled.rotate_left((seed as usize) % n);
            }
            let a = unit(&clicks, &[]);
            let b = unit(&shuffled, &[]);
            let (qa, qb) = (query_measures(&a, 30.0), query_measures(&b, 30.0));
            let (oa, ob) = (online_metrics(&a), online_metrics(&b));
            for name in ["min_click_rank", "pct_sats_click"] {
                prop_assert_eq!(qa.get(name), qb.get(name));
            }
            for name in ["UCTR", "QCTR", "MaxRR", "MinRR", "TimeToFirstClick", "TimeToLastClick"] {
                prop_assert_eq!(oa.get(name), ob.get(name));
            }
            for name in ["MeanRR", "AvgClickDwell"] {
                let (x, y) = (oa.get(name), ob.get(name));
                prop_assert_eq!(x.is_some(), y.is_some());
                if let (Some(x), Some(y)) = (x, y) {
                    prop_assert!((x - y).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn rr_ordering_and_overlap(clicks in clicks_strategy()) {
            let q = unit(&clicks, &[]);
            let o = online_metrics(&q);
            let m = query_measures(&q, 30.0);
            let uctr = o.get("UCTR").unwrap();
            prop_assert!(uctr == 0.0 || uctr == 1.0);
            if !clicks.is_empty() {
                let (mx, mn, me) = (o.get("MaxRR").unwrap(), o.get("MinRR").unwrap(), o.get("MeanRR").unwrap());
                prop_assert!(mn <= me + 1e-12 && me <= mx + 1e-12);
                let p = m.measure(Measure::PctSatsClick).unwrap();
                prop_assert!((0.0..=1.0).contains(&p));
            }
            prop_assert_eq!(o.get("QCTR").unwrap() as usize, clicks.len());
            prop_assert_eq!(o.get("AvgClickDwell"), m.measure(Measure::AvgClickDwell));
        }
    }
}
