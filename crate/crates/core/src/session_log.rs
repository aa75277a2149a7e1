//! Raw interaction events, session reconstruction and session filtering.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::taxonomy::LabelValue;
use crate::text::Tokenizer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    QueryIssued,
    ResultClick,
    ResultHoverEnter,
    ResultHoverExit,
    SerpPageView,
    PageLeave,
    ExplicitFeedback,
}

impl EventKind {
    fn has_rank(self) -> bool {
        matches!(
            self,
            EventKind::ResultClick | EventKind::ResultHoverEnter | EventKind::ResultHoverExit
        )
    }
}

/// Reasons a participant can give for clicking a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClickReason {
    Relevance,
    Diversity,
    Authority,
    Timeliness,
    Region,
    Inspiration,
    Ranking,
    Others,
}

impl ClickReason {
    pub const ALL: [ClickReason; 8] = [
        ClickReason::Relevance,
        ClickReason::Diversity,
        ClickReason::Authority,
        ClickReason::Timeliness,
        ClickReason::Region,
        ClickReason::Inspiration,
        ClickReason::Ranking,
        ClickReason::Others,
    ];
}

/// Explicit per-query feedback.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Feedback {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub satisfaction: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub click_reasons: Option<Vec<ClickReason>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawEvent {
    pub user_id: String,
    /// Milliseconds since the epoch.
    pub timestamp: i64,
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_text: Option<String>,
    /// 1-based SERP position.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result_rank: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub serp_page: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Feedback>,
    /// Document ids shown, in rank order (on QueryIssued / SerpPageView).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub results: Option<Vec<String>>,
    /// Task-level intent annotation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intent: Option<LabelValue>,
    /// Filled in on output by the session splitter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_id: Option<String>,
}

impl RawEvent {
    pub fn new(user_id: &str, timestamp: i64, kind: EventKind) -> Self {
        RawEvent {
            user_id: user_id.to_string(),
            timestamp,
            kind,
            query_text: None,
            result_rank: None,
            serp_page: None,
            payload: None,
            results: None,
            intent: None,
            session_id: None,
        }
    }

    pub fn query(user_id: &str, timestamp: i64, text: &str) -> Self {
        RawEvent {
            query_text: Some(text.to_string()),
            ..RawEvent::new(user_id, timestamp, EventKind::QueryIssued)
        }
    }

    pub fn ranked(user_id: &str, timestamp: i64, kind: EventKind, rank: u32) -> Self {
        RawEvent {
            result_rank: Some(rank),
            ..RawEvent::new(user_id, timestamp, kind)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let at = || format!("event of {} at {}", self.user_id, self.timestamp);
        if self.kind.has_rank() != self.result_rank.is_some() {
            return Err(Error::validation(format!(
                "{}: result_rank must be present exactly for click and hover events",
                at()
            )));
        }
        if self.result_rank == Some(0) || self.serp_page == Some(0) {
            return Err(Error::validation(format!("{}: ranks and pages are 1-based", at())));
        }
        if (self.kind == EventKind::QueryIssued) != self.query_text.is_some() {
            return Err(Error::validation(format!(
                "{}: query_text must be present exactly for QueryIssued",
                at()
            )));
        }
        if let Some(p) = &self.payload {
            if self.kind != EventKind::ExplicitFeedback {
                return Err(Error::validation(format!(
                    "{}: payload only allowed on ExplicitFeedback",
                    at()
                )));
            }
            if let Some(s) = p.satisfaction {
                if !(1..=5).contains(&s) {
                    return Err(Error::validation(format!(
                        "{}: satisfaction {s} outside 1..=5",
                        at()
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Click {
    pub rank: u32,
    pub time: i64,
    pub dwell_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hover {
    pub rank: u32,
    pub enter: i64,
    pub exit: i64,
}

impl Hover {
    pub fn seconds(&self) -> f64 {
        (self.exit - self.enter) as f64 / 1000.0
    }
}

/// One issued query and everything the user did until the next one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryUnit {
    pub query_text: String,
    pub start_time: i64,
    pub end_time: i64,
    pub clicks: Vec<Click>,
    pub hovers: Vec<Hover>,
    pub pages_viewed: u32,
    pub serp_time_seconds: f64,
    pub satisfaction: Option<u8>,
    pub click_reasons: Option<BTreeSet<ClickReason>>,
    pub results: Vec<String>,
}

impl QueryUnit {
    pub fn duration_seconds(&self) -> f64 {
        (self.end_time - self.start_time) as f64 / 1000.0
    }

    pub fn total_dwell_seconds(&self) -> f64 {
        self.clicks.iter().map(|c| c.dwell_seconds).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub user_id: String,
    pub intent: Option<LabelValue>,
    pub queries: Vec<QueryUnit>,
    pub start_time: i64,
    pub end_time: i64,
    /// Events owned by the session, with `session_id` filled in.
    pub events: Vec<RawEvent>,
}

impl Session {
    pub fn task_time_seconds(&self) -> f64 {
        (self.end_time - self.start_time) as f64 / 1000.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub gap_minutes: f64,
    /// Hovers shorter than this are discarded.
    pub min_hover_ms: i64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            gap_minutes: 30.0,
            min_hover_ms: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitWarnings {
    pub orphan_events: usize,
    pub unmatched_hover_exits: usize,
    pub short_hovers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitOutput {
    pub sessions: Vec<Session>,
    pub warnings: SplitWarnings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HoverEvent {
    pub rank: u32,
    pub time: i64,
    pub enter: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoverPairing {
    pub hovers: Vec<Hover>,
    pub unmatched_exits: usize,
}

/// Pairs hover exits with the latest open enter on the same rank; enters
/// still open at `end_time` are closed there.
pub fn pair_hovers(events: &[HoverEvent], end_time: i64) -> HoverPairing {
    let mut open: BTreeMap<u32, Vec<i64>> = BTreeMap::new();
    let mut hovers = Vec::new();
    let mut unmatched_exits = 0;
    for e in events {
        if e.enter {
            open.entry(e.rank).or_default().push(e.time);
        } else {
            match open.get_mut(&e.rank).and_then(|s| s.pop()) {
                Some(enter) => hovers.push(Hover {
                    rank: e.rank,
                    enter,
                    exit: e.time,
                }),
                None => unmatched_exits += 1,
            }
        }
    }
    for (rank, stack) in open {
        for enter in stack {
            hovers.push(Hover {
                rank,
                enter,
                exit: end_time.max(enter),
            });
        }
    }
    hovers.sort_by_key(|h| (h.enter, h.rank, h.exit));
    HoverPairing {
        hovers,
        unmatched_exits,
    }
}

/// Splits events into sessions at inactivity gaps of at least
/// `gap_minutes`, measured between consecutive events of the same user.
///
/// Events of different users may be interleaved, but each user's events
/// must be in non-decreasing time order. Sessions come out ordered by
/// user id, then start time.
pub fn split_sessions(events: &[RawEvent], config: &SplitConfig) -> Result<SplitOutput> {
    if !(config.gap_minutes > 0.0) {
        return Err(Error::validation("gap_minutes must be positive"));
    }
    let mut per_user: BTreeMap<&str, Vec<&RawEvent>> = BTreeMap::new();
    for e in events {
        e.validate()?;
        let list = per_user.entry(e.user_id.as_str()).or_default();
        if let Some(prev) = list.last() {
            if e.timestamp < prev.timestamp {
                return Err(Error::validation(format!(
                    "events of user {} are not sorted by timestamp ({} after {})",
                    e.user_id, e.timestamp, prev.timestamp
                )));
            }
        }
        list.push(e);
    }

    let gap_ms = config.gap_minutes * 60_000.0;
    let mut sessions = Vec::new();
    let mut warnings = SplitWarnings::default();
    for (user, list) in per_user {
        let mut chunk: Vec<&RawEvent> = Vec::new();
        for e in list {
            if let Some(prev) = chunk.last() {
                if (e.timestamp - prev.timestamp) as f64 >= gap_ms {
                    if let Some(s) = build_session(user, &chunk, config, &mut warnings) {
                        sessions.push(s);
                    }
                    chunk.clear();
                }
            }
            chunk.push(e);
        }
        if let Some(s) = build_session(user, &chunk, config, &mut warnings) {
            sessions.push(s);
        }
    }
    Ok(SplitOutput { sessions, warnings })
}

fn build_session(
    user: &str,
    chunk: &[&RawEvent],
    config: &SplitConfig,
    warnings: &mut SplitWarnings,
) -> Option<Session> {
    let first_query = chunk.iter().position(|e| e.kind == EventKind::QueryIssued);
    let Some(first_query) = first_query else {
        warnings.orphan_events += chunk.len();
        return None;
    };
    warnings.orphan_events += first_query;
    let owned = &chunk[first_query..];

    let starts: Vec<usize> = owned
        .iter()
        .enumerate()
        .filter(|(_, e)| e.kind == EventKind::QueryIssued)
        .map(|(i, _)| i)
        .collect();
    let mut queries = Vec::with_capacity(starts.len());
    for (n, &begin) in starts.iter().enumerate() {
        let end = starts.get(n + 1).copied().unwrap_or(owned.len());
        let next_query_time = starts.get(n + 1).map(|&i| owned[i].timestamp);
        queries.push(build_query(&owned[begin..end], next_query_time, config, warnings));
    }

    let start_time = owned[0].timestamp;
    let end_time = queries
        .iter()
        .map(|q| q.end_time)
        .max()
        .unwrap_or(start_time);
    let session_id = format!("{user}:{start_time}");
    let intent = owned.iter().find_map(|e| e.intent);
    let events = owned
        .iter()
        .map(|e| RawEvent {
            session_id: Some(session_id.clone()),
            ..(*e).clone()
        })
        .collect();
    Some(Session {
        session_id,
        user_id: user.to_string(),
        intent,
        queries,
        start_time,
        end_time,
        events,
    })
}

fn build_query(
    events: &[&RawEvent],
    next_query_time: Option<i64>,
    config: &SplitConfig,
    warnings: &mut SplitWarnings,
) -> QueryUnit {
    let head = events[0];
    let start_time = head.timestamp;
    // Feedback is collected after the fact and does not take part in timing.
    let timing: Vec<&RawEvent> = events
        .iter()
        .copied()
        .filter(|e| e.kind != EventKind::ExplicitFeedback)
        .collect();

    let mut clicks = Vec::new();
    let mut dwell_total_ms = 0i64;
    let mut end_time = timing.last().map_or(start_time, |e| e.timestamp);
    for (i, e) in timing.iter().enumerate() {
        if e.kind != EventKind::ResultClick {
            continue;
        }
        let until = match timing.get(i + 1) {
            Some(next) => next.timestamp,
            None => next_query_time.unwrap_or(e.timestamp),
        };
        let dwell_ms = (until - e.timestamp).max(0);
        dwell_total_ms += dwell_ms;
        end_time = end_time.max(e.timestamp + dwell_ms);
        clicks.push(Click {
            rank: e.result_rank.unwrap_or(1),
            time: e.timestamp,
            dwell_seconds: dwell_ms as f64 / 1000.0,
        });
    }

    let hover_events: Vec<HoverEvent> = timing
        .iter()
        .filter_map(|e| match e.kind {
            EventKind::ResultHoverEnter | EventKind::ResultHoverExit => Some(HoverEvent {
                rank: e.result_rank.unwrap_or(1),
                time: e.timestamp,
                enter: e.kind == EventKind::ResultHoverEnter,
            }),
            _ => None,
        })
        .collect();
    let pairing = pair_hovers(&hover_events, end_time);
    warnings.unmatched_hover_exits += pairing.unmatched_exits;
    let before = pairing.hovers.len();
    let hovers: Vec<Hover> = pairing
        .hovers
        .into_iter()
        .filter(|h| h.exit - h.enter >= config.min_hover_ms)
        .collect();
    warnings.short_hovers += before - hovers.len();

    let pages_viewed = timing
        .iter()
        .filter(|e| matches!(e.kind, EventKind::SerpPageView | EventKind::QueryIssued))
        .filter_map(|e| e.serp_page)
        .max()
        .unwrap_or(1)
        .max(1);

    let mut results = Vec::new();
    for e in &timing {
        if let Some(r) = &e.results {
            results.extend(r.iter().cloned());
        }
    }

    let feedback = events
        .iter()
        .rev()
        .find_map(|e| (e.kind == EventKind::ExplicitFeedback).then_some(e.payload.as_ref()).flatten());

    let serp_ms = ((end_time - start_time) - dwell_total_ms).max(0);
    QueryUnit {
        query_text: head.query_text.clone().unwrap_or_default(),
        start_time,
        end_time,
        clicks,
        hovers,
        pages_viewed,
        serp_time_seconds: serp_ms as f64 / 1000.0,
        satisfaction: feedback.and_then(|f| f.satisfaction),
        click_reasons: feedback
            .and_then(|f| f.click_reasons.as_ref())
            .map(|r| r.iter().copied().collect()),
        results,
    }
}

/// Keeps sessions with at least one query of `min_max_query_terms` terms.
pub fn filter_sessions(
    sessions: Vec<Session>,
    min_max_query_terms: usize,
    tokenizer: &Tokenizer,
) -> Vec<Session> {
    sessions
        .into_iter()
        .filter(|s| {
            let longest = s
                .queries
                .iter()
                .map(|q| tokenizer.tokenize(&q.query_text).len())
                .max();
            longest.is_some_and(|n| n >= min_max_query_terms)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub events_in: usize,
    pub sessions_split: usize,
    pub sessions_kept: usize,
    pub queries_kept: usize,
    pub dropped_orphan_events: usize,
    pub unmatched_hover_exits: usize,
    pub short_hovers: usize,
}

/// The events of every session, in session order, ready to be written.
pub fn session_events(sessions: &[Session]) -> Vec<RawEvent> {
    sessions.iter().flat_map(|s| s.events.iter().cloned()).collect()
}
