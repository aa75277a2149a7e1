//! Synthetic interaction logs, satisfaction instances and ranking data.
//!
//! Session logs are calibrated to per-intent behavioral means. Every drawn
//! quantity is sampled with stratified uniforms across an intent's whole
//! population, so sample means settle close to the profile at modest sizes.

use std::collections::BTreeMap;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::behavior::{Measure, SATS_DWELL_SECONDS};
use crate::error::{Error, Result};
use crate::ltr::{RankingInstance, N_FEATURES};
use crate::satisfaction::{ImputedFlags, SatFeatures, SatInstance};
use crate::session_log::{ClickReason, EventKind, Feedback, RawEvent};
use crate::stats::special::normal_quantile;
use crate::taxonomy::{IntentLabel, LabelValue};
use crate::text::Corpus;

pub const PROFILE_FORMAT_VERSION: u32 = 1;

/// The shipped calibration file.
pub const SHIPPED_PROFILES_JSON: &str = include_str!("../../../profiles/paper_tables.json");

const MAX_RANK: u32 = 10;
const RESULTS_PER_PAGE: usize = 10;
const BASE_TIME_MS: i64 = 1_600_000_000_000;
const MEAN_EXTRA_IDLE_MS: f64 = 2.0 * 3_600_000.0;
/// Click probability of the noise component in ranking data.
pub const NOISE_CLICK_RATE: f64 = 0.3;

const VOCABULARY: [&str; 48] = [
    "contract", "breach", "damages", "theft", "fraud", "robbery", "assault", "homicide",
    "negligence", "liability", "sentence", "probation", "fine", "imprisonment", "appeal",
    "jurisdiction", "limitation", "enforcement", "evidence", "witness", "testimony", "custody",
    "divorce", "alimony", "property", "lease", "tenant", "landlord", "inheritance", "will",
    "trademark", "patent", "copyright", "employment", "dismissal", "wage", "injury", "traffic",
    "bribery", "embezzlement", "smuggling", "drug", "loan", "guarantee", "mortgage", "arbitration",
    "mediation", "compensation",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Distributions {
    /// Log-scale spread of hover durations.
    pub hover_time_sigma: f64,
    pub max_click_dwell_seconds: f64,
    pub max_action_gap_seconds: f64,
    /// Minimum idle time between a user's sessions.
    pub min_session_idle_minutes: f64,
    #[serde(default)]
    pub notes: BTreeMap<String, String>,
}

/// Behavioral means of one intent, plus the knobs the means do not fix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntentProfile {
    pub intent: IntentLabel,
    pub queries_per_session: f64,
    pub pages_per_session: f64,
    pub clicks_per_session: f64,
    pub hovers_per_session: f64,
    pub task_time_seconds: f64,
    pub avg_click_rank: f64,
    pub pct_sats_click: f64,
    pub avg_hover_rank: f64,
    pub avg_hover_time_seconds: f64,
    pub avg_click_dwell_seconds: f64,
    /// Base distribution of the 1-5 rating before behavioral adjustment.
    pub satisfaction_probs: [f64; 5],
    pub click_reason_probs: BTreeMap<ClickReason, f64>,
    /// Feature index driving clicks in generated ranking data.
    pub relevance_feature: usize,
}

impl IntentProfile {
    pub fn search_depth(&self) -> f64 {
        self.pages_per_session / self.queries_per_session
    }

    /// Mean pause before each action so the expected task time matches.
    pub fn mean_gap_seconds(&self) -> f64 {
        let busy = self.hovers_per_session * self.avg_hover_time_seconds
            + self.clicks_per_session * self.avg_click_dwell_seconds;
        (self.task_time_seconds - busy)
            / (self.clicks_per_session + self.hovers_per_session + self.pages_per_session)
    }

    /// `(mu, sigma)` of the log-normal dwell with the profile's mean and
    /// share of dwells at or above the satisfied-click threshold.
    pub fn dwell_lognormal(&self) -> Result<(f64, f64)> {
        let z = normal_quantile(1.0 - self.pct_sats_click);
        let c = SATS_DWELL_SECONDS.ln() - self.avg_click_dwell_seconds.ln();
        let disc = z * z - 2.0 * c;
        if disc < 0.0 {
            return Err(Error::validation(format!(
                "{}: no log-normal dwell has mean {} and sats share {}",
                self.intent, self.avg_click_dwell_seconds, self.pct_sats_click
            )));
        }
        let sigma = z + disc.sqrt();
        if !(sigma > 0.0) {
            return Err(Error::validation(format!(
                "{}: degenerate dwell distribution",
                self.intent
            )));
        }
        Ok((self.avg_click_dwell_seconds.ln() - sigma * sigma / 2.0, sigma))
    }

    /// Same per-query behavior with a different number of queries.
    pub fn with_queries(&self, queries_per_session: f64) -> IntentProfile {
        let k = queries_per_session / self.queries_per_session;
        IntentProfile {
            queries_per_session,
            pages_per_session: self.pages_per_session * k,
            clicks_per_session: self.clicks_per_session * k,
            hovers_per_session: self.hovers_per_session * k,
            task_time_seconds: self.task_time_seconds * k,
            ..self.clone()
        }
    }

    /// The generator parameter a behavioral measure is calibrated to.
    pub fn target(&self, m: Measure) -> Option<f64> {
        Some(match m {
            Measure::Queries => self.queries_per_session,
            Measure::Pages => self.pages_per_session,
            Measure::SearchDepth => self.search_depth(),
            Measure::Clicks => self.clicks_per_session,
            Measure::AvgClickRank => self.avg_click_rank,
            Measure::PctSatsClick => self.pct_sats_click,
            Measure::Hovers => self.hovers_per_session,
            Measure::AvgHoverRank => self.avg_hover_rank,
            Measure::AvgHoverTime => self.avg_hover_time_seconds,
            Measure::TaskTime => self.task_time_seconds,
            Measure::AvgClickDwell => self.avg_click_dwell_seconds,
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::validation(format!("{} profile: {what}", self.intent)));
        let means = [
            self.queries_per_session,
            self.pages_per_session,
            self.clicks_per_session,
            self.hovers_per_session,
            self.task_time_seconds,
            self.avg_hover_time_seconds,
            self.avg_click_dwell_seconds,
        ];
        if means.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return bad("means must be positive");
        }
        if self.queries_per_session < 1.0 {
            return bad("at least one query per session");
        }
        if self.pages_per_session < self.queries_per_session {
            return bad("every query views at least one page");
        }
        for r in [self.avg_click_rank, self.avg_hover_rank] {
            if !(1.0..=MAX_RANK as f64).contains(&r) {
                return bad("mean ranks must lie in 1..=10");
            }
        }
        if !(self.pct_sats_click > 0.0 && self.pct_sats_click < 1.0) {
            return bad("pct_sats_click must lie in (0, 1)");
        }
        if !(self.mean_gap_seconds() > 0.0) {
            return bad("task time too short for the hover and dwell budget");
        }
        let total: f64 = self.satisfaction_probs.iter().sum();
        if self.satisfaction_probs.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-6 {
            return bad("satisfaction_probs must be a distribution");
        }
        if self.click_reason_probs.values().any(|p| !(0.0..=1.0).contains(p)) {
            return bad("click reason probabilities must lie in [0, 1]");
        }
        if self.relevance_feature >= N_FEATURES {
            return bad("relevance_feature out of range");
        }
        self.dwell_lognormal()?;
        TruncatedGeometric::with_mean(self.avg_click_rank)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSet {
    pub format_version: u32,
    pub distributions: Distributions,
    pub query_log_mix: BTreeMap<LabelValue, f64>,
    pub profiles: Vec<IntentProfile>,
}

impl ProfileSet {
    /// The shipped calibration.
    pub fn shipped() -> Result<Self> {
        Self::from_json(SHIPPED_PROFILES_JSON)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let set: ProfileSet = serde_json::from_str(text)?;
        if set.format_version != PROFILE_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                artifact: "profile set",
                found: set.format_version,
                expected: PROFILE_FORMAT_VERSION,
            });
        }
        for p in &set.profiles {
            p.validate()?;
        }
        Ok(set)
    }

    pub fn get(&self, intent: IntentLabel) -> Result<&IntentProfile> {
        self.profiles
            .iter()
            .find(|p| p.intent == intent)
            .ok_or(Error::UnsupportedIntent(intent))
    }

    /// The query-log mix restricted to base intents and renormalized.
    pub fn intent_mix(&self) -> BTreeMap<IntentLabel, f64> {
        let base: Vec<(IntentLabel, f64)> = self
            .query_log_mix
            .iter()
            .filter_map(|(l, &p)| l.intent().map(|i| (i, p)))
            .collect();
        let total: f64 = base.iter().map(|(_, p)| p).sum();
        base.into_iter().map(|(i, p)| (i, p / total)).collect()
    }

    pub fn uniform_mix(intents: &[IntentLabel]) -> BTreeMap<IntentLabel, f64> {
        intents
            .iter()
            .map(|&i| (i, 1.0 / intents.len() as f64))
            .collect()
    }
}

/// Ranks on `1..=10` with `P(k)` proportional to `ratio^(k-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedGeometric {
    pub ratio: f64,
    cdf: Vec<f64>,
}

impl TruncatedGeometric {
    fn mean_for(ratio: f64) -> f64 {
        let (mut num, mut den, mut w) = (0.0, 0.0, 1.0);
        for k in 1..=MAX_RANK {
            num += k as f64 * w;
            den += w;
            w *= ratio;
        }
        num / den
    }

    pub fn with_mean(mean: f64) -> Result<Self> {
        if !(1.0..=MAX_RANK as f64).contains(&mean) {
            return Err(Error::validation(format!("rank mean {mean} outside 1..=10")));
        }
        let (mut lo, mut hi) = (0.0f64, 1e3f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if Self::mean_for(mid) < mean {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let ratio = 0.5 * (lo + hi);
        let weights: Vec<f64> = (0..MAX_RANK).map(|k| ratio.powi(k as i32)).collect();
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let cdf = weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect();
        Ok(TruncatedGeometric { ratio, cdf })
    }

    pub fn mean(&self) -> f64 {
        Self::mean_for(self.ratio)
    }

    pub fn quantile(&self, u: f64) -> u32 {
        self.cdf
            .iter()
            .position(|&c| u < c)
            .map_or(MAX_RANK, |k| k as u32 + 1)
    }
}

/// Smallest `k` with `P(X <= k) > u` for `X ~ Poisson(lambda)`.
pub fn poisson_quantile(u: f64, lambda: f64) -> u64 {
    if !(lambda > 0.0) {
        return 0;
    }
    if lambda > 500.0 {
        let x = lambda + lambda.sqrt() * normal_quantile(u.clamp(1e-12, 1.0 - 1e-12));
        return x.round().max(0.0) as u64;
    }
    let mut p = (-lambda).exp();
    let mut cdf = p;
    let mut k = 0u64;
    while u >= cdf {
        k += 1;
        p *= lambda / k as f64;
        if p == 0.0 {
            break;
        }
        cdf += p;
    }
    k
}

/// `n` uniforms, one per stratum `[k/n, (k+1)/n)`, in random order.
pub fn stratified_uniforms(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm.into_iter()
        .map(|k| ((k as f64 + rng.random::<f64>()) / n as f64).clamp(1e-12, 1.0 - 1e-12))
        .collect()
}

fn to_ms(seconds: f64) -> i64 {
    (seconds * 1000.0).round() as i64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionGenConfig {
    pub n_sessions: usize,
    pub seed: u64,
    pub n_users: usize,
    /// Size of the document pool results are drawn from.
    pub doc_pool: usize,
}

impl Default for SessionGenConfig {
    fn default() -> Self {
        SessionGenConfig {
            n_sessions: 500,
            seed: 0,
            n_users: 36,
            doc_pool: 1000,
        }
    }
}

pub fn doc_id(k: usize) -> String {
    format!("case{k:05}")
}

fn validate_mix(mix: &BTreeMap<IntentLabel, f64>) -> Result<()> {
    if mix.values().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::validation("intent mix weights must be non-negative"));
    }
    let total: f64 = mix.values().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::validation(format!("intent mix sums to {total}, not 1")));
    }
    Ok(())
}

/// Session counts per intent by largest remainder.
pub fn allocate(mix: &BTreeMap<IntentLabel, f64>, n: usize) -> BTreeMap<IntentLabel, usize> {
    let mut counts: BTreeMap<IntentLabel, usize> =
        mix.iter().map(|(&i, &p)| (i, (p * n as f64).floor() as usize)).collect();
    let mut rest: Vec<(IntentLabel, f64)> =
        mix.iter().map(|(&i, &p)| (i, p * n as f64 - (p * n as f64).floor())).collect();
    rest.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let assigned: usize = counts.values().sum();
    for (i, _) in rest.into_iter().take(n - assigned) {
        *counts.get_mut(&i).expect("present") += 1;
    }
    counts
}

#[derive(Default)]
struct Draws {
    n_queries: usize,
    click_ranks: Vec<u32>,
    dwell_ms: Vec<i64>,
    hover_ranks: Vec<u32>,
    hover_ms: Vec<i64>,
    extra_pages: usize,
    gaps_ms: Vec<i64>,
}

/// Stratified draws for every session of one intent.
fn draw_population(
    p: &IntentProfile,
    d: &Distributions,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Draws>> {
    let q = p.queries_per_session;
    let u_q = stratified_uniforms(n, rng);
    let u_c = stratified_uniforms(n, rng);
    let u_h = stratified_uniforms(n, rng);
    let u_p = stratified_uniforms(n, rng);
    let mut out: Vec<Draws> = Vec::with_capacity(n);
    let mut counts = Vec::with_capacity(n);
    for s in 0..n {
        let nq = 1 + poisson_quantile(u_q[s], q - 1.0) as usize;
        let f = nq as f64 / q;
        let c = poisson_quantile(u_c[s], f * p.clicks_per_session) as usize;
        let h = poisson_quantile(u_h[s], f * p.hovers_per_session) as usize;
        let e = poisson_quantile(u_p[s], f * (p.pages_per_session - q)) as usize;
        counts.push((nq, c, h, e));
    }
    let total = |sel: fn(&(usize, usize, usize, usize)) -> usize| counts.iter().map(sel).sum::<usize>();
    let n_c = total(|t| t.1);
    let n_h = total(|t| t.2);
    let n_g = total(|t| t.0 + t.1 + t.2 + t.3);

    let click_geom = TruncatedGeometric::with_mean(p.avg_click_rank)?;
    let hover_geom = TruncatedGeometric::with_mean(p.avg_hover_rank)?;
    let (mu, sigma) = p.dwell_lognormal()?;
    let hs = d.hover_time_sigma;
    let hmu = p.avg_hover_time_seconds.ln() - hs * hs / 2.0;
    let gap = p.mean_gap_seconds();

    let click_ranks: Vec<u32> = stratified_uniforms(n_c, rng).into_iter().map(|u| click_geom.quantile(u)).collect();
    let dwell: Vec<i64> = stratified_uniforms(n_c, rng)
        .into_iter()
        .map(|u| to_ms((mu + sigma * normal_quantile(u)).exp().min(d.max_click_dwell_seconds)))
        .collect();
    let hover_ranks: Vec<u32> = stratified_uniforms(n_h, rng).into_iter().map(|u| hover_geom.quantile(u)).collect();
    let hover: Vec<i64> = stratified_uniforms(n_h, rng)
        .into_iter()
        .map(|u| to_ms((hmu + hs * normal_quantile(u)).exp()).max(1))
        .collect();
    let gaps: Vec<i64> = stratified_uniforms(n_g, rng)
        .into_iter()
        .map(|u| to_ms((-gap * (1.0 - u).ln()).min(d.max_action_gap_seconds)))
        .collect();

    let (mut ci, mut hi, mut gi) = (0, 0, 0);
    for (nq, c, h, e) in counts {
        let g = nq + c + h + e;
        out.push(Draws {
            n_queries: nq,
            click_ranks: click_ranks[ci..ci + c].to_vec(),
            dwell_ms: dwell[ci..ci + c].to_vec(),
            hover_ranks: hover_ranks[hi..hi + h].to_vec(),
            hover_ms: hover[hi..hi + h].to_vec(),
            extra_pages: e,
            gaps_ms: gaps[gi..gi + g].to_vec(),
        });
        ci += c;
        hi += h;
        gi += g;
    }
    Ok(out)
}

enum Action {
    Click(u32, i64),
    Hover(u32, i64),
    Page,
}

struct Built {
    events: Vec<RawEvent>,
    duration_ms: i64,
    idle_ms: i64,
}

fn query_text(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(2..=5);
    index::sample(rng, VOCABULARY.len(), n)
        .into_iter()
        .map(|i| VOCABULARY[i])
        .collect::<Vec<_>>()
        .join(" ")
}

fn results_page(rng: &mut ChaCha8Rng, pool: usize) -> Vec<String> {
    index::sample(rng, pool, RESULTS_PER_PAGE.min(pool))
        .into_iter()
        .map(doc_id)
        .collect()
}

fn build_session(
    p: &IntentProfile,
    d: &Distributions,
    draws: Draws,
    doc_pool: usize,
    reasons: &[ClickReason],
    rng: &mut ChaCha8Rng,
) -> Built {
    let nq = draws.n_queries;
    let mut per_query: Vec<Vec<Action>> = (0..nq).map(|_| Vec::new()).collect();
    for (r, w) in draws.click_ranks.into_iter().zip(draws.dwell_ms) {
        per_query[rng.random_range(0..nq)].push(Action::Click(r, w));
    }
    for (r, w) in draws.hover_ranks.into_iter().zip(draws.hover_ms) {
        per_query[rng.random_range(0..nq)].push(Action::Hover(r, w));
    }
    for _ in 0..draws.extra_pages {
        per_query[rng.random_range(0..nq)].push(Action::Page);
    }
    let mut gaps = draws.gaps_ms.into_iter();
    let mut gap = || gaps.next().expect("one gap per action and query");

    let mut events = Vec::new();
    let mut t = 0i64;
    for (j, mut actions) in per_query.into_iter().enumerate() {
        actions.shuffle(rng);
        let mut q = RawEvent::query("", t, &query_text(rng));
        q.serp_page = Some(1);
        q.results = Some(results_page(rng, doc_pool));
        if j == 0 {
            q.intent = Some(LabelValue::Intent(p.intent));
        }
        events.push(q);
        let mut page = 1;
        let mut clicked = false;
        let mut sats = false;
        for a in actions {
            t += gap();
            match a {
                Action::Click(rank, dwell) => {
                    events.push(RawEvent::ranked("", t, EventKind::ResultClick, rank));
                    t += dwell;
                    events.push(RawEvent::new("", t, EventKind::PageLeave));
                    clicked = true;
                    sats |= dwell as f64 / 1000.0 >= SATS_DWELL_SECONDS;
                }
                Action::Hover(rank, dur) => {
                    events.push(RawEvent::ranked("", t, EventKind::ResultHoverEnter, rank));
                    t += dur;
                    events.push(RawEvent::ranked("", t, EventKind::ResultHoverExit, rank));
                }
                Action::Page => {
                    page += 1;
                    let mut e = RawEvent::new("", t, EventKind::SerpPageView);
                    e.serp_page = Some(page);
                    e.results = Some(results_page(rng, doc_pool));
                    events.push(e);
                }
            }
        }
        t += gap();
        events.push(RawEvent::new("", t, EventKind::PageLeave));

        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut rating = 5i32;
        for (k, pk) in p.satisfaction_probs.iter().enumerate() {
            acc += pk;
            if u < acc {
                rating = k as i32 + 1;
                break;
            }
        }
        rating += if sats { 1 } else if !clicked { -1 } else { 0 };
        let mut fb = RawEvent::new("", t, EventKind::ExplicitFeedback);
        fb.payload = Some(Feedback {
            satisfaction: Some(rating.clamp(1, 5) as u8),
            click_reasons: clicked.then(|| reasons.to_vec()),
        });
        events.push(fb);
    }
    let min_idle = d.min_session_idle_minutes * 60_000.0;
    let idle_ms = (min_idle - MEAN_EXTRA_IDLE_MS * (1.0 - rng.random::<f64>()).ln()).round() as i64;
    Built {
        events,
        duration_ms: t,
        idle_ms,
    }
}

/// Generates a raw event log. Sessions are assigned to users round-robin
/// and every session starts well past the session gap after the user's
/// previous one. Events come out in time order.
pub fn generate_sessions(
    profiles: &ProfileSet,
    mix: &BTreeMap<IntentLabel, f64>,
    config: &SessionGenConfig,
) -> Result<Vec<RawEvent>> {
    validate_mix(mix)?;
    if config.n_users == 0 || config.doc_pool == 0 {
        return Err(Error::validation("n_users and doc_pool must be positive"));
    }
    let d = &profiles.distributions;
    let counts = allocate(mix, config.n_sessions);
    let mut master = ChaCha8Rng::seed_from_u64(config.seed);
    let mut intents: Vec<IntentLabel> = counts
        .iter()
        .flat_map(|(&i, &n)| std::iter::repeat_n(i, n))
        .collect();
    intents.shuffle(&mut master);

    let mut draws: Vec<Option<Draws>> = (0..intents.len()).map(|_| None).collect();
    for (&intent, &n) in &counts {
        if n == 0 {
            continue;
        }
        let profile = profiles.get(intent)?;
        profile.validate()?;
        let population = draw_population(profile, d, n, &mut master)?;
        let slots = intents.iter().enumerate().filter(|(_, &i)| i == intent).map(|(k, _)| k);
        for (slot, dr) in slots.zip(population) {
            draws[slot] = Some(dr);
        }
    }

    let mut jobs: Vec<(usize, IntentLabel, Draws)> = Vec::with_capacity(intents.len());
    for (k, (intent, dr)) in intents.iter().zip(draws).enumerate() {
        jobs.push((k, *intent, dr.expect("every slot drawn")));
    }
    let reasons = user_reasons(profiles, &counts, config)?;
    let built: Vec<Built> = jobs
        .into_par_iter()
        .map(|(k, intent, dr)| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(k as u64 + 1);
            let profile = profiles.get(intent).expect("validated above");
            let fixed = &reasons[&(k % config.n_users, intent)];
            build_session(profile, d, dr, config.doc_pool, fixed, &mut rng)
        })
        .collect();

    let mut clock: Vec<i64> = (0..config.n_users as i64).map(|u| BASE_TIME_MS + u * 60_000).collect();
    let mut events = Vec::new();
    for (k, b) in built.into_iter().enumerate() {
        let u = k % config.n_users;
        let start = clock[u];
        let user = format!("u{u:03}");
        for mut e in b.events {
            e.user_id.clone_from(&user);
            e.timestamp += start;
            events.push(e);
        }
        clock[u] = start + b.duration_ms + b.idle_ms;
    }
    events.sort_by_key(|e| e.timestamp);
    Ok(events)
}

/// One click-reason answer per user and intent, reported on every clicked
/// query of that user's sessions with the intent.
fn user_reasons(
    profiles: &ProfileSet,
    counts: &BTreeMap<IntentLabel, usize>,
    config: &SessionGenConfig,
) -> Result<BTreeMap<(usize, IntentLabel), Vec<ClickReason>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(u64::MAX - 1);
    let mut out = BTreeMap::new();
    for &intent in counts.keys() {
        let probs = &profiles.get(intent)?.click_reason_probs;
        for u in 0..config.n_users {
            let chosen = ClickReason::ALL
                .into_iter()
                .filter(|r| rng.random::<f64>() < probs.get(r).copied().unwrap_or(0.0))
                .collect();
            out.insert((u, intent), chosen);
        }
    }
    Ok(out)
}

/// A document collection covering the pool used by [`generate_sessions`].
pub fn generate_corpus(doc_pool: usize, seed: u64) -> Result<Corpus> {
    let mut corpus = Corpus::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    for k in 0..doc_pool {
        let topics = index::sample(&mut rng, VOCABULARY.len(), 5).into_vec();
        let len = rng.random_range(40..=120);
        let terms: Vec<String> = (0..len)
            .map(|_| {
                let w = if rng.random::<f64>() < 0.5 {
                    topics[rng.random_range(0..topics.len())]
                } else {
                    rng.random_range(0..VOCABULARY.len())
                };
                VOCABULARY[w].to_string()
            })
            .collect();
        corpus.add_document(&doc_id(k), &terms)?;
    }
    Ok(corpus)
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    normal_quantile(rng.random::<f64>().clamp(1e-12, 1.0 - 1e-12))
}

/// +1 for the intents whose satisfaction rises with dwell, -1 otherwise.
pub fn confound_sign(intent: IntentLabel) -> f64 {
    match intent {
        IntentLabel::ParticularCase | IntentLabel::Penalty => 1.0,
        _ => -1.0,
    }
}

/// Satisfaction instances whose dwell-label relation flips sign across
/// intents: `logit = 0.8 z_shared + 2 sign(intent) z_dwell`. Pooled over
/// intents the dwell signal cancels.
pub fn generate_confounded_satisfaction(n: usize, seed: u64) -> Vec<SatInstance> {
    (0..n)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let intent = IntentLabel::STUDIED[k % 4];
            let shared = standard_normal(&mut rng);
            let z = standard_normal(&mut rng);
            let logit = 0.8 * shared + 2.0 * confound_sign(intent) * z;
            let label = (rng.random::<f64>() < 1.0 / (1.0 + (-logit).exp())) as u8;

            let clicks = 1.0 + (1.0 + shared).max(0.0).round();
            let hovers = clicks + rng.random_range(0..8) as f64;
            let max_rr = 1.0 / rng.random_range(1..=3) as f64;
            let min_rr = max_rr / rng.random_range(1..=4) as f64;
            let dwell = (3.5 + 0.8 * z).exp();
            let terms = rng.random_range(2..=5) as f64;
            let max_hover = rng.random_range(2..=10) as f64;
            let features = SatFeatures {
                num_clicks: clicks,
                click_through_rate: clicks / 10.0,
                max_rr,
                min_rr,
                mean_rr: 0.5 * (max_rr + min_rr),
                num_hovers: hovers,
                p_click_given_hover: (clicks / hovers).min(1.0),
                avg_skipped_between_hovers: rng.random_range(0.0..2.0),
                max_hover_rank: max_hover,
                min_hover_rank: 1.0,
                mean_hover_rank: 0.5 * (1.0 + max_hover),
                serp_dwell: -20.0 * (1.0 - rng.random::<f64>()).ln(),
                landing_dwell: dwell * clicks,
                time_to_first_click: -8.0 * (1.0 - rng.random::<f64>()).ln(),
                avg_hover_dwell: (0.8 + 0.6 * standard_normal(&mut rng)).exp(),
                avg_click_dwell: dwell,
                query_length_chars: terms * 7.0 + rng.random_range(0..5) as f64,
                num_query_terms: terms,
                unique_term_ratio: 1.0,
                num_visited_pages: rng.random_range(1..=3) as f64,
            };
            SatInstance {
                query_id: format!("c{k:05}"),
                session_id: None,
                features,
                imputed: ImputedFlags::default(),
                intent: Some(intent),
                label,
            }
        })
        .collect()
}

/// Click probability of a document as a function of its features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RelevanceFn {
    /// `p = x[feature]`.
    Linear { feature: usize },
    /// `p = 1` when `x[feature] > threshold`, else 0.
    Indicator { feature: usize, threshold: f64 },
}

impl RelevanceFn {
    pub fn feature(self) -> usize {
        match self {
            RelevanceFn::Linear { feature } | RelevanceFn::Indicator { feature, .. } => feature,
        }
    }

    pub fn prob(self, x: &[f64; N_FEATURES]) -> f64 {
        match self {
            RelevanceFn::Linear { feature } => x[feature],
            RelevanceFn::Indicator { feature, threshold } => (x[feature] > threshold) as u8 as f64,
        }
    }

    fn validate(self) -> Result<()> {
        if self.feature() >= N_FEATURES {
            return Err(Error::validation("relevance feature out of range"));
        }
        if let RelevanceFn::Indicator { threshold, .. } = self {
            if !(threshold < 1.0) {
                return Err(Error::validation(
                    "indicator threshold leaves every click probability at zero",
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingGenConfig {
    pub n_queries: usize,
    pub docs_per_query: usize,
    /// Weight of the intent-independent click component.
    pub noise: f64,
    pub seed: u64,
    pub functions: BTreeMap<IntentLabel, RelevanceFn>,
}

impl RankingGenConfig {
    /// Each studied intent clicks on a different feature, as set in the
    /// profiles.
    pub fn conflicting(profiles: &ProfileSet, seed: u64) -> Result<Self> {
        let functions = IntentLabel::STUDIED
            .iter()
            .map(|&i| {
                Ok((
                    i,
                    RelevanceFn::Linear {
                        feature: profiles.get(i)?.relevance_feature,
                    },
                ))
            })
            .collect::<Result<_>>()?;
        Ok(RankingGenConfig {
            n_queries: 400,
            docs_per_query: 10,
            noise: 0.1,
            seed,
            functions,
        })
    }
}

/// Feature vectors are drawn directly (uniform on `[0, 1)`), and clicks are
/// Bernoulli with `(1 - noise) f(x) + noise * 0.3`. Queries without a click
/// are dropped. Query intents cycle through the configured functions.
pub fn generate_ranking_data(config: &RankingGenConfig) -> Result<Vec<RankingInstance>> {
    if config.functions.is_empty() {
        return Err(Error::validation("no relevance functions given"));
    }
    if !(0.0..=1.0).contains(&config.noise) {
        return Err(Error::validation("noise must lie in [0, 1]"));
    }
    if config.docs_per_query == 0 {
        return Err(Error::validation("docs_per_query must be positive"));
    }
    for f in config.functions.values() {
        f.validate()?;
    }
    let fns: Vec<(IntentLabel, RelevanceFn)> = config.functions.iter().map(|(&i, &f)| (i, f)).collect();
    let groups: Vec<Vec<RankingInstance>> = (0..config.n_queries)
        .into_par_iter()
        .map(|q| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(q as u64);
            let (intent, f) = fns[q % fns.len()];
            let query_id = format!("q{q:05}");
            (0..config.docs_per_query)
                .map(|d| {
                    let features: [f64; N_FEATURES] = std::array::from_fn(|_| rng.random());
                    let p = (1.0 - config.noise) * f.prob(&features) + config.noise * NOISE_CLICK_RATE;
                    RankingInstance {
                        query_id: query_id.clone(),
                        doc_id: format!("{query_id}-d{d:02}"),
                        features,
                        relevance: (rng.random::<f64>() < p) as u8,
                        intent,
                        session_id: None,
                    }
                })
                .collect()
        })
        .collect();
    Ok(groups
        .into_iter()
        .filter(|g| g.iter().any(|i| i.relevance == 1))
        .flatten()
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::{measure_samples, Grouping};
    use crate::session_log::{split_sessions, SplitConfig};
    use crate::stats::special::normal_cdf;

    fn shipped() -> ProfileSet {
        ProfileSet::shipped().unwrap()
    }

    #[test]
    fn shipped_profiles_load() {
        let set = shipped();
        assert_eq!(set.profiles.len(), 5);
        assert_eq!(set.get(IntentLabel::Penalty).unwrap().queries_per_session, 9.0);
        let mix = set.intent_mix();
        assert!((mix.values().sum::<f64>() - 1.0).abs() < 1e-12);
        for p in &set.profiles {
            assert!(p.mean_gap_seconds() > 0.0, "{}", p.intent);
        }
    }

    #[test]
    fn dwell_parameters_hit_both_moments() {
        for p in &shipped().profiles {
            let (mu, sigma) = p.dwell_lognormal().unwrap();
            assert!(((mu + sigma * sigma / 2.0).exp() - p.avg_click_dwell_seconds).abs() < 1e-9);
            let share = 1.0 - normal_cdf((SATS_DWELL_SECONDS.ln() - mu) / sigma);
            assert!((share - p.pct_sats_click).abs() < 1e-6);
        }
    }

    #[test]
    fn truncated_geometric_mean_and_support() {
        for m in [1.0, 1.5, 2.823, 4.189, 5.5, 9.0] {
            let g = TruncatedGeometric::with_mean(m).unwrap();
            assert!((g.mean() - m).abs() < 1e-9, "{m}");
            let exact: f64 = (0..10000).map(|k| g.quantile((k as f64 + 0.5) / 1e4) as f64).sum::<f64>() / 1e4;
            assert!((exact - m).abs() < 2e-3, "{m} {exact}");
        }
        assert!(TruncatedGeometric::with_mean(0.5).is_err());
    }

    #[test]
    fn poisson_quantile_matches_cdf() {
        let lambda = 3.7;
        let mean: f64 = (0..20000).map(|k| poisson_quantile((k as f64 + 0.5) / 2e4, lambda) as f64).sum::<f64>() / 2e4;
        assert!((mean - lambda).abs() < 1e-3);
        assert_eq!(poisson_quantile(0.3, 0.0), 0);
    }

    #[test]
    fn largest_remainder_allocation() {
        let mix = ProfileSet::uniform_mix(&IntentLabel::STUDIED[..3]);
        let c = allocate(&mix, 10);
        assert_eq!(c.values().sum::<usize>(), 10);
        assert_eq!(c[&IntentLabel::ParticularCase], 4);
    }

    #[test]
    fn mix_validation() {
        let mut mix = BTreeMap::new();
        mix.insert(IntentLabel::Characterization, 0.7);
        let cfg = SessionGenConfig { n_sessions: 5, ..Default::default() };
        assert!(generate_sessions(&shipped(), &mix, &cfg).is_err());
    }

    #[test]
    fn single_intent_mix_labels_everything() {
        let mix = BTreeMap::from([(IntentLabel::Characterization, 1.0)]);
        let cfg = SessionGenConfig { n_sessions: 40, seed: 3, ..Default::default() };
        let log = generate_sessions(&shipped(), &mix, &cfg).unwrap();
        let out = split_sessions(&log, &SplitConfig::default()).unwrap();
        assert_eq!(out.sessions.len(), 40);
        assert!(out
            .sessions
            .iter()
            .all(|s| s.intent == Some(LabelValue::Intent(IntentLabel::Characterization))));
        assert_eq!(out.warnings.orphan_events, 0);
    }

    #[test]
    fn deterministic_per_seed() {
        let set = shipped();
        let mix = set.intent_mix();
        let cfg = SessionGenConfig { n_sessions: 60, seed: 11, ..Default::default() };
        let a = serde_json::to_string(&generate_sessions(&set, &mix, &cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&generate_sessions(&set, &mix, &cfg).unwrap()).unwrap();
        assert_eq!(a, b);
        let other = SessionGenConfig { seed: 12, ..cfg };
        let c = serde_json::to_string(&generate_sessions(&set, &mix, &other).unwrap()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn small_penalty_fixture_is_calibrated() {
        let set = shipped();
        let p = set.get(IntentLabel::Penalty).unwrap();
        let mix = BTreeMap::from([(IntentLabel::Penalty, 1.0)]);
        let cfg = SessionGenConfig { n_sessions: 30, seed: 2024, ..Default::default() };
        let log = generate_sessions(&set, &mix, &cfg).unwrap();
        let sessions = split_sessions(&log, &SplitConfig::default()).unwrap().sessions;
        assert_eq!(sessions.len(), 30);
        let samples = measure_samples(&sessions, Grouping::Intent, SATS_DWELL_SECONDS);
        for m in Measure::ALL {
            let Some(target) = p.target(m) else { continue };
            let v = &samples[&m][IntentLabel::Penalty.index()];
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            assert!((mean / target - 1.0).abs() <= 0.05, "{}: {mean} vs {target}", m.name());
        }
    }

    #[test]
    fn ranking_data_shapes() {
        let mut cfg = RankingGenConfig::conflicting(&shipped(), 1).unwrap();
        cfg.n_queries = 20;
        let data = generate_ranking_data(&cfg).unwrap();
        assert!(data.len() <= 200 && data.len() >= 190);
        cfg.docs_per_query = 1;
        cfg.noise = 0.0;
        let one = generate_ranking_data(&cfg).unwrap();
        assert!(one.iter().all(|i| i.relevance == 1));
        assert!(one.len() < 20);
        cfg.functions = BTreeMap::from([(
            IntentLabel::Penalty,
            RelevanceFn::Indicator { feature: 0, threshold: 1.0 },
        )]);
        assert!(generate_ranking_data(&cfg).is_err());
    }

    #[test]
    fn confounded_data_flips_sign() {
        let data = generate_confounded_satisfaction(4000, 5);
        for intent in IntentLabel::STUDIED {
            let (mut pos, mut neg) = (Vec::new(), Vec::new());
            for d in data.iter().filter(|d| d.intent == Some(intent)) {
                if d.label == 1 { pos.push(d.features.avg_click_dwell.ln()) } else { neg.push(d.features.avg_click_dwell.ln()) }
            }
            let diff = pos.iter().sum::<f64>() / pos.len() as f64 - neg.iter().sum::<f64>() / neg.len() as f64;
            assert_eq!(diff.signum(), confound_sign(intent), "{intent}");
        }
    }
}
