mod report;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use intentir::behavior::{self, Grouping, ONLINE_METRICS};
use intentir::boosting::BoostParams;
use intentir::io::{read_jsonl, write_jsonl};
use intentir::ltr::{self, trec, Algorithm, CvConfig, IntentMode, RankingInstance, TrainParams};
use intentir::satisfaction::{self, FeatureGroup, SatInstance};
use intentir::session_log::{self, RawEvent, Session, SessionSummary, SplitConfig};
use intentir::synth::{self, ProfileSet, RankingGenConfig, SessionGenConfig};
use intentir::taxonomy::{self, AnnotationSet};
use intentir::text::{Bm25Params, Corpus, Tokenizer};
use intentir::{Error, IntentLabel, LabelValue, Result};
use report::{num, opt, write_report, Format, Header, Table};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "intentir", version, about = "Intent-aware legal case retrieval analytics")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(short, long, global = true)]
    #[serde(skip)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum Command {
    /// Split a raw event log into sessions and summarize.
    Sessions(SessionsArgs),
    /// Majority-vote label per annotated item.
    Aggregate(InputArg),
    /// Fleiss's kappa among annotators.
    Kappa(InputArg),
    /// Share of each aggregated label.
    Distribution(InputArg),
    /// Intent co-occurrence inside Multi items.
    Cooccurrence(InputArg),
    /// Behavioral measures by intent group with significance tests.
    Behavior(BehaviorArgs),
    /// Online metric correlation with satisfaction, or click reasons.
    Correlate(CorrelateArgs),
    /// Satisfaction prediction AUC per feature group and intent setting.
    Sat(SatArgs),
    /// Cross-validated learning to rank, agnostic and intent-aware.
    Rank(RankArgs),
    /// Generate calibrated synthetic data.
    Synth(SynthArgs),
}

#[derive(Debug, Args, Serialize)]
struct InputArg {
    input: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct SplitArgs {
    /// Inactivity gap that starts a new session.
    #[arg(long, default_value_t = 30.0)]
    gap_minutes: f64,
    #[arg(long, default_value_t = 0)]
    min_hover_ms: i64,
    /// Keep sessions whose longest query has at least this many terms.
    #[arg(long, default_value_t = 2)]
    min_terms: usize,
}

#[derive(Debug, Args, Serialize)]
struct SessionsArgs {
    input: PathBuf,
    #[command(flatten)]
    split: SplitArgs,
    /// Write the kept sessions' events, with session ids, as JSONL.
    #[arg(long)]
    #[serde(skip)]
    events_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
enum By {
    Intent,
    Criterion1,
    Criterion3,
}

#[derive(Debug, Args, Serialize)]
struct BehaviorArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = By::Intent)]
    by: By,
    /// Dwell at or above which a click counts as satisfied.
    #[arg(long, default_value_t = behavior::SATS_DWELL_SECONDS)]
    sats_dwell: f64,
    #[command(flatten)]
    split: SplitArgs,
}

#[derive(Debug, Args, Serialize)]
struct CorrelateArgs {
    input: PathBuf,
    /// Report click-reason shares per intent instead.
    #[arg(long)]
    click_reasons: bool,
    #[command(flatten)]
    split: SplitArgs,
}

#[derive(Debug, Args, Serialize)]
struct BoostArgs {
    #[arg(long, default_value_t = 300)]
    trees: usize,
    #[arg(long, default_value_t = 0.1)]
    learning_rate: f64,
    #[arg(long, default_value_t = 6)]
    max_depth: usize,
    #[arg(long, default_value_t = 5)]
    min_leaf: usize,
}

impl BoostArgs {
    fn params(&self, seed: u64) -> BoostParams {
        BoostParams {
            n_trees: self.trees,
            learning_rate: self.learning_rate,
            max_depth: self.max_depth,
            min_samples_leaf: self.min_leaf,
            subsample: 1.0,
            seed,
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct SatArgs {
    input: PathBuf,
    /// The input holds satisfaction instances rather than raw events.
    #[arg(long)]
    instances: bool,
    /// Comma-separated feature groups: click, hover, dwell, query, all.
    #[arg(long, default_value = "click,hover,dwell,query,all")]
    groups: String,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[command(flatten)]
    boost: BoostArgs,
    #[command(flatten)]
    split: SplitArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
enum Algo {
    Adarank,
    Rankboost,
    Lambdamart,
    All,
}

impl Algo {
    fn algorithms(self) -> Vec<Algorithm> {
        match self {
            Algo::Adarank => vec![Algorithm::AdaRank],
            Algo::Rankboost => vec![Algorithm::RankBoost],
            Algo::Lambdamart => vec![Algorithm::LambdaMart],
            Algo::All => Algorithm::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct RankArgs {
    /// Ranking instances (JSONL), or a raw event log with `--corpus`.
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Algo::All)]
    algo: Algo,
    /// Also evaluate per-intent sub-rankers and report the improvement.
    #[arg(long)]
    intent_aware: bool,
    /// Give every intent the agnostic model (degenerate mixture).
    #[arg(long, requires = "intent_aware")]
    shared_model: bool,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 0.1)]
    val_fraction: f64,
    #[arg(long, default_value_t = 100)]
    adarank_rounds: usize,
    #[arg(long, default_value_t = 300)]
    rankboost_rounds: usize,
    #[command(flatten)]
    boost: BoostArgs,
    /// Derive labels from clicks in an event log over this corpus.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[command(flatten)]
    split: SplitArgs,
    /// Write test-fold scores in TREC run format.
    #[arg(long)]
    #[serde(skip)]
    run_out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    qrels_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
enum SynthKind {
    Sessions,
    Corpus,
    Ranking,
    Satisfaction,
}

#[derive(Debug, Args, Serialize)]
struct SynthArgs {
    /// Calibration profiles; the shipped ones by default.
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SynthKind::Sessions)]
    kind: SynthKind,
    /// Sessions, documents, queries or instances to generate.
    #[arg(long, default_value_t = 500)]
    n: usize,
    /// `query-log`, `uniform`, `studied` or a single intent code.
    #[arg(long, default_value = "query-log")]
    mix: String,
    #[arg(long, default_value_t = 36)]
    users: usize,
    #[arg(long, default_value_t = 1000)]
    doc_pool: usize,
    #[arg(long, default_value_t = 10)]
    docs_per_query: usize,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
}

fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

fn check_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(validation(format!("input file {} not found", path.display())))
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Sessions(_) => "sessions",
            Command::Aggregate(_) => "aggregate",
            Command::Kappa(_) => "kappa",
            Command::Distribution(_) => "distribution",
            Command::Cooccurrence(_) => "cooccurrence",
            Command::Behavior(_) => "behavior",
            Command::Correlate(_) => "correlate",
            Command::Sat(_) => "sat",
            Command::Rank(_) => "rank",
            Command::Synth(_) => "synth",
        }
    }

    fn inputs(&self) -> Vec<&Path> {
        match self {
            Command::Sessions(a) => vec![&a.input],
            Command::Aggregate(a) | Command::Kappa(a) | Command::Distribution(a) | Command::Cooccurrence(a) => {
                vec![&a.input]
            }
            Command::Behavior(a) => vec![&a.input],
            Command::Correlate(a) => vec![&a.input],
            Command::Sat(a) => vec![&a.input],
            Command::Rank(a) => std::iter::once(a.input.as_path()).chain(a.corpus.as_deref()).collect(),
            Command::Synth(a) => a.profile.as_deref().into_iter().collect(),
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn read_annotations(path: &Path) -> Result<Vec<AnnotationSet>> {
    let sets: Vec<AnnotationSet> = read_jsonl(open(path)?)?;
    taxonomy::validate_collection(&sets)?;
    Ok(sets)
}

/// JSON text with leading `#` lines removed.
fn read_commented_json(path: &Path) -> Result<String> {
    let text = std::fs::read_to_string(path)?;
    Ok(text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n"))
}

fn load_sessions(path: &Path, split: &SplitArgs) -> Result<(Vec<Session>, SessionSummary)> {
    let events: Vec<RawEvent> = read_jsonl(open(path)?)?;
    let config = SplitConfig {
        gap_minutes: split.gap_minutes,
        min_hover_ms: split.min_hover_ms,
    };
    let out = session_log::split_sessions(&events, &config)?;
    let n_split = out.sessions.len();
    let kept = session_log::filter_sessions(out.sessions, split.min_terms, &Tokenizer::default());
    let summary = SessionSummary {
        events_in: events.len(),
        sessions_split: n_split,
        sessions_kept: kept.len(),
        queries_kept: kept.iter().map(|s| s.queries.len()).sum(),
        dropped_orphan_events: out.warnings.orphan_events,
        unmatched_hover_exits: out.warnings.unmatched_hover_exits,
        short_hovers: out.warnings.short_hovers,
    };
    Ok((kept, summary))
}

struct Ctx<'a> {
    cli: &'a Cli,
    header: Header,
}

impl Ctx<'_> {
    fn emit(self, table: &Table, json: &impl Serialize) -> Result<()> {
        match &self.cli.output {
            Some(p) => write_report(create(p)?, self.cli.format, &self.header, table, json),
            None => write_report(std::io::stdout().lock(), self.cli.format, &self.header, table, json),
        }
    }

    fn emit_data<T: Serialize>(self, records: &[T]) -> Result<()> {
        let mut w: Box<dyn Write> = match &self.cli.output {
            Some(p) => Box::new(create(p)?),
            None => Box::new(BufWriter::new(std::io::stdout().lock())),
        };
        w.write_all(self.header.comment_lines().as_bytes())?;
        write_jsonl(w, records)
    }
}

fn cmd_sessions(ctx: Ctx, a: &SessionsArgs) -> Result<()> {
    let (sessions, summary) = load_sessions(&a.input, &a.split)?;
    if let Some(p) = &a.events_out {
        let mut w = create(p)?;
        w.write_all(ctx.header.comment_lines().as_bytes())?;
        write_jsonl(w, &session_events(&sessions))?;
    }
    let mut t = Table::new(["key", "value"]);
    let v = serde_json::to_value(summary)?;
    for (k, x) in v.as_object().into_iter().flatten() {
        t.push(vec![k.clone(), x.to_string()]);
    }
    ctx.emit(&t, &summary)
}

fn session_events(sessions: &[Session]) -> Vec<RawEvent> {
    session_log::session_events(sessions)
}

fn cmd_aggregate(ctx: Ctx, a: &InputArg) -> Result<()> {
    #[derive(Serialize)]
    struct Item {
        item_id: String,
        label: taxonomy::AnnotatorLabel,
    }
    let sets = read_annotations(&a.input)?;
    let mut items = Vec::with_capacity(sets.len());
    let mut t = Table::new(["item_id", "label", "potential_intents"]);
    for s in &sets {
        let label = taxonomy::aggregate_majority(s)?;
        let intents = label
            .potential_intents
            .iter()
            .flatten()
            .map(|i| i.code())
            .collect::<Vec<_>>()
            .join("|");
        t.push(vec![s.item_id.clone(), label.value.code().to_string(), intents]);
        items.push(Item {
            item_id: s.item_id.clone(),
            label,
        });
    }
    ctx.emit(&t, &items)
}

fn cmd_kappa(ctx: Ctx, a: &InputArg) -> Result<()> {
    #[derive(Serialize)]
    struct Kappa {
        items: usize,
        kappa: f64,
    }
    let sets = read_annotations(&a.input)?;
    let k = Kappa {
        items: sets.len(),
        kappa: taxonomy::annotation_kappa(&sets)?,
    };
    let mut t = Table::new(["items", "kappa"]);
    t.push(vec![k.items.to_string(), num(k.kappa)]);
    ctx.emit(&t, &k)
}

fn cmd_distribution(ctx: Ctx, a: &InputArg) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        label: LabelValue,
        count: usize,
        proportion: f64,
    }
    let sets = read_annotations(&a.input)?;
    let agg = sets
        .iter()
        .map(taxonomy::aggregate_majority)
        .collect::<Result<Vec<_>>>()?;
    let dist = taxonomy::intent_distribution(&agg)?;
    let mut rows = Vec::new();
    let mut t = Table::new(["label", "count", "proportion"]);
    for label in LabelValue::ALL {
        let Some(&p) = dist.get(&label) else { continue };
        let count = agg.iter().filter(|l| l.value == label).count();
        t.push(vec![label.code().to_string(), count.to_string(), num(p)]);
        rows.push(Row {
            label,
            count,
            proportion: p,
        });
    }
    ctx.emit(&t, &rows)
}

fn cmd_cooccurrence(ctx: Ctx, a: &InputArg) -> Result<()> {
    let sets = read_annotations(&a.input)?;
    let m = taxonomy::cooccurrence_matrix::<f64>(&sets)?;
    let mut t = Table::new(std::iter::once("intent").chain(IntentLabel::ALL.iter().map(|i| i.code())));
    for a in IntentLabel::ALL {
        let mut row = vec![a.code().to_string()];
        row.extend(IntentLabel::ALL.iter().map(|&b| num(m.get(a, b))));
        t.push(row);
    }
    let ctx = Ctx {
        header: ctx.header.note("pairs", m.pairs).note("skipped", m.skipped),
        ..ctx
    };
    ctx.emit(&t, &m)
}

fn cmd_behavior(ctx: Ctx, a: &BehaviorArgs) -> Result<()> {
    if !(a.sats_dwell >= 0.0) {
        return Err(validation("--sats-dwell must be non-negative"));
    }
    let (sessions, _) = load_sessions(&a.input, &a.split)?;
    let grouping = match a.by {
        By::Intent => Grouping::Intent,
        By::Criterion1 => Grouping::Criterion1,
        By::Criterion3 => Grouping::Criterion3,
    };
    let r = behavior::behavior_report(&sessions, grouping, a.sats_dwell)?;
    let mut cols = vec!["group".to_string(), "measure".to_string()];
    cols.extend(r.groups.iter().cloned());
    cols.extend(r.groups.iter().map(|g| format!("n_{g}")));
    cols.extend(["H", "p", "p_holm", "sig"].map(String::from));
    let mut t = Table::new(cols);
    for row in &r.rows {
        let mut cells = vec![row.group.label().to_string(), row.measure.label().to_string()];
        cells.extend(row.means.iter().map(|&m| opt(m)));
        cells.extend(row.counts.iter().map(|c| c.to_string()));
        cells.push(opt(row.test.as_ref().map(|t| t.statistic)));
        cells.push(opt(row.test.as_ref().map(|t| t.p_value)));
        cells.push(opt(row.p_holm));
        cells.push(row.stars().to_string());
        t.push(cells);
    }
    let ctx = Ctx {
        header: ctx
            .header
            .note("sessions_used", r.sessions_used)
            .note("sessions_skipped", r.sessions_skipped),
        ..ctx
    };
    ctx.emit(&t, &r)
}

fn cmd_correlate(ctx: Ctx, a: &CorrelateArgs) -> Result<()> {
    let (sessions, _) = load_sessions(&a.input, &a.split)?;
    if a.click_reasons {
        let r = behavior::click_reason_distribution(&sessions);
        let mut cols = vec!["reason".to_string()];
        cols.extend(r.intents.iter().map(|i| i.code().to_string()));
        cols.extend(["F", "p", "sig"].map(String::from));
        let mut t = Table::new(cols);
        for (reason, props) in &r.proportions {
            let mut cells = vec![format!("{reason:?}")];
            cells.extend(props.iter().map(|&p| num(p)));
            let test = r.anova.get(reason).and_then(Option::as_ref);
            cells.push(opt(test.map(|t| t.statistic)));
            cells.push(opt(test.map(|t| t.p_value)));
            cells.push(test.map_or("--", |t| behavior::stars(t.p_value)).to_string());
            t.push(cells);
        }
        let mut header = ctx.header.clone();
        if let Some(w) = &r.warning {
            header = header.note("warning", w);
        }
        return Ctx { header, ..ctx }.emit(&t, &r);
    }
    let r = behavior::satisfaction_correlations(&sessions, &IntentLabel::STUDIED)?;
    let mut cols = vec!["metric".to_string()];
    for i in &r.intents {
        cols.extend([format!("{i}_r"), format!("{i}_p"), format!("{i}_n")]);
    }
    let mut t = Table::new(cols);
    for metric in ONLINE_METRICS {
        let Some(cells) = r.cells.get(metric) else { continue };
        let mut row = vec![metric.to_string()];
        for c in cells {
            row.push(opt(c.test.as_ref().map(|t| t.statistic)));
            row.push(opt(c.test.as_ref().map(|t| t.p_value)));
            row.push(c.n.to_string());
        }
        t.push(row);
    }
    ctx.emit(&t, &r)
}

fn cmd_sat(ctx: Ctx, a: &SatArgs) -> Result<()> {
    let groups = a
        .groups
        .split(',')
        .map(|g| FeatureGroup::parse(g.trim()))
        .collect::<Result<Vec<_>>>()?;
    let instances: Vec<SatInstance> = if a.instances {
        let v: Vec<SatInstance> = read_jsonl(open(&a.input)?)?;
        for i in &v {
            i.validate()?;
        }
        v
    } else {
        let (sessions, _) = load_sessions(&a.input, &a.split)?;
        satisfaction::instances_from_sessions(&sessions, &Tokenizer::default())?
    };
    let seed = ctx.cli.seed;
    let table = satisfaction::table_report(&instances, &groups, a.folds, seed, &a.boost.params(seed))?;
    let mut t = Table::new(std::iter::once("group".to_string()).chain(table.columns.iter().cloned()));
    for (g, cells) in &table.rows {
        let mut row = vec![g.label().to_string()];
        row.extend(cells.iter().map(|c| opt(c.as_ref().map(|r| r.mean_auc))));
        t.push(row);
    }
    let ctx = Ctx {
        header: ctx.header.note("instances", instances.len()),
        ..ctx
    };
    ctx.emit(&t, &table)
}

fn load_ranking(a: &RankArgs) -> Result<Vec<RankingInstance>> {
    match &a.corpus {
        None => read_jsonl(open(&a.input)?),
        Some(cp) => {
            let corpus = Corpus::from_json(&read_commented_json(cp)?)?;
            let (sessions, _) = load_sessions(&a.input, &a.split)?;
            ltr::labels_from_clicks(&sessions, &corpus, &Tokenizer::default(), &Bm25Params::default())
        }
    }
}

fn cmd_rank(ctx: Ctx, a: &RankArgs) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        algorithm: Algorithm,
        model: &'static str,
        metrics: [f64; 4],
    }
    let instances = load_ranking(a)?;
    let groups = ltr::group_instances(&instances)?;
    let seed = ctx.cli.seed;
    let config = CvConfig {
        folds: a.folds,
        val_fraction: a.val_fraction,
        seed,
        params: TrainParams {
            adarank_rounds: a.adarank_rounds,
            rankboost_rounds: a.rankboost_rounds,
            boost: a.boost.params(seed),
        },
    };
    let aware_mode = if a.shared_model {
        IntentMode::AwareShared
    } else {
        IntentMode::Aware
    };
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for alg in a.algo.algorithms() {
        let base = ltr::cross_validate(&groups, alg, IntentMode::Agnostic, &config)?;
        rows.push(Row {
            algorithm: alg,
            model: "base",
            metrics: base.metrics.to_array(),
        });
        runs.push((format!("{}-base", alg.name()), base.run));
        if a.intent_aware {
            let aware = ltr::cross_validate(&groups, alg, aware_mode, &config)?;
            rows.push(Row {
                algorithm: alg,
                model: "intent-aware",
                metrics: aware.metrics.to_array(),
            });
            rows.push(Row {
                algorithm: alg,
                model: "improv.",
                metrics: ltr::relative_improvement(&base.metrics, &aware.metrics),
            });
            runs.push((format!("{}-aware", alg.name()), aware.run));
        }
    }
    if let Some(p) = &a.run_out {
        let mut w = create(p)?;
        for (tag, run) in &runs {
            trec::write_run(&mut w, run, tag)?;
        }
        w.flush()?;
    }
    if let Some(p) = &a.qrels_out {
        let mut w = create(p)?;
        trec::write_qrels(&mut w, &ltr::qrels_of(&groups))?;
        w.flush()?;
    }
    let mut t = Table::new(["algorithm", "model", "NDCG@5", "NDCG@10", "NDCG@15", "MAP"]);
    for r in &rows {
        let mut cells = vec![r.algorithm.name().to_string(), r.model.to_string()];
        cells.extend(r.metrics.iter().map(|&m| num(m)));
        t.push(cells);
    }
    let ctx = Ctx {
        header: ctx.header.note("query_groups", groups.len()),
        ..ctx
    };
    ctx.emit(&t, &rows)
}

fn parse_mix(spec: &str, set: &ProfileSet) -> Result<BTreeMap<IntentLabel, f64>> {
    match spec {
        "query-log" => Ok(set.intent_mix()),
        "uniform" => Ok(ProfileSet::uniform_mix(&IntentLabel::ALL)),
        "studied" => Ok(ProfileSet::uniform_mix(&IntentLabel::STUDIED)),
        code => Ok(BTreeMap::from([(code.parse::<IntentLabel>()?, 1.0)])),
    }
}

fn cmd_synth(ctx: Ctx, a: &SynthArgs) -> Result<()> {
    let set = match &a.profile {
        Some(p) => ProfileSet::from_json(&std::fs::read_to_string(p)?)?,
        None => ProfileSet::shipped()?,
    };
    let seed = ctx.cli.seed;
    match a.kind {
        SynthKind::Sessions => {
            let mix = parse_mix(&a.mix, &set)?;
            let config = SessionGenConfig {
                n_sessions: a.n,
                seed,
                n_users: a.users,
                doc_pool: a.doc_pool,
            };
            ctx.emit_data(&synth::generate_sessions(&set, &mix, &config)?)
        }
        SynthKind::Corpus => {
            let corpus = synth::generate_corpus(a.n, seed)?;
            let mut w: Box<dyn Write> = match &ctx.cli.output {
                Some(p) => Box::new(create(p)?),
                None => Box::new(std::io::stdout().lock()),
            };
            w.write_all(ctx.header.comment_lines().as_bytes())?;
            w.write_all(corpus.to_json()?.as_bytes())?;
            w.write_all(b"\n")?;
            w.flush()?;
            Ok(())
        }
        SynthKind::Ranking => {
            let config = RankingGenConfig {
                n_queries: a.n,
                docs_per_query: a.docs_per_query,
                noise: a.noise,
                ..RankingGenConfig::conflicting(&set, seed)?
            };
            ctx.emit_data(&synth::generate_ranking_data(&config)?)
        }
        SynthKind::Satisfaction => ctx.emit_data(&synth::generate_confounded_satisfaction(a.n, seed)),
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("INTENTIR_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| validation(format!("INTENTIR_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Io(std::io::Error::other(e)))
}

fn run(cli: &Cli) -> Result<()> {
    configure_threads()?;
    for p in cli.command.inputs() {
        check_file(p)?;
    }
    let ctx = Ctx {
        cli,
        header: Header::new(cli.command.name(), cli.seed, cli)?,
    };
    match &cli.command {
        Command::Sessions(a) => cmd_sessions(ctx, a),
        Command::Aggregate(a) => cmd_aggregate(ctx, a),
        Command::Kappa(a) => cmd_kappa(ctx, a),
        Command::Distribution(a) => cmd_distribution(ctx, a),
        Command::Cooccurrence(a) => cmd_cooccurrence(ctx, a),
        Command::Behavior(a) => cmd_behavior(ctx, a),
        Command::Correlate(a) => cmd_correlate(ctx, a),
        Command::Sat(a) => cmd_sat(ctx, a),
        Command::Rank(a) => cmd_rank(ctx, a),
        Command::Synth(a) => cmd_synth(ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 1 } else { 2 })
        }
    }
}
