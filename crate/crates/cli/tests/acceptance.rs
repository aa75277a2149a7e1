//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero when any fails.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use intentir::behavior::{self, Grouping, Measure};
use intentir::boosting::{gbdt_fit, gbdt_fit_with, BoostParams, FeatureMatrix, Objective};
use intentir::ltr::metrics::{average_precision, ndcg_at, rank_order};
use intentir::ltr::{self, Algorithm, CvConfig, IntentMode};
use intentir::satisfaction::{run_experiment, FeatureGroup, SatMode};
use intentir::session_log::{self, SplitConfig};
use intentir::stats::{self, Dof};
use intentir::synth::{self, ProfileSet, RankingGenConfig, SessionGenConfig};
use intentir::taxonomy::{aggregate_majority, AnnotationSet, AnnotatorLabel};
use intentir::text::Tokenizer;
use intentir::{IntentLabel, LabelValue};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Check = std::result::Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(what: &str, got: f64, want: f64, tol: f64) -> std::result::Result<(), String> {
    ensure((got - want).abs() <= tol, || format!("{what}: got {got}, want {want}"))
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

// Criterion 1 -------------------------------------------------------------

fn oracle_dcg(rels: &[bool], k: usize) -> f64 {
    let mut s = 0.0;
    for (i, &r) in rels.iter().enumerate() {
        let rank = i + 1;
        if rank <= k && r {
            s += 1.0 / ((rank + 1) as f64).log2();
        }
    }
    s
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn oracle_ndcg(rels: &[bool], k: usize, perms: &[Vec<usize>]) -> f64 {
    let ideal = perms
        .iter()
        .map(|p| oracle_dcg(&p.iter().map(|&i| rels[i]).collect::<Vec<_>>(), k))
        .fold(0.0, f64::max);
    if ideal == 0.0 {
        0.0
    } else {
        oracle_dcg(rels, k) / ideal
    }
}

fn oracle_ap(rels: &[bool]) -> f64 {
    let total = rels.iter().filter(|&&r| r).count();
    if total == 0 {
        return 0.0;
    }
    let mut s = 0.0;
    for k in 0..rels.len() {
        if rels[k] {
            let hits = rels[..=k].iter().filter(|&&r| r).count();
            s += hits as f64 / (k + 1) as f64;
        }
    }
    s / total as f64
}

fn oracle_auc(labels: &[bool], scores: &[f64]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for i in 0..labels.len() {
        for j in 0..labels.len() {
            if labels[i] && !labels[j] {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

/// Positions sorted by score descending, ties broken by id, by repeated
/// selection of the best remaining entry.
fn oracle_order(scores: &[f64], ids: &[String]) -> Vec<usize> {
    let mut left: Vec<usize> = (0..scores.len()).collect();
    let mut out = Vec::new();
    while !left.is_empty() {
        let mut best = 0;
        for c in 1..left.len() {
            let (a, b) = (left[c], left[best]);
            if scores[a] > scores[b] || (scores[a] == scores[b] && ids[a] < ids[b]) {
                best = c;
            }
        }
        out.push(left.remove(best));
    }
    out
}

fn criterion1() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let perms: Vec<Vec<Vec<usize>>> = (0..=7).map(permutations).collect();
    let mut worst = 0.0f64;
    for case in 0..1000 {
        let n = rng.random_range(1..=7);
        let ids: Vec<String> = (0..n).map(|i| format!("d{i}")).collect();
        let rel: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..5) as f64 / 4.0).collect();

        let ranked_lib: Vec<bool> = rank_order(&scores, &ids).into_iter().map(|i| rel[i]).collect();
        let ranked: Vec<bool> = oracle_order(&scores, &ids).into_iter().map(|i| rel[i]).collect();
        ensure(ranked_lib == ranked, || format!("case {case}: ranking order differs"))?;
        let n_rel = rel.iter().filter(|&&r| r).count();
        for k in [5, 10, 15] {
            let d = (ndcg_at::<f64>(&ranked, n_rel, k) - oracle_ndcg(&ranked, k, &perms[n])).abs();
            worst = worst.max(d);
        }
        worst = worst.max((average_precision::<f64>(&ranked, n_rel) - oracle_ap(&ranked)).abs());

        if n_rel > 0 && n_rel < n {
            let got = stats::auc(&rel, &scores).map_err(err)?;
            worst = worst.max((got - oracle_auc(&rel, &scores)).abs());
        }

        let clicks: Vec<u32> = (0..rng.random_range(1..=5)).map(|_| rng.random_range(1..=10)).collect();
        let (max_rr, min_rr, mean_rr) = behavior::reciprocal_rank_stats(&clicks);
        let rr: Vec<f64> = clicks.iter().map(|&r| 1.0 / r as f64).collect();
        let o_max = rr.iter().copied().fold(f64::MIN, f64::max);
        let o_min = rr.iter().copied().fold(f64::MAX, f64::min);
        let o_mean = rr.iter().sum::<f64>() / rr.len() as f64;
        for (a, b) in [(max_rr, o_max), (min_rr, o_min), (mean_rr, o_mean)] {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("max |delta| {worst:e} > 1e-9"))?;
    Ok(format!("1000 cases, max |delta| {worst:.1e}"))
}

// Criterion 2 -------------------------------------------------------------

fn criterion2() -> Check {
    let tol = 1e-9;
    let kw = stats::kruskal_wallis(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![7.0, 8.0, 9.0]]).map_err(err)?;
    close("KW H", kw.statistic, 7.2, tol)?;
    close("KW p", kw.p_value, (-3.6f64).exp(), tol)?;

    let holm = stats::holm_bonferroni(&[0.01, 0.02, 0.04]).map_err(err)?;
    for (g, w) in holm.iter().zip([0.03, 0.04, 0.04]) {
        close("Holm", *g, w, tol)?;
    }
    let holm = stats::holm_bonferroni(&[0.5, 0.9]).map_err(err)?;
    for g in holm {
        close("Holm cap", g, 1.0, tol)?;
    }

    let r = stats::pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).map_err(err)?;
    close("Pearson r", r.statistic, 0.8, tol)?;
    // t = r sqrt(2) / sqrt(1 - r^2) on 2 df has tail 1 - t / sqrt(t^2 + 2) = 1 - r
    close("Pearson p", r.p_value, 0.2, tol)?;

    let groups = [vec![1.0, 2.0], vec![5.0, 6.0]];
    let (ssb, ssw) = stats::anova_sums::<f64, _>(&groups);
    close("ANOVA SSB", ssb, 16.0, tol)?;
    close("ANOVA SSW", ssw, 1.0, tol)?;
    let f = stats::anova_oneway(&groups).map_err(err)?;
    close("ANOVA F", f.statistic, 32.0, tol)?;
    ensure(f.df == Dof::Two(1, 2), || format!("ANOVA df {:?}", f.df))?;
    close("ANOVA p", f.p_value, 1.0 - (16.0f64 / 17.0).sqrt(), tol)?;

    close("kappa perfect", stats::fleiss_kappa::<f64, _>(&[[3, 0], [0, 3]]).map_err(err)?, 1.0, tol)?;
    close("kappa (2,1)", stats::fleiss_kappa::<f64, _>(&[[2, 1]]).map_err(err)?, -0.5, tol)?;
    close(
        "AUC",
        stats::auc(&[true, false, true, false], &[0.9, 0.8, 0.7, 0.1]).map_err(err)?,
        0.75,
        tol,
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(20_261_014);
    let (mut kw_rej, mut f_rej) = (0, 0);
    const TRIALS: usize = 200;
    for _ in 0..TRIALS {
        let g: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..1000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        kw_rej += (stats::kruskal_wallis(&g).map_err(err)?.p_value < 0.05) as usize;
        f_rej += (stats::anova_oneway(&g).map_err(err)?.p_value < 0.05) as usize;
    }
    let (kw_rate, f_rate) = (kw_rej as f64 / TRIALS as f64, f_rej as f64 / TRIALS as f64);
    for (name, rate) in [("KW", kw_rate), ("ANOVA", f_rate)] {
        ensure((0.03..=0.07).contains(&rate), || format!("{name} null rejection rate {rate}"))?;
    }
    Ok(format!("fixtures exact, null rejection KW {kw_rate:.3} ANOVA {f_rate:.3}"))
}

// Criterion 3 -------------------------------------------------------------

fn annotator(v: LabelValue) -> AnnotatorLabel {
    match v {
        LabelValue::Multi => AnnotatorLabel::multi(&[IntentLabel::Characterization, IntentLabel::Penalty], "mixed"),
        LabelValue::Others => AnnotatorLabel {
            explanation: Some("unclear".into()),
            ..AnnotatorLabel::new(v)
        },
        LabelValue::Intent(_) => AnnotatorLabel::new(v),
    }
}

fn oracle_vote(votes: [LabelValue; 3]) -> LabelValue {
    for v in votes {
        if votes.iter().filter(|&&w| w == v).count() >= 2 {
            return v;
        }
    }
    LabelValue::Multi
}

fn criterion3() -> Check {
    let mut n = 0;
    for a in LabelValue::ALL {
        for b in LabelValue::ALL {
            for c in LabelValue::ALL {
                let set = AnnotationSet {
                    item_id: format!("{a}{b}{c}"),
                    labels: [a, b, c].map(annotator).to_vec(),
                };
                let got = aggregate_majority(&set).map_err(err)?;
                let want = oracle_vote([a, b, c]);
                ensure(got.value == want, || format!("{a},{b},{c}: got {}, want {want}", got.value))?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} combinations match"))
}

// Criterion 4 -------------------------------------------------------------

fn sessions_of(set: &ProfileSet, intents: &[IntentLabel], per_intent: usize, seed: u64) -> intentir::Result<Vec<session_log::Session>> {
    let config = SessionGenConfig {
        n_sessions: per_intent * intents.len(),
        seed,
        ..SessionGenConfig::default()
    };
    let events = synth::generate_sessions(set, &ProfileSet::uniform_mix(intents), &config)?;
    let split = session_log::split_sessions(&events, &SplitConfig::default())?;
    Ok(session_log::filter_sessions(split.sessions, 2, &Tokenizer::default()))
}

fn criterion4() -> Check {
    let shipped = ProfileSet::shipped().map_err(err)?;
    let sessions = sessions_of(&shipped, &IntentLabel::ALL, 500, 4).map_err(err)?;
    ensure(sessions.len() == 2500, || format!("{} sessions survived splitting", sessions.len()))?;
    let report = behavior::behavior_report(&sessions, Grouping::Intent, behavior::SATS_DWELL_SECONDS).map_err(err)?;
    let mut worst = 0.0f64;
    let mut checked = 0;
    for row in &report.rows {
        for (g, intent) in IntentLabel::ALL.iter().enumerate() {
            let Some(target) = shipped.get(*intent).map_err(err)?.target(row.measure) else {
                continue;
            };
            let mean = row.means[g].ok_or_else(|| format!("{intent} has no {:?}", row.measure))?;
            let rel = (mean - target).abs() / target;
            ensure(rel <= 0.05, || {
                format!("{intent} {:?}: mean {mean:.4} vs target {target:.4}", row.measure)
            })?;
            worst = worst.max(rel);
            checked += 1;
        }
    }

    // The same per-query behavior everywhere, with only the number of
    // queries per session varying across intents.
    let base = shipped.get(IntentLabel::Characterization).map_err(err)?.clone();
    let mut variant = shipped.clone();
    variant.profiles = IntentLabel::STUDIED
        .iter()
        .zip([3.0, 4.5, 6.0, 7.5])
        .map(|(&intent, q)| synth::IntentProfile {
            intent,
            ..base.with_queries(q)
        })
        .collect();
    let sessions = sessions_of(&variant, &IntentLabel::STUDIED, 500, 5).map_err(err)?;
    let report = behavior::behavior_report(&sessions, Grouping::Intent, behavior::SATS_DWELL_SECONDS).map_err(err)?;
    let distinct: BTreeSet<Measure> = [
        Measure::Queries,
        Measure::Pages,
        Measure::Clicks,
        Measure::Hovers,
        Measure::TaskTime,
    ]
    .into();
    let flagged: BTreeSet<Measure> = report.rows.iter().filter(|r| r.significant(0.05)).map(|r| r.measure).collect();
    let missed: Vec<_> = distinct.difference(&flagged).collect();
    let false_flags: Vec<_> = flagged.difference(&distinct).collect();
    let identical = Measure::ALL.len() - distinct.len();
    ensure(missed.is_empty(), || format!("distinct measures not flagged: {missed:?}"))?;
    ensure(false_flags.len() <= 1, || format!("false flags: {false_flags:?}"))?;
    Ok(format!(
        "{checked} means within {:.2}% (<= 5%), {} distinct flagged, {} false flags among {identical} identical {false_flags:?}",
        worst * 100.0,
        distinct.len(),
        false_flags.len()
    ))
}

// Criterion 5 -------------------------------------------------------------

fn criterion5() -> Check {
    let params = BoostParams::default();
    let mut gaps = Vec::new();
    for seed in 0..5 {
        let data = synth::generate_confounded_satisfaction(4000, seed);
        let agnostic = run_experiment(&data, SatMode::IntentAgnostic, FeatureGroup::All, 5, seed, &params).map_err(err)?;
        let aware = run_experiment(&data, SatMode::IntentAware, FeatureGroup::All, 5, seed, &params).map_err(err)?;
        gaps.push(aware.mean_auc - agnostic.mean_auc);
    }
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    ensure(mean >= 0.05, || format!("mean AUC gain {mean:.4} < 0.05 ({gaps:?})"))?;
    Ok(format!("mean aware-minus-agnostic AUC {mean:.4} over 5 seeds"))
}

// Criterion 6 -------------------------------------------------------------

fn criterion6() -> Check {
    let shipped = ProfileSet::shipped().map_err(err)?;
    let data = synth::generate_ranking_data(&RankingGenConfig::conflicting(&shipped, 6).map_err(err)?).map_err(err)?;
    let groups = ltr::group_instances(&data).map_err(err)?;
    let config = CvConfig {
        seed: 6,
        ..CvConfig::default()
    };
    let rows = ltr::compare_intent_modes(&groups, &Algorithm::ALL, IntentMode::Aware, &config).map_err(err)?;
    let mut parts = Vec::new();
    let mut big = 0;
    for r in &rows {
        let gain = r.aware.ndcg5 - r.base.ndcg5;
        ensure(gain > 0.0, || format!("{}: aware NDCG@5 does not exceed agnostic ({gain:.4})", r.algorithm.name()))?;
        big += (gain >= 0.02) as usize;
        parts.push(format!("{} +{gain:.4}", r.algorithm.name()));
    }
    ensure(big >= 2, || format!("only {big} algorithms gain >= 0.02"))?;
    Ok(format!("{} query groups, NDCG@5 gains: {}", groups.len(), parts.join(", ")))
}

// Criterion 7 -------------------------------------------------------------

fn criterion7() -> Check {
    let shipped = ProfileSet::shipped().map_err(err)?;
    let gen = RankingGenConfig {
        n_queries: 200,
        ..RankingGenConfig::conflicting(&shipped, 7).map_err(err)?
    };
    let groups = ltr::group_instances(&synth::generate_ranking_data(&gen).map_err(err)?).map_err(err)?;
    let config = CvConfig {
        seed: 7,
        ..CvConfig::default()
    };
    for algo in Algorithm::ALL {
        let base = ltr::cross_validate(&groups, algo, IntentMode::Agnostic, &config).map_err(err)?;
        let shared = ltr::cross_validate(&groups, algo, IntentMode::AwareShared, &config).map_err(err)?;
        let bytes = |o: &ltr::CvOutcome| serde_json::to_vec(&(&o.run, &o.metrics, &o.fold_metrics));
        ensure(bytes(&base).map_err(err)? == bytes(&shared).map_err(err)?, || {
            format!("{}: shared-model outputs differ from agnostic", algo.name())
        })?;
    }
    Ok("runs and metrics byte-identical for all three algorithms".into())
}

// Criterion 8 -------------------------------------------------------------

fn criterion8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let w: Vec<f64> = (0..5).map(|_| rng.sample(StandardNormal)).collect();
    let mut draw = |n: usize| {
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let y: Vec<bool> = x.iter().map(|r| r.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() > 0.0).collect();
        (x, y)
    };
    let (x, y) = draw(1000);
    let (tx, ty) = draw(1000);
    let labels: Vec<f64> = y.iter().map(|&b| b as u8 as f64).collect();
    let model = gbdt_fit(&FeatureMatrix::from_rows(&x).map_err(err)?, Objective::Logistic(&labels), &BoostParams::default())
        .map_err(err)?;
    let auc = stats::auc(&ty, &model.predict(&tx).map_err(err)?).map_err(err)?;
    ensure(auc >= 0.95, || format!("held-out AUC {auc:.4} < 0.95"))?;

    let params = BoostParams {
        n_trees: 50,
        max_depth: 3,
        min_samples_leaf: 1,
        ..BoostParams::default()
    };
    for d in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(800 + d);
        let x: Vec<Vec<f64>> = (0..200).map(|_| (0..4).map(|_| rng.sample(StandardNormal)).collect()).collect();
        let y: Vec<f64> = x.iter().map(|r| r[0].sin() + r[1] * r[2] + 0.3 * rng.sample::<f64, _>(StandardNormal)).collect();
        let mut losses = Vec::new();
        let mse = |s: &[f64]| s.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64;
        gbdt_fit_with(&FeatureMatrix::from_rows(&x).map_err(err)?, Objective::LeastSquares(&y), &params, |_, s| {
            losses.push(mse(s))
        })
        .map_err(err)?;
        for (i, pair) in losses.windows(2).enumerate() {
            ensure(pair[1] <= pair[0] + 1e-12, || format!("dataset {d}: loss rose at stage {}", i + 1))?;
        }
    }
    Ok(format!("held-out AUC {auc:.4}, LS loss non-increasing on 20 datasets"))
}

// Criterion 9 -------------------------------------------------------------

struct Cli {
    bin: PathBuf,
    dir: PathBuf,
}

impl Cli {
    fn run(&self, cwd: &Path, args: &[&str]) -> std::result::Result<(), String> {
        let out = Command::new(&self.bin).args(args).current_dir(cwd).output().map_err(err)?;
        ensure(out.status.success(), || {
            format!("`intentir {}` failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr))
        })
    }

    /// Runs `args` from two fresh directories holding `r0` and `r1` and
    /// compares the listed outputs byte for byte. Inputs live one level up.
    fn twice(&self, args: &[&str], outputs: &[&str]) -> std::result::Result<(), String> {
        let mut seen: Vec<Vec<Vec<u8>>> = Vec::new();
        for round in ["r0", "r1"] {
            let cwd = self.dir.join(round);
            std::fs::create_dir_all(&cwd).map_err(err)?;
            self.run(&cwd, args)?;
            seen.push(
                outputs
                    .iter()
                    .map(|o| std::fs::read(cwd.join(o)))
                    .collect::<std::io::Result<_>>()
                    .map_err(err)?,
            );
        }
        ensure(seen[0] == seen[1], || format!("`intentir {}` is not deterministic", args.join(" ")))?;
        ensure(seen[0].iter().all(|b| !b.is_empty()), || {
            format!("`intentir {}` wrote an empty file", args.join(" "))
        })
    }
}

fn criterion9() -> Check {
    let tmp = tempfile::tempdir().map_err(err)?;
    let cli = Cli {
        bin: PathBuf::from(env!("CARGO_BIN_EXE_intentir")),
        dir: tmp.path().to_path_buf(),
    };
    let annotations = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/query_log_annotations.jsonl");
    std::fs::copy(&annotations, tmp.path().join("ann.jsonl")).map_err(err)?;

    cli.twice(&["synth", "--seed", "9", "--n", "400", "--mix", "studied", "-o", "ev.jsonl"], &["ev.jsonl"])?;
    cli.twice(&["synth", "--seed", "9", "--kind", "corpus", "--n", "1000", "-o", "corpus.json"], &["corpus.json"])?;
    cli.twice(&["synth", "--seed", "9", "--kind", "ranking", "--n", "120", "-o", "rank.jsonl"], &["rank.jsonl"])?;
    cli.twice(&["synth", "--seed", "9", "--kind", "satisfaction", "--n", "600", "-o", "sat.jsonl"], &["sat.jsonl"])?;
    for f in ["ev.jsonl", "corpus.json", "rank.jsonl", "sat.jsonl"] {
        std::fs::rename(tmp.path().join("r0").join(f), tmp.path().join(f)).map_err(err)?;
    }

    let mut n = 4;
    let cases: Vec<(Vec<&str>, Vec<&str>)> = vec![
        (vec!["sessions", "../ev.jsonl", "-o", "s.csv", "--events-out", "kept.jsonl"], vec!["s.csv", "kept.jsonl"]),
        (vec!["aggregate", "../ann.jsonl", "-o", "a.csv"], vec!["a.csv"]),
        (vec!["kappa", "../ann.jsonl", "--format", "json", "-o", "k.json"], vec!["k.json"]),
        (vec!["distribution", "../ann.jsonl", "-o", "d.csv"], vec!["d.csv"]),
        (vec!["cooccurrence", "../ann.jsonl", "-o", "c.csv"], vec!["c.csv"]),
        (vec!["behavior", "../ev.jsonl", "--by", "criterion3", "-o", "b.csv"], vec!["b.csv"]),
        (vec!["correlate", "../ev.jsonl", "-o", "cor.csv"], vec!["cor.csv"]),
        (vec!["correlate", "../ev.jsonl", "--click-reasons", "-o", "cr.csv"], vec!["cr.csv"]),
        (vec!["sat", "../sat.jsonl", "--instances", "--trees", "40", "--seed", "3", "-o", "sat.csv"], vec!["sat.csv"]),
        (vec!["sat", "../ev.jsonl", "--groups", "dwell,all", "--trees", "40", "-o", "sat-ev.json", "--format", "json"], vec!["sat-ev.json"]),
        (
            vec!["rank", "../rank.jsonl", "--intent-aware", "--seed", "7", "-o", "r.csv", "--run-out", "run.txt", "--qrels-out", "qrels.txt"],
            vec!["r.csv", "run.txt", "qrels.txt"],
        ),
        (
            vec!["rank", "../ev.jsonl", "--corpus", "../corpus.json", "--algo", "lambdamart", "--trees", "40", "-o", "rc.csv"],
            vec!["rc.csv"],
        ),
    ];
    for (args, outs) in &cases {
        cli.twice(args, outs)?;
        n += 1;
    }
    Ok(format!("{n} invocations byte-identical across two runs"))
}

fn main() {
    let criteria: [(&str, fn() -> Check, u64); 9] = [
        ("metric oracles", criterion1, 10),
        ("statistical fixtures", criterion2, 60),
        ("aggregation rules", criterion3, 1),
        ("behavioral calibration", criterion4, 120),
        ("intent-aware satisfaction AUC", criterion5, 120),
        ("intent-aware ranking NDCG@5", criterion6, 300),
        ("shared-model degeneracy", criterion7, 30),
        ("GBDT sanity", criterion8, 30),
        ("CLI determinism", criterion9, 180),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let over = took > Duration::from_secs(*budget);
        let (status, detail) = match (&result, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; took longer than {budget} s")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        failed += (status == "FAIL") as usize;
        println!("criterion {}: {status} {name} [{:.2} s] {detail}", i + 1, took.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
