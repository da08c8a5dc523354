//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use chrono::TimeZone;
use num_rational::BigRational;
use num_traits::{One, Zero};
use wikidispute_core::analyze::{analyze_history, run_pipeline, scores_up_to};
use wikidispute_core::chain::{build_chain, detect_reverts, CleanChain, RevertMap, VandalismRules};
use wikidispute_core::diffcore::PairKind;
use wikidispute_core::fixtures::{
    inject_vandalism, stats_history, synthetic_history, worked_example_history, SyntheticParams,
    VandalismKind, WORKED_CONSENSUS_LINK, WORKED_LIST_LINK, WORKED_TITLE, WORKED_XML,
};
use wikidispute_core::ingest::{parse_dump, ArticleHistory, RawRevision};
use wikidispute_core::scoring::scored_pair_count;
use wikidispute_core::{Config, ExactScore, Scalar};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn q(n: i64, d: i64) -> ExactScore {
    BigRational::new(n.into(), d.into())
}

fn random_params() -> SyntheticParams {
    SyntheticParams {
        revisions: 50,
        links: 10,
        ..SyntheticParams::default()
    }
}

fn worked_example() -> Outcome {
    let start = Instant::now();
    let history = parse_dump(WORKED_XML.as_bytes(), WORKED_TITLE).map_err(|e| e.to_string())?;
    let scores = run_pipeline::<ExactScore>(&history, &Config::default()).scores;
    let elapsed = start.elapsed();
    let got: BTreeMap<String, ExactScore> = scores.into_iter().map(|l| (l.link, l.score)).collect();
    let want: BTreeMap<String, ExactScore> = [
        (WORKED_LIST_LINK.to_string(), q(3, 2)),
        (WORKED_CONSENSUS_LINK.to_string(), q(1, 2)),
    ]
    .into();
    ensure(got == want, format!("scores {got:?}"))?;
    ensure(
        elapsed < Duration::from_secs(1),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!("exact 3/2 and 1/2 in {elapsed:?}"))
}

/// Enumerates every sentence pair of every consecutive diff and adds
/// 2520 / w units (2520 = lcm of 1..=10) to each link the pair scores.
fn brute_force_units(
    analysis_diffs: &[wikidispute_core::diffcore::RevisionDiff],
) -> Result<BTreeMap<String, i64>, String> {
    let mut units: BTreeMap<String, i64> = BTreeMap::new();
    for diff in analysis_diffs {
        for pair in &diff.sentence_pairs {
            let scored = match pair.kind {
                PairKind::Deleted => true,
                PairKind::Modified => pair.has_deletion,
                PairKind::Inserted => false,
            };
            if !scored {
                continue;
            }
            let mut links: Vec<String> = pair
                .old_links
                .iter()
                .chain(&pair.new_links)
                .map(|l| l.canonical_target.clone())
                .collect();
            links.sort();
            links.dedup();
            if links.is_empty() {
                continue;
            }
            ensure(
                2520 % links.len() == 0,
                format!("{} links in one pair", links.len()),
            )?;
            for l in links.iter() {
                *units.entry(l.clone()).or_insert(0) += 2520 / links.len() as i64;
            }
        }
    }
    Ok(units)
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let seeds = 120u64;
    for seed in 0..seeds {
        let history = synthetic_history(seed, &random_params());
        ensure(history.revisions.len() <= 50, "too many revisions")?;
        let analysis = run_pipeline::<ExactScore>(&history, &Config::default());
        let oracle = brute_force_units(&analysis.diff.diffs)?;
        ensure(
            oracle.len() <= 10,
            format!("seed {seed}: {} links", oracle.len()),
        )?;
        let got: BTreeMap<String, ExactScore> = analysis
            .scores
            .into_iter()
            .map(|l| (l.link, l.score))
            .collect();
        let want: BTreeMap<String, ExactScore> = oracle
            .into_iter()
            .map(|(l, u)| (l, BigRational::new(u.into(), 2520.into())))
            .collect();
        ensure(got == want, format!("seed {seed}: {got:?} != {want:?}"))?;
    }
    let elapsed = start.elapsed();
    ensure(
        elapsed < Duration::from_secs(60),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!("{seeds} histories match in {elapsed:?}"))
}

fn weight_conservation() -> Outcome {
    let mut pairs = 0usize;
    for seed in 0..100u64 {
        let analysis = run_pipeline::<ExactScore>(
            &synthetic_history(seed, &random_params()),
            &Config::default(),
        );
        let mut per_pair: BTreeMap<usize, ExactScore> = BTreeMap::new();
        for ev in analysis.diff.events.iter().filter(|e| e.scored) {
            *per_pair.entry(ev.pair_id).or_insert_with(BigRational::zero) +=
                ExactScore::unit_fraction(ev.sentence_pair.w);
        }
        ensure(
            per_pair.values().all(|v| v.is_one()),
            format!("seed {seed}: a pair does not sum to 1"),
        )?;
        let mass: ExactScore = analysis.scores.iter().map(|l| l.score.clone()).sum();
        let count = scored_pair_count(&analysis.diff.events);
        ensure(
            mass == BigRational::from_integer(count.into()),
            format!("seed {seed}: mass {mass} vs {count} pairs"),
        )?;
        pairs += count;
    }
    Ok(format!(
        "100 histories, {pairs} scored pairs each summing to 1"
    ))
}

fn monotonicity() -> Outcome {
    let config = Config::default();
    let rules = VandalismRules::default();
    let mut histories = vec![worked_example_history(), stats_history()];
    histories.extend((0..30).map(|s| synthetic_history(1000 + s, &random_params())));
    let mut steps = 0usize;
    for h in &histories {
        let chain = build_chain(h, &rules);
        let mut prev: BTreeMap<String, ExactScore> = BTreeMap::new();
        for r in 1..=chain.revisions.len() {
            let now: BTreeMap<String, ExactScore> = scores_up_to::<ExactScore>(&chain, r, &config)
                .into_iter()
                .map(|l| (l.link, l.score))
                .collect();
            for (link, before) in &prev {
                ensure(
                    now.get(link).is_some_and(|s| s >= before),
                    format!("{}: {link} dropped at R_{r}", h.article_title),
                )?;
            }
            prev = now;
            steps += 1;
        }
    }
    Ok(format!("{} histories, {steps} prefixes", histories.len()))
}

fn same_chain(a: &CleanChain, b: &CleanChain) -> bool {
    a.revisions == b.revisions && a.revert_map == b.revert_map
}

fn injected(base: &ArticleHistory, kind: VandalismKind) -> Result<ArticleHistory, String> {
    (1..base.revisions.len())
        .find_map(|at| inject_vandalism(base, at, kind))
        .ok_or_else(|| format!("no slot for {kind:?}"))
}

fn filtering_rules() -> Outcome {
    let rules = VandalismRules::default();
    let base = synthetic_history(77, &random_params());
    let clean = build_chain(&base, &rules);
    for kind in [
        VandalismKind::VandalComment,
        VandalismKind::BotRevert,
        VandalismKind::AutoSummary,
    ] {
        let dirty = build_chain(&injected(&base, kind)?, &rules);
        ensure(same_chain(&dirty, &clean), format!("{kind:?} left a trace"))?;
    }
    for secs in [59, 60] {
        let dirty = build_chain(&injected(&base, VandalismKind::FastIpRevert(secs))?, &rules);
        ensure(
            same_chain(&dirty, &clean),
            format!("IP revert after {secs}s left a trace"),
        )?;
    }
    let late_history = injected(&base, VandalismKind::FastIpRevert(61))?;
    let late = build_chain(&late_history, &rules);
    ensure(
        late.revisions.len() == clean.revisions.len() + 2,
        "IP revert after 61s was filtered",
    )?;
    let vandal = late_history
        .revisions
        .iter()
        .find(|r| r.user == "192.0.2.254")
        .ok_or("vandal missing")?;
    ensure(
        late.revert_map.contains_key(&vandal.rev_id),
        "61s revert missing from revert map",
    )?;
    Ok("vandal comment, bot, IP 59s/60s removed; 61s kept; blank summary removed".into())
}

fn revert_detection() -> Outcome {
    let ts = |s| chrono::Utc.timestamp_opt(1_300_000_000 + s, 0).unwrap();
    let revs: Vec<RawRevision> = ["A", "B", "A", "B"]
        .iter()
        .enumerate()
        .map(|(i, t)| {
            RawRevision::new(
                i as u64 + 1,
                i as u64,
                ts(i as i64 * 600),
                format!("u{i}"),
                "",
                *t,
            )
        })
        .collect();
    let got = detect_reverts(&revs);
    let want: RevertMap = [(2, 3), (3, 4)].into();
    ensure(got == want, format!("{got:?}"))?;
    Ok("{rev2->rev3, rev3->rev4}".into())
}

fn determinism_and_performance() -> Outcome {
    let params = SyntheticParams {
        revisions: 5000,
        ..SyntheticParams::default()
    };
    let history = synthetic_history(5000, &params);
    let start = Instant::now();
    let first = analyze_history(&history, &Config::default()).to_json();
    let elapsed = start.elapsed();
    let second = analyze_history(&synthetic_history(5000, &params), &Config::default()).to_json();
    ensure(first == second, "reports differ between runs")?;
    ensure(
        elapsed < Duration::from_secs(60),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!(
        "5000 revisions, identical {} byte reports, {elapsed:?} per run",
        first.len()
    ))
}

fn hand_tallied_statistics() -> Outcome {
    let report = analyze_history(&stats_history(), &Config::default());
    type Row = (
        &'static str,
        &'static str,
        usize,
        usize,
        usize,
        &'static [(&'static str, usize)],
        &'static [(&'static str, usize)],
    );
    let expected: [Row; 4] = [
        (
            "Carbon dioxide",
            "7/6",
            3,
            2,
            1,
            &[("sentence_change", 3)],
            &[("abstract", 3)],
        ),
        (
            "Methane",
            "7/6",
            3,
            2,
            1,
            &[("element_change", 2), ("sentence_change", 1)],
            &[("abstract", 3)],
        ),
        (
            "Svante Arrhenius",
            "1",
            2,
            2,
            0,
            &[("insert", 1), ("sentence_change", 1)],
            &[("history", 1)],
        ),
        (
            "Water vapor",
            "2/3",
            2,
            2,
            1,
            &[("element_change", 2)],
            &[("abstract", 2)],
        ),
    ];
    ensure(
        report.links.len() == expected.len(),
        format!("{} links", report.links.len()),
    )?;
    for (l, (name, score, edits, users, reverts, types, sections)) in
        report.links.iter().zip(expected)
    {
        ensure(
            l.link == name && l.score_exact == score,
            format!("{} {}", l.link, l.score_exact),
        )?;
        ensure(
            (l.n_edits, l.n_users, l.n_reverts_involved) == (edits, users, reverts),
            format!(
                "{name}: counts {} {} {}",
                l.n_edits, l.n_users, l.n_reverts_involved
            ),
        )?;
        let nonzero: Vec<(&str, usize)> = l
            .type_counts
            .iter()
            .filter(|(_, n)| **n > 0)
            .map(|(k, n)| (k.as_str(), *n))
            .collect();
        ensure(nonzero == types, format!("{name}: types {nonzero:?}"))?;
        let secs: Vec<(&str, usize)> = l
            .section_counts
            .iter()
            .map(|(k, n)| (k.as_str(), *n))
            .collect();
        ensure(secs == sections, format!("{name}: sections {secs:?}"))?;
    }
    Ok("4 links match manual tallies".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("worked example reproduction", worked_example),
        ("oracle equivalence", oracle_equivalence),
        ("weight conservation", weight_conservation),
        ("monotonicity", monotonicity),
        ("filtering rules", filtering_rules),
        ("revert detection", revert_detection),
        ("determinism and performance", determinism_and_performance),
        ("hand-tallied statistics", hand_tallied_statistics),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
