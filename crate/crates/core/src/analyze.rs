//! End-to-end pipeline: history → chain → diffs → scores → report.

use crate::chain::{build_chain, CleanChain, VandalismRules};
use crate::config::Config;
use crate::diffcore::{diff_chain, ChainDiff};
use crate::ingest::ArticleHistory;
use crate::report::{ArticleReport, ReportInputs};
use crate::scalar::Scalar;
use crate::scoring::{
    accumulate_scores, assign_bins, score_series, Bucket, LinkScore, ScoreSeries,
};
use crate::ExactScore;

/// Intermediate results of one analysis run.
#[derive(Debug, Clone)]
pub struct Analysis<S> {
    pub chain: CleanChain,
    pub diff: ChainDiff,
    pub scores: Vec<LinkScore<S>>,
    pub series: Vec<ScoreSeries<S>>,
}

/// Scores and series for an already cleaned chain.
pub fn analyze_chain<S: Scalar>(chain: CleanChain, config: &Config) -> Analysis<S> {
    let diff = diff_chain(&chain, config.diff.jaccard_threshold);
    let mut scores = accumulate_scores::<S>(&diff.events);
    assign_bins(&mut scores);
    let mut series = score_series::<S>(&diff.events, Bucket::Month);
    series.extend(score_series::<S>(&diff.events, Bucket::Week));
    Analysis {
        chain,
        diff,
        scores,
        series,
    }
}

pub fn run_pipeline<S: Scalar>(history: &ArticleHistory, config: &Config) -> Analysis<S> {
    let rules = VandalismRules::from(&config.chain);
    analyze_chain(build_chain(history, &rules), config)
}

/// Scores computed on the first `len` revisions of a chain.
pub fn scores_up_to<S: Scalar>(
    chain: &CleanChain,
    len: usize,
    config: &Config,
) -> Vec<LinkScore<S>> {
    analyze_chain::<S>(chain.truncated(len), config).scores
}

/// Full analysis with exact arithmetic, packaged as a report.
pub fn analyze_history(history: &ArticleHistory, config: &Config) -> ArticleReport {
    let analysis = run_pipeline::<ExactScore>(history, config);
    ArticleReport::build(ReportInputs {
        history,
        chain: &analysis.chain,
        events: &analysis.diff.events,
        scores: &analysis.scores,
        series: &analysis.series,
    })
}
