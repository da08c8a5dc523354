//! The serialized analysis result (`*.report.json`).
//!
//! A report is self-contained: rankings, per-link statistics, time series,
//! the sentence-level edits behind every link and the latest article text.
//! Scores are exact rationals internally and appear here as a float rounded
//! to 6 decimals plus an exact `"n/d"` string. See `docs/formats.md`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::chain::CleanChain;
use crate::diffcore::{DiffRun, EditEvent, EditType, PairKind};
use crate::ingest::ArticleHistory;
use crate::scalar::{round6, Scalar};
use crate::scoring::{Bucket, LinkScore, ScoreSeries};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleReport {
    pub schema_version: u32,
    pub article_title: String,
    pub language_code: String,
    /// Revisions in the cleaned chain.
    pub analyzed_revisions: usize,
    pub generated_at: DateTime<Utc>,
    pub chain_stats: ChainStats,
    /// Sorted by rank.
    pub links: Vec<ReportLink>,
    pub series: Vec<ReportSeries>,
    /// Sentence-level edits referenced from `links[*].events`.
    pub edits: Vec<ReportEdit>,
    pub latest_revision: Option<LatestRevision>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainStats {
    pub raw_revisions: usize,
    pub kept_revisions: usize,
    pub suppressed_revisions: usize,
    pub excluded: BTreeMap<String, usize>,
    pub revert_count: usize,
    pub complete_history: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportLink {
    pub link: String,
    pub score: f64,
    pub score_exact: String,
    pub rank: usize,
    pub bin: u8,
    pub n_edits: usize,
    pub n_users: usize,
    pub n_reverts_involved: usize,
    pub type_counts: BTreeMap<String, usize>,
    pub section_counts: BTreeMap<String, usize>,
    pub events: Vec<LinkEventRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkEventRef {
    /// Index into `ArticleReport::edits`.
    pub edit: usize,
    #[serde(rename = "type")]
    pub edit_type: EditType,
    pub scored: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportEdit {
    pub id: usize,
    pub rev_id: u64,
    pub prev_rev_id: u64,
    pub timestamp: DateTime<Utc>,
    pub user: String,
    pub comment: String,
    pub section: String,
    pub kind: PairKind,
    pub w: usize,
    pub links: Vec<String>,
    pub has_deletion: bool,
    pub diff: Vec<DiffRun>,
    pub reverted_by: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSeries {
    pub link: String,
    pub bucket: Bucket,
    pub points: Vec<ReportPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportPoint {
    pub period_start: DateTime<Utc>,
    pub cumulative: f64,
    pub incremental: f64,
    pub cumulative_exact: String,
    pub incremental_exact: String,
    pub events: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatestRevision {
    pub rev_id: u64,
    pub timestamp: DateTime<Utc>,
    pub wikitext: String,
}

/// One row of a link's edit table, newest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetailRow {
    pub rev_id: u64,
    pub reverted_by: Option<u64>,
    pub diff: Vec<DiffRun>,
    pub user: String,
    pub comment: String,
    pub section: String,
    #[serde(rename = "type")]
    pub type_code: String,
    pub type_name: String,
    pub scored: bool,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkDetail {
    pub link: String,
    pub rank: usize,
    pub score: f64,
    pub bin: u8,
    pub rows: Vec<DetailRow>,
}

/// Report as served by the API: optionally truncated ranking and a single
/// series granularity, without the edit table and article text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportView {
    pub schema_version: u32,
    pub article_title: String,
    pub language_code: String,
    pub analyzed_revisions: usize,
    pub generated_at: DateTime<Utc>,
    pub chain_stats: ChainStats,
    pub total_links: usize,
    pub links: Vec<ReportLink>,
    pub bucket: Bucket,
    pub series: Vec<ReportSeries>,
}

fn type_counts(counts: &BTreeMap<EditType, usize>) -> BTreeMap<String, usize> {
    EditType::ALL
        .iter()
        .map(|t| (t.as_str().to_string(), counts.get(t).copied().unwrap_or(0)))
        .collect()
}

fn series_to_report<S: Scalar>(series: &[ScoreSeries<S>]) -> Vec<ReportSeries> {
    series
        .iter()
        .map(|s| ReportSeries {
            link: s.link.clone(),
            bucket: s.bucket,
            points: s
                .points
                .iter()
                .map(|p| ReportPoint {
                    period_start: p.period_start,
                    cumulative: round6(p.cumulative.to_f64_lossy()),
                    incremental: round6(p.incremental.to_f64_lossy()),
                    cumulative_exact: p.cumulative.exact_repr(),
                    incremental_exact: p.incremental.exact_repr(),
                    events: p.events,
                })
                .collect(),
        })
        .collect()
}

/// Inputs needed to assemble a report.
pub struct ReportInputs<'a, S> {
    pub history: &'a ArticleHistory,
    pub chain: &'a CleanChain,
    pub events: &'a [EditEvent],
    pub scores: &'a [LinkScore<S>],
    pub series: &'a [ScoreSeries<S>],
}

impl ArticleReport {
    pub fn build<S: Scalar>(inputs: ReportInputs<'_, S>) -> ArticleReport {
        let ReportInputs {
            history,
            chain,
            events,
            scores,
            series,
        } = inputs;

        // Compact edit table: one row per sentence pair used by a ranked link.
        let used: BTreeSet<usize> = scores
            .iter()
            .flat_map(|l| l.events.iter().map(|&i| events[i].pair_id))
            .collect();
        let mut edit_index: HashMap<usize, usize> = HashMap::new();
        let mut edits = Vec::with_capacity(used.len());
        for ev in events {
            if used.contains(&ev.pair_id) && !edit_index.contains_key(&ev.pair_id) {
                let id = edits.len();
                edit_index.insert(ev.pair_id, id);
                let pair = &ev.sentence_pair;
                edits.push(ReportEdit {
                    id,
                    rev_id: ev.rev_id,
                    prev_rev_id: ev.prev_rev_id,
                    timestamp: ev.timestamp,
                    user: ev.user.clone(),
                    comment: ev.comment.clone(),
                    section: ev.section_key.to_string(),
                    kind: pair.kind,
                    w: pair.w,
                    links: pair.links_union.iter().cloned().collect(),
                    has_deletion: pair.has_deletion,
                    diff: pair.token_diff.clone(),
                    reverted_by: ev.reverted_by,
                });
            }
        }

        let links = scores
            .iter()
            .map(|l| ReportLink {
                link: l.link.clone(),
                score: round6(l.score.to_f64_lossy()),
                score_exact: l.score.exact_repr(),
                rank: l.rank,
                bin: l.bin,
                n_edits: l.n_edits,
                n_users: l.n_users,
                n_reverts_involved: l.n_reverts_involved,
                type_counts: type_counts(&l.type_counts),
                section_counts: l.section_counts.clone(),
                events: l
                    .events
                    .iter()
                    .map(|&i| LinkEventRef {
                        edit: edit_index[&events[i].pair_id],
                        edit_type: events[i].edit_type,
                        scored: events[i].scored,
                    })
                    .collect(),
            })
            .collect();

        let ranked: HashMap<&str, usize> =
            scores.iter().map(|l| (l.link.as_str(), l.rank)).collect();
        let mut series: Vec<ReportSeries> = series_to_report(series)
            .into_iter()
            .filter(|s| ranked.contains_key(s.link.as_str()))
            .collect();
        series.sort_by_key(|s| (s.bucket, ranked[s.link.as_str()]));

        let excluded = chain
            .excluded_by_reason()
            .into_iter()
            .map(|(r, n)| (r.as_str().to_string(), n))
            .collect();
        let latest_revision = history
            .revisions
            .iter()
            .rev()
            .find(|r| !r.suppressed)
            .map(|r| LatestRevision {
                rev_id: r.rev_id,
                timestamp: r.timestamp,
                wikitext: r.wikitext.clone(),
            });

        ArticleReport {
            schema_version: SCHEMA_VERSION,
            article_title: history.article_title.clone(),
            language_code: history.language_code.clone(),
            analyzed_revisions: chain.revisions.len(),
            generated_at: history.fetched_at,
            chain_stats: ChainStats {
                raw_revisions: history.revisions.len(),
                kept_revisions: chain.revisions.len(),
                suppressed_revisions: history.revisions.iter().filter(|r| r.suppressed).count(),
                excluded,
                revert_count: chain.revert_map.len(),
                complete_history: history.complete,
            },
            links,
            series,
            edits,
            latest_revision,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<ArticleReport> {
        serde_json::from_str(text)
    }

    pub fn link(&self, name: &str) -> Option<&ReportLink> {
        self.links.iter().find(|l| l.link == name)
    }

    /// Edit table rows for `link`, newest first.
    pub fn detail(&self, link: &str) -> Option<LinkDetail> {
        let l = self.link(link)?;
        let mut rows: Vec<DetailRow> = l
            .events
            .iter()
            .map(|e| {
                let edit = &self.edits[e.edit];
                DetailRow {
                    rev_id: edit.rev_id,
                    reverted_by: edit.reverted_by,
                    diff: edit.diff.clone(),
                    user: edit.user.clone(),
                    comment: edit.comment.clone(),
                    section: edit.section.clone(),
                    type_code: e.edit_type.code().to_string(),
                    type_name: e.edit_type.as_str().to_string(),
                    scored: e.scored,
                    timestamp: edit.timestamp,
                }
            })
            .collect();
        rows.sort_by(|a, b| b.timestamp.cmp(&a.timestamp).then(b.rev_id.cmp(&a.rev_id)));
        Some(LinkDetail {
            link: l.link.clone(),
            rank: l.rank,
            score: l.score,
            bin: l.bin,
            rows,
        })
    }

    pub fn view(&self, top: Option<usize>, bucket: Bucket) -> ReportView {
        let links: Vec<ReportLink> = match top {
            Some(n) => self.links.iter().take(n).cloned().collect(),
            None => self.links.clone(),
        };
        let names: BTreeSet<&str> = links.iter().map(|l| l.link.as_str()).collect();
        let series = self
            .series
            .iter()
            .filter(|s| s.bucket == bucket && names.contains(s.link.as_str()))
            .cloned()
            .collect();
        ReportView {
            schema_version: self.schema_version,
            article_title: self.article_title.clone(),
            language_code: self.language_code.clone(),
            analyzed_revisions: self.analyzed_revisions,
            generated_at: self.generated_at,
            chain_stats: self.chain_stats.clone(),
            total_links: self.links.len(),
            links,
            bucket,
            series,
        }
    }
}
