//! Controversy scores, rankings, time series and color bins.
//!
//! A link's score is the sum, over every scored edit event on the link, of
//! `1 / w` where `w` is the number of distinct links in the edited sentence.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{DateTime, Datelike, Duration, NaiveDate, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use crate::diffcore::{EditEvent, EditType};
use crate::scalar::Scalar;

pub const BIN_COUNT: u8 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct LinkScore<S> {
    pub link: String,
    pub score: S,
    pub rank: usize,
    /// 1..=5, 5 being the most controversial.
    pub bin: u8,
    /// All events on the link, scored or not.
    pub n_edits: usize,
    pub n_users: usize,
    /// Events made by revisions that were later reverted.
    pub n_reverts_involved: usize,
    pub type_counts: BTreeMap<EditType, usize>,
    /// Scored events per section.
    pub section_counts: BTreeMap<String, usize>,
    /// Indices into the event slice the score was computed from.
    pub events: Vec<usize>,
}

/// Accumulates per-link scores and ranks them.
///
/// Links without any scored event are left out. Bins are all 1 until
/// [`assign_bins`] runs.
pub fn accumulate_scores<S: Scalar>(events: &[EditEvent]) -> Vec<LinkScore<S>> {
    let mut by_link: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (idx, ev) in events.iter().enumerate() {
        by_link.entry(ev.link.as_str()).or_default().push(idx);
    }

    let mut scores: Vec<LinkScore<S>> = by_link
        .into_iter()
        .filter(|(_, idxs)| idxs.iter().any(|&i| events[i].scored))
        .map(|(link, idxs)| {
            let mut score = S::zero();
            let mut users = BTreeSet::new();
            let mut type_counts: BTreeMap<EditType, usize> = BTreeMap::new();
            let mut section_counts: BTreeMap<String, usize> = BTreeMap::new();
            let mut n_reverts_involved = 0;
            for &i in &idxs {
                let ev = &events[i];
                users.insert(ev.user.as_str());
                *type_counts.entry(ev.edit_type).or_insert(0) += 1;
                if ev.reverted_by.is_some() {
                    n_reverts_involved += 1;
                }
                if ev.scored {
                    score = score + S::unit_fraction(ev.sentence_pair.w);
                    *section_counts
                        .entry(ev.section_key.to_string())
                        .or_insert(0) += 1;
                }
            }
            LinkScore {
                link: link.to_string(),
                score,
                rank: 0,
                bin: 1,
                n_edits: idxs.len(),
                n_users: users.len(),
                n_reverts_involved,
                type_counts,
                section_counts,
                events: idxs,
            }
        })
        .collect();
    rank_links(&mut scores);
    scores
}

/// Sorts by score descending; ties go to more edits, then to the
/// lexicographically smaller link. Ranks are 1..=N.
pub fn rank_links<S: Scalar>(links: &mut [LinkScore<S>]) {
    links.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.n_edits.cmp(&a.n_edits))
            .then(a.link.cmp(&b.link))
    });
    for (i, l) in links.iter_mut().enumerate() {
        l.rank = i + 1;
    }
}

/// Five equal-width bins over `[ln lo, ln hi]`, `lo` being the smallest
/// positive score. All-equal scores land in bin 5; non-positive scores in
/// bin 1.
pub fn assign_bins<S: Scalar>(links: &mut [LinkScore<S>]) {
    let positive = || links.iter().map(|l| &l.score).filter(|s| **s > S::zero());
    let lo = positive().fold(None::<&S>, |m, s| match m {
        Some(m) if m <= s => Some(m),
        _ => Some(s),
    });
    let hi = positive().fold(None::<&S>, |m, s| match m {
        Some(m) if m >= s => Some(m),
        _ => Some(s),
    });
    let (Some(lo), Some(hi)) = (lo.cloned(), hi.cloned()) else {
        links.iter_mut().for_each(|l| l.bin = 1);
        return;
    };
    // Ratios are formed in S so a common scale factor cancels exactly.
    let span = (hi.clone() / lo.clone()).to_f64_lossy().ln();
    for l in links.iter_mut() {
        l.bin = if l.score <= S::zero() {
            1
        } else if span <= 0.0 {
            BIN_COUNT
        } else {
            let frac = (l.score.clone() / lo.clone()).to_f64_lossy().ln() / span;
            let idx = (frac * BIN_COUNT as f64).floor() as i64 + 1;
            idx.clamp(1, BIN_COUNT as i64) as u8
        };
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default,
)]
#[serde(rename_all = "snake_case")]
pub enum Bucket {
    #[default]
    Month,
    Week,
}

impl Bucket {
    /// Start of the calendar bucket containing `ts` (UTC). Weeks start Monday.
    pub fn period_start(self, ts: DateTime<Utc>) -> DateTime<Utc> {
        let date = ts.date_naive();
        let start = match self {
            Bucket::Month => NaiveDate::from_ymd_opt(date.year(), date.month(), 1)
                .expect("first of month exists"),
            Bucket::Week => date - Duration::days(date.weekday().num_days_from_monday() as i64),
        };
        Utc.from_utc_datetime(&start.and_hms_opt(0, 0, 0).expect("midnight"))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Bucket::Month => "month",
            Bucket::Week => "week",
        }
    }

    pub fn parse(s: &str) -> Option<Bucket> {
        match s {
            "month" => Some(Bucket::Month),
            "week" => Some(Bucket::Week),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoint<S> {
    pub period_start: DateTime<Utc>,
    pub cumulative: S,
    pub incremental: S,
    pub events: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSeries<S> {
    pub link: String,
    pub bucket: Bucket,
    pub points: Vec<SeriesPoint<S>>,
}

/// Per-link score over time from scored events. Empty buckets are omitted;
/// links without scored events get no series. Sorted by link.
pub fn score_series<S: Scalar>(events: &[EditEvent], bucket: Bucket) -> Vec<ScoreSeries<S>> {
    let mut per_link: BTreeMap<&str, BTreeMap<DateTime<Utc>, (S, usize)>> = BTreeMap::new();
    for ev in events.iter().filter(|e| e.scored) {
        let slot = per_link
            .entry(ev.link.as_str())
            .or_default()
            .entry(bucket.period_start(ev.timestamp))
            .or_insert_with(|| (S::zero(), 0));
        slot.0 = slot.0.clone() + S::unit_fraction(ev.sentence_pair.w);
        slot.1 += 1;
    }
    per_link
        .into_iter()
        .map(|(link, periods)| {
            let mut cumulative = S::zero();
            let points = periods
                .into_iter()
                .map(|(period_start, (incremental, events))| {
                    cumulative = cumulative.clone() + incremental.clone();
                    SeriesPoint {
                        period_start,
                        cumulative: cumulative.clone(),
                        incremental,
                        events,
                    }
                })
                .collect();
            ScoreSeries {
                link: link.to_string(),
                bucket,
                points,
            }
        })
        .collect()
}

/// Scored sentence pairs with at least one link, by pair id. Each one
/// contributes a total weight of exactly 1 spread over its links.
pub fn scored_pair_count(events: &[EditEvent]) -> usize {
    let mut seen: HashMap<usize, ()> = HashMap::new();
    for ev in events.iter().filter(|e| e.scored && e.sentence_pair.w > 0) {
        seen.insert(ev.pair_id, ());
    }
    seen.len()
}
