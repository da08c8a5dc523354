//! Cleaning a raw history into the revision chain that gets diffed.
//!
//! Order of operations: [`collapse_consecutive`], then [`detect_reverts`] on
//! the collapsed list, then [`filter_vandalism`].

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use chrono::Duration;
use serde::{Deserialize, Serialize};

use crate::config::ChainConfig;
use crate::ingest::{ArticleHistory, RawRevision};

/// reverted rev_id → reverting rev_id.
pub type RevertMap = BTreeMap<u64, u64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    VandalismComment,
    AntivandalBot,
    IpFastRevert,
    AesBlankOrReplace,
    CollapsedIntermediate,
}

impl ExclusionReason {
    pub fn as_str(self) -> &'static str {
        match self {
            ExclusionReason::VandalismComment => "vandalism_comment",
            ExclusionReason::AntivandalBot => "antivandal_bot",
            ExclusionReason::IpFastRevert => "ip_fast_revert",
            ExclusionReason::AesBlankOrReplace => "aes_blank_or_replace",
            ExclusionReason::CollapsedIntermediate => "collapsed_intermediate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleanChain {
    pub revisions: Vec<RawRevision>,
    pub revert_map: RevertMap,
    /// In history order.
    pub excluded: Vec<(u64, ExclusionReason)>,
}

impl CleanChain {
    pub fn excluded_by_reason(&self) -> BTreeMap<ExclusionReason, usize> {
        let mut counts = BTreeMap::new();
        for (_, reason) in &self.excluded {
            *counts.entry(*reason).or_insert(0) += 1;
        }
        counts
    }

    /// The chain cut after its first `len` revisions. Revert entries pointing
    /// past the cut are dropped.
    pub fn truncated(&self, len: usize) -> CleanChain {
        let revisions: Vec<RawRevision> = self.revisions.iter().take(len).cloned().collect();
        let ids: HashSet<u64> = revisions.iter().map(|r| r.rev_id).collect();
        CleanChain {
            revert_map: self
                .revert_map
                .iter()
                .filter(|(a, b)| ids.contains(a) && ids.contains(b))
                .map(|(a, b)| (*a, *b))
                .collect(),
            excluded: self.excluded.clone(),
            revisions,
        }
    }
}

/// Known anti-vandalism bot accounts; exact-match lookups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BotList(BTreeSet<String>);

impl BotList {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(names: I) -> Self {
        BotList(names.into_iter().map(Into::into).collect())
    }

    pub fn contains(&self, user: &str) -> bool {
        self.0.contains(user)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for BotList {
    fn default() -> Self {
        BotList::new(crate::config::DEFAULT_BOTS.iter().copied())
    }
}

#[derive(Debug, Clone)]
pub struct VandalismRules {
    pub bots: BotList,
    pub ip_revert_window: Duration,
    pub aes_patterns: Vec<String>,
}

impl Default for VandalismRules {
    fn default() -> Self {
        (&ChainConfig::default()).into()
    }
}

impl From<&ChainConfig> for VandalismRules {
    fn from(c: &ChainConfig) -> Self {
        VandalismRules {
            bots: BotList::new(c.bots.iter().cloned()),
            ip_revert_window: Duration::seconds(c.ip_revert_window_seconds),
            aes_patterns: c.aes_patterns.clone(),
        }
    }
}

impl VandalismRules {
    fn matches_aes(&self, comment: &str) -> bool {
        let stripped = comment.trim_start().trim_start_matches('←').trim_start();
        self.aes_patterns
            .iter()
            .any(|p| !p.is_empty() && stripped.starts_with(p.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collapsed {
    pub kept: Vec<RawRevision>,
    /// rev_ids of dropped intermediates, in history order.
    pub intermediates: Vec<u64>,
}

/// Keeps only the last revision of each run of consecutive same-user edits.
pub fn collapse_consecutive(revisions: &[RawRevision]) -> Collapsed {
    let mut kept = Vec::with_capacity(revisions.len());
    let mut intermediates = Vec::new();
    for (idx, rev) in revisions.iter().enumerate() {
        let next_same = revisions
            .get(idx + 1)
            .is_some_and(|next| next.user == rev.user);
        if next_same {
            intermediates.push(rev.rev_id);
        } else {
            kept.push(rev.clone());
        }
    }
    Collapsed {
        kept,
        intermediates,
    }
}

/// Identity reverts by full-text hash.
///
/// A revision whose text equals that of an earlier revision other than its
/// immediate predecessor reverts every revision in between. The most recent
/// earlier match is used; a revision keeps the first revert that undid it.
/// Suppressed revisions neither revert nor anchor reverts.
pub fn detect_reverts(revisions: &[RawRevision]) -> RevertMap {
    let mut map = RevertMap::new();
    let mut last_seen: HashMap<&str, usize> = HashMap::new();
    for (j, rev) in revisions.iter().enumerate() {
        if rev.suppressed {
            continue;
        }
        if let Some(&i) = last_seen.get(rev.text_hash.as_str()) {
            if i + 1 < j {
                for between in &revisions[i + 1..j] {
                    map.entry(between.rev_id).or_insert(rev.rev_id);
                }
            }
        }
        last_seen.insert(rev.text_hash.as_str(), j);
    }
    map
}

/// Drops vandalism edits together with their reverts.
///
/// A revert group (a reverting revision and everything it reverted) is
/// removed when the revert comment mentions "vandal", the reverter is a
/// known anti-vandalism bot, a reverted IP edit was undone within the
/// configured window (inclusive), or a reverted edit carries a blank/replace
/// automatic summary.
pub fn filter_vandalism(
    revisions: &[RawRevision],
    revert_map: &RevertMap,
    rules: &VandalismRules,
) -> CleanChain {
    let by_id: HashMap<u64, &RawRevision> = revisions.iter().map(|r| (r.rev_id, r)).collect();
    let position: HashMap<u64, usize> = revisions
        .iter()
        .enumerate()
        .map(|(i, r)| (r.rev_id, i))
        .collect();

    let mut groups: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
    for (&reverted, &reverter) in revert_map {
        if let Some(&pos) = position.get(&reverter) {
            groups.entry(pos).or_default().push(reverted);
        }
    }

    let mut excluded: HashMap<u64, ExclusionReason> = HashMap::new();
    for (pos, mut members) in groups {
        members.sort_by_key(|id| position.get(id).copied().unwrap_or(usize::MAX));
        let reverter = &revisions[pos];
        let reverted: Vec<&RawRevision> = members
            .iter()
            .filter_map(|id| by_id.get(id).copied())
            .collect();
        let reason = if reverter.comment.to_lowercase().contains("vandal") {
            Some(ExclusionReason::VandalismComment)
        } else if rules.bots.contains(&reverter.user) {
            Some(ExclusionReason::AntivandalBot)
        } else if reverted
            .iter()
            .any(|m| m.is_ip_user && reverter.timestamp - m.timestamp <= rules.ip_revert_window)
        {
            Some(ExclusionReason::IpFastRevert)
        } else if reverted.iter().any(|m| rules.matches_aes(&m.comment)) {
            Some(ExclusionReason::AesBlankOrReplace)
        } else {
            None
        };
        if let Some(reason) = reason {
            for id in members.iter().chain(std::iter::once(&reverter.rev_id)) {
                excluded.entry(*id).or_insert(reason);
            }
        }
    }

    let kept: Vec<RawRevision> = revisions
        .iter()
        .filter(|r| !excluded.contains_key(&r.rev_id))
        .cloned()
        .collect();
    let kept_ids: HashSet<u64> = kept.iter().map(|r| r.rev_id).collect();
    let revert_map = revert_map
        .iter()
        .filter(|(a, b)| kept_ids.contains(a) && kept_ids.contains(b))
        .map(|(a, b)| (*a, *b))
        .collect();
    let excluded = revisions
        .iter()
        .filter_map(|r| excluded.get(&r.rev_id).map(|reason| (r.rev_id, *reason)))
        .collect();
    CleanChain {
        revisions: kept,
        revert_map,
        excluded,
    }
}

/// Collapse, revert detection and vandalism filtering in one pass.
pub fn build_chain(history: &ArticleHistory, rules: &VandalismRules) -> CleanChain {
    let collapsed = collapse_consecutive(&history.revisions);
    let reverts = detect_reverts(&collapsed.kept);
    let mut chain = filter_vandalism(&collapsed.kept, &reverts, rules);
    let order: HashMap<u64, usize> = history
        .revisions
        .iter()
        .enumerate()
        .map(|(i, r)| (r.rev_id, i))
        .collect();
    chain.excluded.extend(
        collapsed
            .intermediates
            .into_iter()
            .map(|id| (id, ExclusionReason::CollapsedIntermediate)),
    );
    chain
        .excluded
        .sort_by_key(|(id, _)| order.get(id).copied().unwrap_or(usize::MAX));
    chain
}
