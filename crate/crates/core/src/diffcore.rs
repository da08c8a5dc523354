//! Section- and sentence-level comparison of consecutive revisions, and the
//! classification of the resulting changes into per-link edit events.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use similar::{capture_diff_slices, Algorithm, DiffOp};

use crate::chain::{CleanChain, RevertMap};
use crate::ingest::RawRevision;
use crate::wikitext::{self, Section, SectionKey, Sentence, WikiLink};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenOp {
    Equal,
    Delete,
    Insert,
}

/// A maximal run of tokens sharing one diff operation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffRun {
    pub op: TokenOp,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    Modified,
    Deleted,
    Inserted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePair {
    pub section_key: SectionKey,
    pub old_text: Option<String>,
    pub new_text: Option<String>,
    pub kind: PairKind,
    pub old_links: Vec<WikiLink>,
    pub new_links: Vec<WikiLink>,
    /// Canonical targets present in either version.
    pub links_union: BTreeSet<String>,
    /// `|links_union|`, the weight divisor of the pair.
    pub w: usize,
    pub token_diff: Vec<DiffRun>,
    pub has_deletion: bool,
}

impl SentencePair {
    fn build(
        section_key: SectionKey,
        old: Option<&Sentence>,
        new: Option<&Sentence>,
    ) -> SentencePair {
        let kind = match (old, new) {
            (Some(_), Some(_)) => PairKind::Modified,
            (Some(_), None) => PairKind::Deleted,
            (None, Some(_)) => PairKind::Inserted,
            (None, None) => unreachable!("sentence pair needs at least one side"),
        };
        let old_links = old.map(|s| s.links.clone()).unwrap_or_default();
        let new_links = new.map(|s| s.links.clone()).unwrap_or_default();
        let links_union: BTreeSet<String> = old_links
            .iter()
            .chain(&new_links)
            .map(|l| l.canonical_target.clone())
            .collect();
        let token_diff = match (old, new) {
            (Some(o), Some(n)) => token_diff(&o.text, &n.text),
            (Some(o), None) => vec![DiffRun {
                op: TokenOp::Delete,
                text: o.text.clone(),
            }],
            (None, Some(n)) => vec![DiffRun {
                op: TokenOp::Insert,
                text: n.text.clone(),
            }],
            (None, None) => Vec::new(),
        };
        let has_deletion = token_diff.iter().any(|r| r.op == TokenOp::Delete);
        SentencePair {
            section_key,
            old_text: old.map(|s| s.text.clone()),
            new_text: new.map(|s| s.text.clone()),
            kind,
            w: links_union.len(),
            links_union,
            old_links,
            new_links,
            token_diff,
            has_deletion,
        }
    }

    /// Text reassembled from the equal and delete runs.
    pub fn reconstruct_old(&self) -> String {
        self.runs_concat(TokenOp::Delete)
    }

    /// Text reassembled from the equal and insert runs.
    pub fn reconstruct_new(&self) -> String {
        self.runs_concat(TokenOp::Insert)
    }

    fn runs_concat(&self, side: TokenOp) -> String {
        self.token_diff
            .iter()
            .filter(|r| r.op == TokenOp::Equal || r.op == side)
            .map(|r| r.text.as_str())
            .collect()
    }

    /// Byte ranges of the changed runs in the old (deletes) and new
    /// (inserts) texts.
    fn changed_ranges(&self) -> (Vec<Range<usize>>, Vec<Range<usize>>) {
        let (mut old_at, mut new_at) = (0, 0);
        let (mut deleted, mut inserted) = (Vec::new(), Vec::new());
        for run in &self.token_diff {
            let len = run.text.len();
            match run.op {
                TokenOp::Equal => {
                    old_at += len;
                    new_at += len;
                }
                TokenOp::Delete => {
                    deleted.push(old_at..old_at + len);
                    old_at += len;
                }
                TokenOp::Insert => {
                    inserted.push(new_at..new_at + len);
                    new_at += len;
                }
            }
        }
        (deleted, inserted)
    }

    /// True when a changed run overlaps the markup of `link` in either version.
    pub fn touches_link(&self, link: &str) -> bool {
        let (deleted, inserted) = self.changed_ranges();
        let overlaps = |links: &[WikiLink], changed: &[Range<usize>]| {
            links
                .iter()
                .filter(|l| l.canonical_target == link)
                .any(|l| {
                    changed
                        .iter()
                        .any(|c| c.start < l.raw_span.end && l.raw_span.start < c.end)
                })
        };
        overlaps(&self.old_links, &deleted) || overlaps(&self.new_links, &inserted)
    }
}

/// Splits text into diff tokens: alphanumeric runs, whitespace runs, the
/// two-character markers `[[ ]] {{ }}`, and single characters otherwise.
/// Concatenating the tokens yields the input.
pub fn tokenize(text: &str) -> Vec<&str> {
    let mut tokens = Vec::new();
    let mut rest = text;
    while let Some(first) = rest.chars().next() {
        let len = if first.is_alphanumeric() {
            rest.find(|c: char| !c.is_alphanumeric())
                .unwrap_or(rest.len())
        } else if first.is_whitespace() {
            rest.find(|c: char| !c.is_whitespace())
                .unwrap_or(rest.len())
        } else if ["[[", "]]", "{{", "}}"].iter().any(|m| rest.starts_with(m)) {
            2
        } else {
            first.len_utf8()
        };
        tokens.push(&rest[..len]);
        rest = &rest[len..];
    }
    tokens
}

fn push_run(runs: &mut Vec<DiffRun>, op: TokenOp, tokens: &[&str]) {
    if tokens.is_empty() {
        return;
    }
    let text: String = tokens.concat();
    match runs.last_mut() {
        Some(last) if last.op == op => last.text.push_str(&text),
        _ => runs.push(DiffRun { op, text }),
    }
}

/// Word-token diff of two sentences. Within a change, deletions precede
/// insertions.
pub fn token_diff(old: &str, new: &str) -> Vec<DiffRun> {
    let a = tokenize(old);
    let b = tokenize(new);
    let mut runs = Vec::new();
    for op in capture_diff_slices(Algorithm::Myers, &a, &b) {
        match op {
            DiffOp::Equal { old_index, len, .. } => {
                push_run(&mut runs, TokenOp::Equal, &a[old_index..old_index + len])
            }
            DiffOp::Delete {
                old_index, old_len, ..
            } => push_run(
                &mut runs,
                TokenOp::Delete,
                &a[old_index..old_index + old_len],
            ),
            DiffOp::Insert {
                new_index, new_len, ..
            } => push_run(
                &mut runs,
                TokenOp::Insert,
                &b[new_index..new_index + new_len],
            ),
            DiffOp::Replace {
                old_index,
                old_len,
                new_index,
                new_len,
            } => {
                push_run(
                    &mut runs,
                    TokenOp::Delete,
                    &a[old_index..old_index + old_len],
                );
                push_run(
                    &mut runs,
                    TokenOp::Insert,
                    &b[new_index..new_index + new_len],
                );
            }
        }
    }
    runs
}

fn word_set(text: &str) -> BTreeSet<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Word-level Jaccard similarity; 0 when neither side has words.
pub fn jaccard(a: &str, b: &str) -> f64 {
    let (a, b) = (word_set(a), word_set(b));
    let union = a.union(&b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

/// Sections matched across a revision pair.
#[derive(Debug, Clone, Default)]
pub struct SectionPairing<'a> {
    /// Matched sections whose body text differs.
    pub changed: Vec<(&'a Section, &'a Section)>,
    pub removed: Vec<&'a Section>,
    pub added: Vec<&'a Section>,
}

/// Matches sections by `(key, ordinal)`. Renamed sections show up as one
/// removal plus one addition.
pub fn pair_sections<'a>(old: &'a [Section], new: &'a [Section]) -> SectionPairing<'a> {
    let mut pairing = SectionPairing::default();
    for o in old {
        match new.iter().find(|n| n.key == o.key) {
            Some(n) if n.body != o.body => pairing.changed.push((o, n)),
            Some(_) => {}
            None => pairing.removed.push(o),
        }
    }
    for n in new {
        if !old.iter().any(|o| o.key == n.key) {
            pairing.added.push(n);
        }
    }
    pairing
}

/// Aligns the sentences of two versions of a section.
///
/// Exact-match alignment first (longest common subsequence), then exact
/// matches among the leftovers (moved sentences, not edits), then greedy
/// pairing by Jaccard similarity at or above `threshold`. Ties prefer the
/// pair whose positions among the leftovers are closest, then the lower old
/// index.
pub fn pair_sentences(old: &Section, new: &Section, threshold: f64) -> Vec<SentencePair> {
    let a: Vec<&str> = old.sentences.iter().map(|s| s.text.as_str()).collect();
    let b: Vec<&str> = new.sentences.iter().map(|s| s.text.as_str()).collect();
    let mut old_left = Vec::new();
    let mut new_left = Vec::new();
    for op in capture_diff_slices(Algorithm::Myers, &a, &b) {
        match op {
            DiffOp::Equal { .. } => {}
            DiffOp::Delete {
                old_index, old_len, ..
            } => old_left.extend(old_index..old_index + old_len),
            DiffOp::Insert {
                new_index, new_len, ..
            } => new_left.extend(new_index..new_index + new_len),
            DiffOp::Replace {
                old_index,
                old_len,
                new_index,
                new_len,
            } => {
                old_left.extend(old_index..old_index + old_len);
                new_left.extend(new_index..new_index + new_len);
            }
        }
    }

    // Moved sentences.
    let mut new_used = vec![false; new_left.len()];
    old_left.retain(|&i| {
        match new_left
            .iter()
            .enumerate()
            .position(|(k, &j)| !new_used[k] && b[j] == a[i])
        {
            Some(k) => {
                new_used[k] = true;
                false
            }
            None => true,
        }
    });
    let new_left: Vec<usize> = new_left
        .into_iter()
        .zip(new_used)
        .filter(|(_, used)| !used)
        .map(|(j, _)| j)
        .collect();

    let mut candidates = Vec::new();
    for (ro, &i) in old_left.iter().enumerate() {
        for (rn, &j) in new_left.iter().enumerate() {
            let sim = jaccard(a[i], b[j]);
            if sim >= threshold && sim > 0.0 {
                candidates.push((sim, ro.abs_diff(rn), i, j));
            }
        }
    }
    candidates.sort_by(|x, y| {
        y.0.total_cmp(&x.0)
            .then(x.1.cmp(&y.1))
            .then(x.2.cmp(&y.2))
            .then(x.3.cmp(&y.3))
    });
    let mut old_taken = vec![false; a.len()];
    let mut new_taken = vec![false; b.len()];
    let mut matched: Vec<(Option<usize>, Option<usize>)> = Vec::new();
    for (_, _, i, j) in candidates {
        if !old_taken[i] && !new_taken[j] {
            old_taken[i] = true;
            new_taken[j] = true;
            matched.push((Some(i), Some(j)));
        }
    }
    matched.extend(
        old_left
            .iter()
            .filter(|&&i| !old_taken[i])
            .map(|&i| (Some(i), None)),
    );
    matched.extend(
        new_left
            .iter()
            .filter(|&&j| !new_taken[j])
            .map(|&j| (None, Some(j))),
    );
    matched.sort_by_key(|&(i, j)| (i.unwrap_or(usize::MAX), j.unwrap_or(usize::MAX)));

    matched
        .into_iter()
        .map(|(i, j)| {
            SentencePair::build(
                new.key.clone(),
                i.map(|i| &old.sentences[i]),
                j.map(|j| &new.sentences[j]),
            )
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditType {
    Delete,
    Insert,
    ElementChange,
    SentenceChange,
    SectionChange,
}

impl EditType {
    pub const ALL: [EditType; 5] = [
        EditType::Delete,
        EditType::Insert,
        EditType::ElementChange,
        EditType::SentenceChange,
        EditType::SectionChange,
    ];

    /// One-letter code shown in detail tables.
    pub fn code(self) -> &'static str {
        match self {
            EditType::Delete => "d",
            EditType::Insert => "i",
            EditType::ElementChange => "e",
            EditType::SentenceChange => "s",
            EditType::SectionChange => "x",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EditType::Delete => "delete",
            EditType::Insert => "insert",
            EditType::ElementChange => "element_change",
            EditType::SentenceChange => "sentence_change",
            EditType::SectionChange => "section_change",
        }
    }

    /// Kinds that express disagreement and therefore count toward scores.
    pub fn is_scored(self) -> bool {
        matches!(
            self,
            EditType::Delete | EditType::ElementChange | EditType::SentenceChange
        )
    }
}

impl fmt::Display for EditType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One classified change touching one wiki link.
#[derive(Debug, Clone, PartialEq)]
pub struct EditEvent {
    pub rev_id: u64,
    pub prev_rev_id: u64,
    pub timestamp: DateTime<Utc>,
    pub user: String,
    pub comment: String,
    pub section_key: SectionKey,
    /// Chain-wide sequence number of the sentence pair.
    pub pair_id: usize,
    pub sentence_pair: Arc<SentencePair>,
    pub link: String,
    pub edit_type: EditType,
    pub scored: bool,
    pub reverted_by: Option<u64>,
}

/// Everything that changed between two consecutive revisions.
#[derive(Debug, Clone, PartialEq)]
pub struct RevisionDiff {
    pub old_rev_id: u64,
    pub new_rev_id: u64,
    /// Pairs from sections present in both revisions.
    pub sentence_pairs: Vec<Arc<SentencePair>>,
    /// One pair per sentence of a wholly removed or added section.
    pub section_pairs: Vec<Arc<SentencePair>>,
}

impl RevisionDiff {
    pub fn is_empty(&self) -> bool {
        self.sentence_pairs.is_empty() && self.section_pairs.is_empty()
    }
}

pub fn diff_texts(
    old_rev: u64,
    old_text: &str,
    new_rev: u64,
    new_text: &str,
    threshold: f64,
) -> RevisionDiff {
    let mut diff = RevisionDiff {
        old_rev_id: old_rev,
        new_rev_id: new_rev,
        sentence_pairs: Vec::new(),
        section_pairs: Vec::new(),
    };
    if old_text == new_text {
        return diff;
    }
    let old_sections = wikitext::split_sections(old_text);
    let new_sections = wikitext::split_sections(new_text);
    let pairing = pair_sections(&old_sections, &new_sections);
    for (o, n) in &pairing.changed {
        diff.sentence_pairs
            .extend(pair_sentences(o, n, threshold).into_iter().map(Arc::new));
    }
    for s in &pairing.removed {
        diff.section_pairs.extend(
            s.sentences
                .iter()
                .map(|sent| Arc::new(SentencePair::build(s.key.clone(), Some(sent), None))),
        );
    }
    for s in &pairing.added {
        diff.section_pairs.extend(
            s.sentences
                .iter()
                .map(|sent| Arc::new(SentencePair::build(s.key.clone(), None, Some(sent)))),
        );
    }
    diff
}

/// Event type of `link` within a matched-section sentence pair.
pub fn classify_pair(pair: &SentencePair, link: &str) -> EditType {
    match pair.kind {
        PairKind::Deleted => EditType::Delete,
        PairKind::Inserted => EditType::Insert,
        PairKind::Modified if !pair.has_deletion => EditType::Insert,
        PairKind::Modified if pair.touches_link(link) => EditType::ElementChange,
        PairKind::Modified => EditType::SentenceChange,
    }
}

/// One event per (sentence pair, link). `first_pair_id` numbers the pairs of
/// this diff consecutively, sentence pairs before section pairs.
pub fn classify_events(
    old_rev: &RawRevision,
    new_rev: &RawRevision,
    diff: &RevisionDiff,
    revert_map: &RevertMap,
    first_pair_id: usize,
) -> Vec<EditEvent> {
    let reverted_by = revert_map.get(&new_rev.rev_id).copied();
    let event =
        |pair_id: usize, pair: &Arc<SentencePair>, link: &str, edit_type: EditType| EditEvent {
            rev_id: new_rev.rev_id,
            prev_rev_id: old_rev.rev_id,
            timestamp: new_rev.timestamp,
            user: new_rev.user.clone(),
            comment: new_rev.comment.clone(),
            section_key: pair.section_key.clone(),
            pair_id,
            sentence_pair: Arc::clone(pair),
            link: link.to_string(),
            edit_type,
            scored: edit_type.is_scored(),
            reverted_by,
        };
    let mut events = Vec::new();
    let mut pair_id = first_pair_id;
    for pair in &diff.sentence_pairs {
        for link in &pair.links_union {
            events.push(event(pair_id, pair, link, classify_pair(pair, link)));
        }
        pair_id += 1;
    }
    for pair in &diff.section_pairs {
        for link in &pair.links_union {
            events.push(event(pair_id, pair, link, EditType::SectionChange));
        }
        pair_id += 1;
    }
    events
}

/// Diffs of every consecutive revision pair of a chain plus their events.
#[derive(Debug, Clone, Default)]
pub struct ChainDiff {
    pub diffs: Vec<RevisionDiff>,
    pub events: Vec<EditEvent>,
}

/// Diffs a whole chain. Suppressed revisions are skipped: the next visible
/// revision is compared with the last visible one before it. Pairs are
/// processed in parallel; output order follows the chain.
pub fn diff_chain(chain: &CleanChain, threshold: f64) -> ChainDiff {
    let visible: Vec<&RawRevision> = chain.revisions.iter().filter(|r| !r.suppressed).collect();
    let diffs: Vec<RevisionDiff> = visible
        .par_windows(2)
        .map(|w| {
            diff_texts(
                w[0].rev_id,
                &w[0].wikitext,
                w[1].rev_id,
                &w[1].wikitext,
                threshold,
            )
        })
        .collect();
    let mut events = Vec::new();
    let mut next_id = 0;
    for (w, diff) in visible.windows(2).zip(&diffs) {
        events.extend(classify_events(
            w[0],
            w[1],
            diff,
            &chain.revert_map,
            next_id,
        ));
        next_id += diff.sentence_pairs.len() + diff.section_pairs.len();
    }
    ChainDiff { diffs, events }
}
