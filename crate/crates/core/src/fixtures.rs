//! Deterministic article histories for tests, benchmarks and demos.
//!
//! * [`worked_example_history`]: three revisions whose two disagreeing edits give
//!   the list link a score of 3/2 and "Scientific consensus" 1/2.
//! * [`stats_history`]: a six-revision history with a revert, an insertion
//!   and edits in two sections, small enough to tally by hand.
//! * [`synthetic_history`]: seeded random histories with modifications,
//!   insertions, deletions, section churn, identity reverts, IP vandalism
//!   with fast reverts, same-user runs and suppressed revisions.
//! * [`inject_vandalism`]: inserts a vandal edit and its revert into an
//!   existing history.

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::{ArticleHistory, HistorySource, RawRevision};

pub const WORKED_TITLE: &str = "Global warming";
pub const WORKED_LIST_LINK: &str =
    "List of scientists opposing the mainstream scientific assessment of global warming";
pub const WORKED_CONSENSUS_LINK: &str = "Scientific consensus";

/// Bundled XML export of [`worked_example_history`].
pub const WORKED_XML: &str = include_str!("../fixtures/worked_example.xml");

fn utc(s: &str) -> DateTime<Utc> {
    s.parse().expect("valid fixture timestamp")
}

pub fn worked_example_history() -> ArticleHistory {
    let link = WORKED_LIST_LINK;
    let revisions = vec![
        RawRevision::new(
            169_600_000,
            0,
            utc("2007-11-05T10:00:00Z"),
            "EditorA",
            "",
            format!(
                "A few [[{link}|individual scientists]] disagree with some of the main conclusions of the IPCC."
            ),
        ),
        RawRevision::new(
            169_685_102,
            169_600_000,
            utc("2007-11-06T22:22:50Z"),
            "Merzbow",
            "try \"small minority\" as suggested on talk, plus the nature ref is appropriate here",
            format!(
                "A small minority of [[{link}|climate scientists]] disagree with the main conclusions of the IPCC."
            ),
        ),
        RawRevision::new(
            169_761_113,
            169_685_102,
            utc("2007-11-07T03:41:47Z"),
            "Callmebc",
            "It's NOT a \"small minority of climate scientists\" disagreeing -- it's primarily random, non-climate scientists doing it",
            format!(
                "While there are [[{link}|individual scientists]] who might publicly disagree, these conclusions do represent the general [[scientific consensus]], especially among active climate scientists and researchers."
            ),
        ),
    ];
    ArticleHistory {
        article_title: WORKED_TITLE.to_string(),
        language_code: "en".to_string(),
        fetched_at: utc("2007-11-07T03:41:47Z"),
        revisions,
        source: HistorySource::Fixture,
        complete: true,
    }
}

pub const STATS_TITLE: &str = "Greenhouse gas";

/// Six revisions by Ann, Bob, Cy, Bob, Dee, Eve.
///
/// Bob rewords the first abstract sentence, Cy swaps one of its links and
/// Bob restores his own text (an identity revert of Cy). Dee inserts words
/// into the history-section sentence and Eve then rewrites its ending.
pub fn stats_history() -> ArticleHistory {
    let tail = "Models agree.\n\n== History ==\n";
    let text = |first: &str, history: &str| format!("{first} {tail}{history}");
    let s1 = "Earth warms because of [[Carbon dioxide]] and [[Methane]].";
    let s2 = "Earth warms mainly due to [[Carbon dioxide]] and [[Methane]].";
    let s3 = "Earth warms mainly due to [[Carbon dioxide]] and [[Water vapor]].";
    let h1 = "Early work by [[Svante Arrhenius]] estimated the effect.";
    let h2 = "Early work by [[Svante Arrhenius]] in 1896 estimated the effect.";
    let h3 = "Early work by [[Svante Arrhenius]] in 1896 estimated it.";
    let specs = [
        ("Ann", "create", text(s1, h1)),
        ("Bob", "wording", text(s2, h1)),
        ("Cy", "water vapor is the larger term", text(s3, h1)),
        ("Bob", "Undid revision 1003 by Cy", text(s2, h1)),
        ("Dee", "date", text(s2, h2)),
        ("Eve", "shorter", text(s2, h3)),
    ];
    let revisions = specs
        .into_iter()
        .enumerate()
        .map(|(i, (user, comment, wikitext))| {
            let id = 1001 + i as u64;
            let parent = if i == 0 { 0 } else { id - 1 };
            let ts = utc("2010-03-01T12:00:00Z") + Duration::hours(6 * i as i64);
            RawRevision::new(id, parent, ts, user, comment, wikitext)
        })
        .collect::<Vec<_>>();
    ArticleHistory {
        article_title: STATS_TITLE.to_string(),
        language_code: "en".to_string(),
        fetched_at: revisions.last().expect("non-empty").timestamp,
        revisions,
        source: HistorySource::Fixture,
        complete: true,
    }
}

/// Knobs for [`synthetic_history`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticParams {
    pub revisions: usize,
    /// Distinct link targets used (at most [`LINK_POOL`] length).
    pub links: usize,
    pub max_sections: usize,
    pub max_sentences_per_section: usize,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams {
            revisions: 40,
            links: 8,
            max_sections: 4,
            max_sentences_per_section: 6,
        }
    }
}

pub const LINK_POOL: [&str; 12] = [
    "Carbon dioxide",
    "Greenhouse effect",
    "Sea level rise",
    "Climate model",
    "Solar variation",
    "Ocean acidification",
    "Arctic sea ice decline",
    "Instrumental temperature record",
    "Radiative forcing",
    "Hockey stick graph",
    "Kyoto Protocol",
    "Methane",
];

const WORDS: [&str; 40] = [
    "the",
    "climate",
    "record",
    "warming",
    "ocean",
    "data",
    "trend",
    "carbon",
    "ice",
    "sea",
    "level",
    "heat",
    "study",
    "report",
    "change",
    "global",
    "surface",
    "average",
    "temperature",
    "emissions",
    "forcing",
    "feedback",
    "cloud",
    "solar",
    "cycle",
    "estimate",
    "range",
    "scientists",
    "panel",
    "evidence",
    "strong",
    "weak",
    "recent",
    "century",
    "decade",
    "rapid",
    "slow",
    "measured",
    "observed",
    "projected",
];

const OPENERS: [&str; 12] = [
    "Most",
    "Several",
    "Recent",
    "Other",
    "Some",
    "Many",
    "These",
    "Global",
    "Observed",
    "Long",
    "Critics",
    "Researchers",
];

const HEADINGS: [&str; 6] = [
    "History",
    "Causes",
    "Effects",
    "Responses",
    "Debate",
    "Research",
];

const USERS: [&str; 8] = [
    "Alder", "Birch", "Cedar", "Dogwood", "Elm", "Fir", "Gum", "Hazel",
];

const IPS: [&str; 4] = ["192.0.2.17", "198.51.100.4", "203.0.113.250", "2001:db8::7"];

const COMMENTS: [&str; 6] = ["copyedit", "expand", "add source", "wording", "", "tweak"];

#[derive(Debug, Clone, PartialEq)]
struct Doc {
    /// `None` heading is the abstract, always first.
    sections: Vec<(Option<&'static str>, Vec<String>)>,
}

impl Doc {
    fn render(&self) -> String {
        let mut out = String::new();
        for (heading, sentences) in &self.sections {
            if let Some(h) = heading {
                out.push_str(&format!("== {h} ==\n"));
            }
            out.push_str(&sentences.join(" "));
            out.push_str("\n\n");
        }
        out.trim_end().to_string()
    }

    fn sentence_count(&self) -> usize {
        self.sections.iter().map(|(_, s)| s.len()).sum()
    }
}

struct Generator<'p> {
    rng: ChaCha8Rng,
    params: &'p SyntheticParams,
    links: Vec<&'static str>,
}

impl Generator<'_> {
    fn link_markup(&mut self) -> String {
        let target = *self.links.choose(&mut self.rng).expect("links non-empty");
        match self.rng.gen_range(0..4) {
            0 => format!("[[{}]]", lowercase_first(target)),
            1 => format!(
                "[[{}|{}]]",
                target.replace(' ', "_"),
                WORDS[self.rng.gen_range(0..WORDS.len())]
            ),
            _ => format!("[[{target}]]"),
        }
    }

    fn sentence(&mut self) -> String {
        let mut parts = vec![OPENERS[self.rng.gen_range(0..OPENERS.len())].to_string()];
        let n = self.rng.gen_range(4..12);
        for _ in 0..n {
            if self.rng.gen_bool(0.15) {
                parts.push(self.link_markup());
            } else {
                parts.push(WORDS[self.rng.gen_range(0..WORDS.len())].to_string());
            }
        }
        if !parts.iter().any(|p| p.starts_with("[[")) && self.rng.gen_bool(0.6) {
            let at = self.rng.gen_range(1..=parts.len());
            let link = self.link_markup();
            parts.insert(at, link);
        }
        format!("{}.", parts.join(" "))
    }

    fn mutate_sentence(&mut self, sentence: &str) -> String {
        let body = sentence.trim_end_matches('.');
        let mut parts: Vec<String> = body.split(' ').map(str::to_string).collect();
        // Links never contain spaces after rejoining, so regroup "[[a b]]".
        parts = regroup_links(parts);
        let edits = self.rng.gen_range(1..=2);
        for _ in 0..edits {
            let at = self.rng.gen_range(1..parts.len().max(2));
            match self.rng.gen_range(0..5) {
                0 if parts.len() > 3 && at < parts.len() => {
                    parts.remove(at);
                }
                1 => {
                    let link = self.link_markup();
                    parts.insert(at.min(parts.len()), link);
                }
                2 if at < parts.len() && parts[at].starts_with("[[") => {
                    parts[at] = self.link_markup();
                }
                3 => parts.insert(
                    at.min(parts.len()),
                    WORDS[self.rng.gen_range(0..WORDS.len())].to_string(),
                ),
                _ if at < parts.len() => {
                    parts[at] = WORDS[self.rng.gen_range(0..WORDS.len())].to_string();
                }
                _ => parts.push(WORDS[self.rng.gen_range(0..WORDS.len())].to_string()),
            }
        }
        format!("{}.", parts.join(" "))
    }

    fn random_sentence_slot(&mut self, doc: &Doc) -> Option<(usize, usize)> {
        let slots: Vec<(usize, usize)> = doc
            .sections
            .iter()
            .enumerate()
            .flat_map(|(s, (_, sents))| (0..sents.len()).map(move |i| (s, i)))
            .collect();
        slots.choose(&mut self.rng).copied()
    }

    /// Applies one random content edit.
    fn edit(&mut self, doc: &mut Doc) {
        let max_sent = self.params.max_sentences_per_section.max(1);
        let roll = self.rng.gen_range(0..100);
        if roll < 50 {
            if let Some((s, i)) = self.random_sentence_slot(doc) {
                let new = self.mutate_sentence(&doc.sections[s].1[i]);
                doc.sections[s].1[i] = new;
                return;
            }
        }
        if roll < 70 {
            let s = self.rng.gen_range(0..doc.sections.len());
            if doc.sections[s].1.len() < max_sent {
                let at = self.rng.gen_range(0..=doc.sections[s].1.len());
                let sentence = self.sentence();
                doc.sections[s].1.insert(at, sentence);
                return;
            }
        }
        if roll < 85 && doc.sentence_count() > 1 {
            if let Some((s, i)) = self.random_sentence_slot(doc) {
                if doc.sections[s].1.len() > 1 {
                    doc.sections[s].1.remove(i);
                    return;
                }
            }
        }
        if roll < 93 && doc.sections.len() <= self.params.max_sections {
            let used: Vec<&str> = doc.sections.iter().filter_map(|(h, _)| *h).collect();
            let free: Vec<&'static str> = HEADINGS
                .iter()
                .copied()
                .filter(|h| !used.contains(h))
                .collect();
            if let Some(&h) = free.choose(&mut self.rng) {
                let n = self.rng.gen_range(1..=max_sent.min(3));
                let sentences = (0..n).map(|_| self.sentence()).collect();
                doc.sections.push((Some(h), sentences));
                return;
            }
        }
        if doc.sections.len() > 1 && self.rng.gen_bool(0.5) {
            let s = self.rng.gen_range(1..doc.sections.len());
            doc.sections.remove(s);
            return;
        }
        let s = self.rng.gen_range(0..doc.sections.len());
        let sentence = self.sentence();
        if doc.sections[s].1.len() < max_sent {
            doc.sections[s].1.push(sentence);
        } else {
            let last = doc.sections[s].1.len() - 1;
            doc.sections[s].1[last] = sentence;
        }
    }
}

fn lowercase_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn regroup_links(parts: Vec<String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut open = false;
    for p in parts {
        if open {
            let last = out.last_mut().expect("open link");
            last.push(' ');
            last.push_str(&p);
            open = !p.contains("]]");
        } else {
            open = p.starts_with("[[") && !p.contains("]]");
            out.push(p);
        }
    }
    out
}

/// A seeded random history. Identical `(seed, params)` give identical output.
pub fn synthetic_history(seed: u64, params: &SyntheticParams) -> ArticleHistory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_links = params.links.clamp(1, LINK_POOL.len());
    let mut pool = LINK_POOL.to_vec();
    pool.shuffle(&mut rng);
    pool.truncate(n_links);
    let mut g = Generator {
        rng,
        params,
        links: pool,
    };

    let start = Utc
        .with_ymd_and_hms(2005, 1, 3, 9, 0, 0)
        .single()
        .expect("valid date");
    let mut doc = Doc {
        sections: vec![(None, (0..3).map(|_| g.sentence()).collect())],
    };
    let mut snapshots: Vec<String> = Vec::new();
    let mut revisions: Vec<RawRevision> = Vec::new();
    let mut ts = start;
    let mut rev_id = 1000u64;
    let mut vandal_counter = 0usize;
    let mut last_user: Option<String> = None;

    let push = |revisions: &mut Vec<RawRevision>,
                snapshots: &mut Vec<String>,
                ts: DateTime<Utc>,
                rev_id: u64,
                user: &str,
                comment: String,
                text: String,
                suppressed: bool| {
        let parent = revisions.last().map_or(0, |r: &RawRevision| r.rev_id);
        let rev = if suppressed {
            RawRevision::suppressed(rev_id, parent, ts, user, comment)
        } else {
            RawRevision::new(rev_id, parent, ts, user, comment, text.clone())
        };
        revisions.push(rev);
        snapshots.push(text);
    };

    while revisions.len() < params.revisions {
        rev_id += g.rng.gen_range(1..50);
        ts += Duration::seconds(g.rng.gen_range(600..172_800));
        let user: String = match &last_user {
            Some(u) if g.rng.gen_bool(0.15) => u.clone(),
            _ if g.rng.gen_bool(0.15) => IPS[g.rng.gen_range(0..IPS.len())].to_string(),
            _ => USERS[g.rng.gen_range(0..USERS.len())].to_string(),
        };
        let previous = snapshots.last().cloned().unwrap_or_default();
        let roll = g.rng.gen_range(0..100);

        if roll < 8 && snapshots.len() >= 3 && revisions.len() + 2 <= params.revisions {
            // IP vandalism followed by a restore, fast or slow.
            vandal_counter += 1;
            let ip = IPS[g.rng.gen_range(0..IPS.len())];
            let junk = format!("{previous} Lol {vandal_counter} was here.");
            push(
                &mut revisions,
                &mut snapshots,
                ts,
                rev_id,
                ip,
                String::new(),
                junk,
                false,
            );
            let delay = if g.rng.gen_bool(0.7) {
                g.rng.gen_range(5..55)
            } else {
                g.rng.gen_range(120..3600)
            };
            ts += Duration::seconds(delay);
            rev_id += 1;
            let reverter = loop {
                let u = USERS[g.rng.gen_range(0..USERS.len())];
                if Some(u) != last_user.as_deref() {
                    break u;
                }
            };
            push(
                &mut revisions,
                &mut snapshots,
                ts,
                rev_id,
                reverter,
                format!("Reverted edits by {ip}"),
                previous,
                false,
            );
            last_user = Some(reverter.to_string());
            continue;
        }

        if roll < 18 && snapshots.len() >= 3 {
            // Identity revert to a text two to four revisions back.
            let back = g.rng.gen_range(2..=4.min(snapshots.len()));
            let target = snapshots[snapshots.len() - back].clone();
            let target_suppressed = revisions[revisions.len() - back].suppressed;
            if target != previous
                && !target_suppressed
                && last_user.as_deref() != Some(user.as_str())
            {
                if let Some(d) = parse_doc(&target) {
                    doc = d;
                }
                let undone = revisions.last().expect("non-empty");
                let comment = format!("Undid revision {} by {}", undone.rev_id, undone.user);
                push(
                    &mut revisions,
                    &mut snapshots,
                    ts,
                    rev_id,
                    &user,
                    comment,
                    target,
                    false,
                );
                last_user = Some(user);
                continue;
            }
        }

        let mut text = previous.clone();
        for _ in 0..8 {
            g.edit(&mut doc);
            text = doc.render();
            if text != previous && !snapshots.contains(&text) {
                break;
            }
        }
        if text == previous {
            let sentence = g.sentence();
            doc.sections[0].1.push(sentence);
            text = doc.render();
        }
        let suppressed = roll >= 97 && !revisions.is_empty();
        let comment = COMMENTS[g.rng.gen_range(0..COMMENTS.len())].to_string();
        push(
            &mut revisions,
            &mut snapshots,
            ts,
            rev_id,
            &user,
            comment,
            text,
            suppressed,
        );
        last_user = Some(user);
    }

    ArticleHistory {
        article_title: format!("Synthetic {seed}"),
        language_code: "en".to_string(),
        fetched_at: revisions.last().map_or(start, |r| r.timestamp),
        revisions,
        source: HistorySource::Fixture,
        complete: true,
    }
}

/// Rebuilds generator state from rendered text.
fn parse_doc(text: &str) -> Option<Doc> {
    let mut sections: Vec<(Option<&'static str>, Vec<String>)> = vec![(None, Vec::new())];
    for block in text.split("\n\n") {
        let (heading, body) = match block.strip_prefix("== ") {
            Some(rest) => {
                let (h, body) = rest.split_once(" ==\n")?;
                (Some(*HEADINGS.iter().find(|x| **x == h)?), body)
            }
            None => (None, block),
        };
        let sentences = split_generated(body);
        match heading {
            None => sections[0].1.extend(sentences),
            Some(h) => sections.push((Some(h), sentences)),
        }
    }
    Some(Doc { sections })
}

/// Splits text produced by [`Doc::render`]: sentences end with "." and the
/// generator never emits "." elsewhere.
fn split_generated(body: &str) -> Vec<String> {
    body.split_inclusive(". ")
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Kinds of vandalism pair recognised by the chain filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VandalismKind {
    /// The revert comment says "vandalism".
    VandalComment,
    /// The revert comes from an anti-vandalism bot.
    BotRevert,
    /// An IP edit reverted after the given number of seconds.
    FastIpRevert(i64),
    /// The vandal edit carries a blank-page automatic summary.
    AutoSummary,
}

/// Inserts a vandal edit and a revert restoring revision `after`'s text,
/// between revisions `after` and `after + 1`.
///
/// The pair uses users and texts that appear nowhere else. Returns `None`
/// when the slot cannot host it: revision `after` is suppressed, its
/// successor has the same user (the two would otherwise have collapsed) or
/// the time gap is too small.
pub fn inject_vandalism(
    history: &ArticleHistory,
    after: usize,
    kind: VandalismKind,
) -> Option<ArticleHistory> {
    let base = history.revisions.get(after)?;
    let next = history.revisions.get(after + 1);
    if base.suppressed || next.is_some_and(|n| n.user == base.user) {
        return None;
    }
    let delay = match kind {
        VandalismKind::FastIpRevert(s) => s,
        _ => 30,
    };
    let vandal_ts = base.timestamp + Duration::seconds(1);
    let revert_ts = vandal_ts + Duration::seconds(delay);
    if next.is_some_and(|n| n.timestamp <= revert_ts) {
        return None;
    }
    let max_id = history
        .revisions
        .iter()
        .map(|r| r.rev_id)
        .max()
        .unwrap_or(0);
    let (vandal_user, vandal_comment, vandal_text) = match kind {
        VandalismKind::FastIpRevert(_) => (
            "192.0.2.254",
            String::new(),
            format!("{} Injected nonsense.", base.wikitext),
        ),
        VandalismKind::AutoSummary => (
            "Blanker0",
            "\u{2190}Blanked the page".to_string(),
            String::new(),
        ),
        _ => (
            "Injector0",
            String::new(),
            format!("{} Injected nonsense.", base.wikitext),
        ),
    };
    let (reverter, revert_comment) = match kind {
        VandalismKind::VandalComment => ("Patroller0", "Reverted vandalism by Injector0"),
        VandalismKind::BotRevert => ("ClueBot NG", "Reverting possible bad edit by Injector0"),
        _ => ("Patroller0", "Reverted edits"),
    };
    let vandal = RawRevision::new(
        max_id + 1,
        base.rev_id,
        vandal_ts,
        vandal_user,
        vandal_comment,
        vandal_text,
    );
    let revert = RawRevision::new(
        max_id + 2,
        max_id + 1,
        revert_ts,
        reverter,
        revert_comment,
        base.wikitext.clone(),
    );
    let mut out = history.clone();
    out.revisions.insert(after + 1, vandal);
    out.revisions.insert(after + 2, revert);
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffcore::jaccard;
    use crate::ingest::{parse_dump, write_dump};
    use crate::wikitext::{split_sections, split_sentences};

    #[test]
    fn worked_example_pairs_clear_the_similarity_threshold() {
        let h = worked_example_history();
        for w in h.revisions.windows(2) {
            assert!(jaccard(&w[0].wikitext, &w[1].wikitext) >= 0.3);
        }
        assert!(h.validate().is_ok());
    }

    #[test]
    fn bundled_dump_matches_generated_history() {
        let mut buf = Vec::new();
        write_dump(&mut buf, &worked_example_history()).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), WORKED_XML);
        let parsed = parse_dump(WORKED_XML.as_bytes(), WORKED_TITLE).unwrap();
        assert_eq!(parsed.revisions, worked_example_history().revisions);
    }

    #[test]
    fn synthetic_is_deterministic_and_valid() {
        let p = SyntheticParams::default();
        for seed in 0..20 {
            let a = synthetic_history(seed, &p);
            assert_eq!(a, synthetic_history(seed, &p));
            assert_eq!(a.revisions.len(), p.revisions);
            a.validate().unwrap();
            for w in a.revisions.windows(2) {
                if !w[0].suppressed && !w[1].suppressed {
                    assert_ne!(w[0].wikitext, w[1].wikitext, "seed {seed}");
                }
            }
        }
    }

    #[test]
    fn synthetic_text_segments_as_generated() {
        let h = synthetic_history(3, &SyntheticParams::default());
        for rev in h.revisions.iter().filter(|r| !r.suppressed) {
            let doc = parse_doc(&rev.wikitext).expect("parsable");
            let sections = split_sections(&rev.wikitext);
            let total: usize = sections
                .iter()
                .map(|s| split_sentences(&s.body).len())
                .sum();
            assert_eq!(total, doc.sentence_count(), "{}", rev.wikitext);
            assert_eq!(doc.render(), rev.wikitext);
        }
    }

    #[test]
    fn synthetic_uses_bounded_link_set() {
        let p = SyntheticParams {
            links: 5,
            ..SyntheticParams::default()
        };
        let h = synthetic_history(11, &p);
        let mut seen = std::collections::BTreeSet::new();
        for rev in &h.revisions {
            for l in crate::wikitext::extract_links(&rev.wikitext) {
                seen.insert(l.canonical_target);
            }
        }
        assert!(!seen.is_empty() && seen.len() <= 5, "{seen:?}");
    }

    #[test]
    fn injection_needs_a_usable_slot() {
        let h = stats_history();
        let injected = inject_vandalism(&h, 1, VandalismKind::BotRevert).unwrap();
        assert_eq!(injected.revisions.len(), h.revisions.len() + 2);
        injected.validate().unwrap();
        assert_eq!(injected.revisions[3].wikitext, h.revisions[1].wikitext);
        let mut same_user = h.clone();
        same_user.revisions[2].user = same_user.revisions[1].user.clone();
        assert!(inject_vandalism(&same_user, 1, VandalismKind::BotRevert).is_none());
    }
}
