//! Structural parsing of wikitext into sections, sentences and wiki links.
//!
//! All offsets are byte offsets into the string they were computed on.
//! Templates (`{{...}}`, nesting-aware) are opaque: sentence boundaries never
//! fall inside them and links inside them are not extracted.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

/// An internal `[[target|display]]` link.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WikiLink {
    pub canonical_target: String,
    pub display_text: String,
    /// Byte range of the full `[[...]]` markup in the sentence text.
    pub raw_span: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SectionKey {
    pub key: String,
    pub ordinal: u32,
}

impl SectionKey {
    pub fn new(key: impl Into<String>, ordinal: u32) -> Self {
        SectionKey {
            key: key.into(),
            ordinal,
        }
    }

    pub fn abstract_key() -> Self {
        Self::new(ABSTRACT, 0)
    }
}

/// `"notes"` for the first section of a name, `"notes#1"` for the second.
impl fmt::Display for SectionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ordinal == 0 {
            f.write_str(&self.key)
        } else {
            write!(f, "{}#{}", self.key, self.ordinal)
        }
    }
}

pub const ABSTRACT: &str = "abstract";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub text: String,
    pub links: Vec<WikiLink>,
    pub token_count: usize,
}

impl Sentence {
    pub fn new(text: impl Into<String>) -> Self {
        let text = text.into();
        Sentence {
            links: extract_links(&text),
            token_count: count_words(&text),
            text,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub key: SectionKey,
    /// 0 for the abstract, heading level (2..=6) otherwise.
    pub level: u8,
    /// Section text with the heading line removed.
    pub body: String,
    pub sentences: Vec<Sentence>,
}

const NAMESPACES: &[&str] = &["file", "image", "media", "category"];

const ABBREVIATIONS: &[&str] = &[
    "e.g.", "i.e.", "dr.", "mr.", "mrs.", "ms.", "prof.", "st.", "jr.", "sr.", "u.s.", "u.k.",
    "vs.", "no.", "fig.", "cf.", "approx.", "ca.", "inc.", "ltd.", "co.", "mt.", "gen.", "col.",
    "lt.", "sgt.", "vol.", "pp.", "ed.", "al.", "jan.", "feb.", "aug.", "sept.", "oct.", "nov.",
    "dec.",
];

/// Link-target canonicalization: fragment-free targets are compared with
/// underscores as spaces, whitespace collapsed and first letter uppercased.
pub fn canonicalize_target(target: &str) -> String {
    let spaced = target.replace('_', " ");
    let collapsed = spaced.split_whitespace().collect::<Vec<_>>().join(" ");
    let mut chars = collapsed.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Outermost balanced `open ... close` spans, ignoring anything inside `skip`.
fn balanced_spans(text: &str, open: &str, close: &str, skip: &[Range<usize>]) -> Vec<Range<usize>> {
    let bytes = text.as_bytes();
    let (ob, cb) = (open.as_bytes(), close.as_bytes());
    let mut spans = Vec::new();
    let mut from = 0;
    'outer: while from < bytes.len() {
        let mut depth = 0usize;
        let mut start = None;
        let mut i = from;
        while i < bytes.len() {
            if let Some(r) = skip.iter().find(|r| r.contains(&i)) {
                i = r.end;
                continue;
            }
            if bytes[i..].starts_with(ob) {
                if depth == 0 {
                    start = Some(i);
                }
                depth += 1;
                i += ob.len();
            } else if depth > 0 && bytes[i..].starts_with(cb) {
                depth -= 1;
                i += cb.len();
                if depth == 0 {
                    spans.push(start.take().expect("open recorded")..i);
                }
            } else {
                i += 1;
            }
        }
        match start {
            // Unclosed outermost opener: drop it and rescan after it.
            Some(s) if depth > 0 => {
                log::debug!("unbalanced {open:?} at byte {s}");
                from = s + ob.len();
                continue 'outer;
            }
            _ => break,
        }
    }
    spans
}

/// Byte ranges of `{{...}}` templates (outermost only).
pub fn template_spans(text: &str) -> Vec<Range<usize>> {
    balanced_spans(text, "{{", "}}", &[])
}

/// Byte ranges of `[[...]]` markup outside templates (outermost only).
fn link_spans(text: &str, templates: &[Range<usize>]) -> Vec<Range<usize>> {
    balanced_spans(text, "[[", "]]", templates)
}

/// Index of the first `|` in `inner` that is not nested in brackets or braces.
fn top_level_pipe(inner: &str) -> Option<usize> {
    let b = inner.as_bytes();
    let mut depth = 0i32;
    let mut i = 0;
    while i < b.len() {
        if b[i..].starts_with(b"[[") || b[i..].starts_with(b"{{") {
            depth += 1;
            i += 2;
        } else if b[i..].starts_with(b"]]") || b[i..].starts_with(b"}}") {
            depth -= 1;
            i += 2;
        } else {
            if b[i] == b'|' && depth == 0 {
                return Some(i);
            }
            i += 1;
        }
    }
    None
}

fn is_language_prefix(prefix: &str) -> bool {
    if prefix == "simple" {
        return true;
    }
    let mut parts = prefix.split('-');
    let head = parts.next().unwrap_or("");
    (2..=3).contains(&head.len())
        && head.bytes().all(|c| c.is_ascii_lowercase())
        && parts.all(|p| !p.is_empty() && p.bytes().all(|c| c.is_ascii_lowercase()))
}

/// Parses one `[[...]]` markup into a link, or `None` for excluded or
/// malformed constructs.
fn parse_link(markup: &str, span: Range<usize>) -> Option<WikiLink> {
    let inner = &markup[2..markup.len() - 2];
    let (target_raw, display) = match top_level_pipe(inner) {
        Some(p) => (&inner[..p], Some(&inner[p + 1..])),
        None => (inner, None),
    };
    if target_raw.contains(['[', ']', '{', '}', '<', '>', '\n']) || target_raw.contains("://") {
        return None;
    }
    let target = target_raw.trim().trim_start_matches(':').trim_start();
    if let Some((prefix, _)) = target.split_once(':') {
        let prefix = prefix.trim();
        if NAMESPACES.contains(&prefix.to_lowercase().as_str()) || is_language_prefix(prefix) {
            return None;
        }
    }
    let without_fragment = target.split('#').next().unwrap_or("");
    let canonical_target = canonicalize_target(without_fragment);
    if canonical_target.is_empty() {
        return None;
    }
    let display_text = match display {
        Some(d) if !d.trim().is_empty() => d.trim().to_string(),
        _ => target.trim().to_string(),
    };
    Some(WikiLink {
        canonical_target,
        display_text,
        raw_span: span,
    })
}

/// What a single `[[...]]` construct denotes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Markup {
    Link(WikiLink),
    /// `File:`/`Image:`/`Media:` embed.
    Media {
        name: String,
    },
    /// Category, interlanguage or malformed construct; renders as nothing.
    Hidden,
}

/// Byte ranges of top-level `[[...]]` constructs outside templates.
pub fn link_markup_spans(text: &str) -> Vec<Range<usize>> {
    let templates = template_spans(text);
    link_spans(text, &templates)
}

pub fn classify_markup(markup: &str) -> Markup {
    if let Some(link) = parse_link(markup, 0..markup.len()) {
        return Markup::Link(link);
    }
    let inner = &markup[2..markup.len().saturating_sub(2).max(2)];
    let target = inner.split('|').next().unwrap_or("").trim();
    if let Some((prefix, name)) = target.split_once(':') {
        if matches!(
            prefix.trim().to_lowercase().as_str(),
            "file" | "image" | "media"
        ) {
            return Markup::Media {
                name: name.trim().to_string(),
            };
        }
    }
    Markup::Hidden
}

/// Extracts the wiki links of one sentence (or any text).
pub fn extract_links(text: &str) -> Vec<WikiLink> {
    if !text.contains("[[") {
        return Vec::new();
    }
    let templates = template_spans(text);
    link_spans(text, &templates)
        .into_iter()
        .filter_map(|span| parse_link(&text[span.clone()], span))
        .collect()
}

/// Number of alphanumeric word runs.
pub fn count_words(text: &str) -> usize {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .count()
}

/// Heading level and inner text when `line` is a `== Heading ==` line.
fn parse_heading(line: &str) -> Option<(u8, &str)> {
    let line = line.trim_end();
    let lead = line.bytes().take_while(|&b| b == b'=').count();
    let trail = line.bytes().rev().take_while(|&b| b == b'=').count();
    let level = lead.min(trail).min(6);
    if level < 2 || line.len() <= 2 * level {
        return None;
    }
    let inner = &line[level..line.len() - level];
    if inner.trim().is_empty() {
        return None;
    }
    Some((level as u8, inner))
}

/// Heading text with markup removed, lowercased and whitespace-collapsed.
pub fn normalize_heading(raw: &str) -> String {
    let templates = template_spans(raw);
    let links = link_spans(raw, &templates);
    let mut plain = String::new();
    let mut i = 0;
    while i < raw.len() {
        if let Some(t) = templates.iter().find(|r| r.start == i) {
            i = t.end;
            continue;
        }
        if let Some(l) = links.iter().find(|r| r.start == i) {
            let inner = &raw[l.start + 2..l.end - 2];
            match top_level_pipe(inner) {
                Some(p) => plain.push_str(&inner[p + 1..]),
                None => plain.push_str(inner),
            }
            i = l.end;
            continue;
        }
        let ch = raw[i..].chars().next().expect("char boundary");
        plain.push(ch);
        i += ch.len_utf8();
    }
    let plain = strip_tags(&plain.replace("'''", "").replace("''", ""));
    plain
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

fn strip_tags(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(pos) = rest.find('<') {
        out.push_str(&rest[..pos]);
        match rest[pos..].find('>') {
            Some(end) => rest = &rest[pos + end + 1..],
            None => {
                out.push_str(&rest[pos..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}

/// Splits a revision into sections. Content before the first heading is the
/// `abstract` section, which is always present and first.
pub fn split_sections(wikitext: &str) -> Vec<Section> {
    let templates = template_spans(wikitext);
    let mut bounds: Vec<(usize, usize, u8, String)> = Vec::new(); // (line start, body start, level, key)
    let mut offset = 0;
    for line in wikitext.split_inclusive('\n') {
        let start = offset;
        offset += line.len();
        if templates.iter().any(|r| r.contains(&start)) {
            continue;
        }
        if let Some((level, inner)) = parse_heading(line.trim_end_matches(['\n', '\r'])) {
            bounds.push((start, offset, level, normalize_heading(inner)));
        }
    }

    let mut sections = Vec::with_capacity(bounds.len() + 1);
    let abstract_end = bounds.first().map_or(wikitext.len(), |b| b.0);
    sections.push(make_section(
        SectionKey::abstract_key(),
        0,
        &wikitext[..abstract_end],
    ));
    let mut counts: std::collections::HashMap<String, u32> = std::collections::HashMap::new();
    counts.insert(ABSTRACT.to_string(), 1);
    for (idx, (_, body_start, level, key)) in bounds.iter().enumerate() {
        let body_end = bounds.get(idx + 1).map_or(wikitext.len(), |b| b.0);
        let ordinal = counts.entry(key.clone()).or_insert(0);
        let section_key = SectionKey::new(key.clone(), *ordinal);
        *ordinal += 1;
        sections.push(make_section(
            section_key,
            *level,
            &wikitext[*body_start..body_end],
        ));
    }
    sections
}

fn make_section(key: SectionKey, level: u8, body: &str) -> Section {
    Section {
        key,
        level,
        sentences: split_sentences(body),
        body: body.to_string(),
    }
}

fn starts_block(line: &str) -> bool {
    let l = line.trim_start_matches([' ', '\t']);
    l.starts_with(['*', '#', '|']) || l.starts_with("{|") || l.starts_with("{{")
}

fn is_abbreviation(before: &str) -> bool {
    let word = before
        .rsplit(|c: char| c.is_whitespace())
        .next()
        .unwrap_or("")
        .trim_start_matches(['(', '[', '"', '\'']);
    if word.is_empty() {
        return false;
    }
    let candidate = format!("{}.", word.to_lowercase());
    if ABBREVIATIONS.contains(&candidate.as_str()) {
        return true;
    }
    // Single-letter initials such as "J. Smith".
    let mut chars = word.chars();
    matches!((chars.next(), chars.next()), (Some(c), None) if c.is_uppercase())
}

/// Splits a section body into sentences.
///
/// Boundaries: `.`, `!`, `?` or `;` followed by whitespace and then an
/// uppercase letter, a digit or `[[` (abbreviations and initials protected);
/// a newline before or after a line starting with `*`, `#`, `|`, `{|` or
/// `{{`; and blank lines. Templates and link markup are never split.
pub fn split_sentences(body: &str) -> Vec<Sentence> {
    let templates = template_spans(body);
    let links = link_spans(body, &templates);
    let opaque = |i: usize| {
        templates
            .iter()
            .chain(links.iter())
            .find(|r| r.contains(&i))
            .cloned()
    };

    let bytes = body.as_bytes();
    let mut cuts = vec![0usize];
    let mut line_start = 0usize;
    let mut i = 0usize;
    while i < bytes.len() {
        if let Some(r) = opaque(i) {
            i = r.end;
            continue;
        }
        match bytes[i] {
            b'\n' => {
                let next_start = i + 1;
                let next_line_end = body[next_start..]
                    .find('\n')
                    .map_or(body.len(), |p| next_start + p);
                let cur = &body[line_start..i];
                let next = &body[next_start..next_line_end];
                if starts_block(cur) || starts_block(next) || next.trim().is_empty() {
                    cuts.push(next_start);
                }
                line_start = next_start;
                i += 1;
            }
            b'.' | b'!' | b'?' | b';' => {
                let after = i + 1;
                let ws = body[after..]
                    .find(|c: char| !c.is_whitespace())
                    .map_or(body.len() - after, |p| p);
                let next_at = after + ws;
                let boundary = ws > 0
                    && next_at < body.len()
                    && (body[next_at..].starts_with("[[")
                        || body[next_at..]
                            .chars()
                            .next()
                            .is_some_and(|c| c.is_uppercase() || c.is_ascii_digit()));
                if boundary
                    && !(bytes[i] == b'.'
                        && is_abbreviation(&body[line_start.max(cuts[cuts.len() - 1])..i]))
                {
                    cuts.push(after);
                }
                i += 1;
            }
            _ => i += 1,
        }
    }
    cuts.push(body.len());
    cuts.dedup();

    cuts.windows(2)
        .map(|w| body[w[0]..w[1]].trim())
        .filter(|s| !s.is_empty())
        .map(Sentence::new)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const LIST_LINK: &str =
        "List of scientists opposing the mainstream scientific assessment of global warming";

    fn texts(v: &[Sentence]) -> Vec<&str> {
        v.iter().map(|s| s.text.as_str()).collect()
    }

    #[test]
    fn no_headings_is_one_abstract() {
        let s = split_sections("Just text. More text.");
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].key, SectionKey::abstract_key());
        assert_eq!(s[0].sentences.len(), 2);
        let empty = split_sections("");
        assert_eq!(empty.len(), 1);
        assert!(empty[0].sentences.is_empty());
    }

    #[test]
    fn heading_keys() {
        let s = split_sections(
            "Lead [[A]].\n== Debate and skepticism ==\nBody.\n=== ''Sub'' [[x|Part]] ===\nMore.\n",
        );
        let keys: Vec<_> = s.iter().map(|s| (s.key.key.as_str(), s.level)).collect();
        assert_eq!(
            keys,
            vec![
                ("abstract", 0),
                ("debate and skepticism", 2),
                ("sub part", 3)
            ]
        );
        assert_eq!(s[1].body, "Body.\n");
    }

    #[test]
    fn duplicate_headings_get_ordinals() {
        let s = split_sections("x\n== Notes ==\na\n==Notes==\nb\n");
        assert_eq!(s[1].key, SectionKey::new("notes", 0));
        assert_eq!(s[2].key, SectionKey::new("notes", 1));
        assert_eq!(s[2].key.to_string(), "notes#1");
    }

    #[test]
    fn heading_like_lines_in_templates_are_ignored() {
        let s = split_sections("{{Box\n== not a heading ==\n}}\nText.");
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn two_simple_sentences() {
        assert_eq!(
            texts(&split_sentences("A cat. A dog.")),
            vec!["A cat.", "A dog."]
        );
    }

    #[test]
    fn decimal_and_link_start() {
        let s = split_sentences("It rose 0.5 °C. [[IPCC]] concurred.");
        assert_eq!(texts(&s), vec!["It rose 0.5 °C.", "[[IPCC]] concurred."]);
        assert!(s[0].links.is_empty());
        assert_eq!(s[1].links[0].canonical_target, "IPCC");
    }

    #[test]
    fn list_items() {
        assert_eq!(
            texts(&split_sentences("* item one\n* item two")),
            vec!["* item one", "* item two"]
        );
        assert_eq!(
            texts(&split_sentences("Intro line\n* item\nAfter list.")),
            vec!["Intro line", "* item", "After list."]
        );
    }

    #[test]
    fn abbreviations_and_initials() {
        let s = split_sentences("Gases, e.g. Methane, matter. Dr. Smith and J. Doe agree. Yes.");
        assert_eq!(
            texts(&s),
            vec![
                "Gases, e.g. Methane, matter.",
                "Dr. Smith and J. Doe agree.",
                "Yes."
            ]
        );
    }

    #[test]
    fn templates_are_opaque() {
        let s = split_sentences("Claim.{{cite|a. B. [[Hidden]]}} Next [[Shown]]; Then 3 more.");
        assert_eq!(
            texts(&s),
            vec![
                "Claim.{{cite|a. B. [[Hidden]]}} Next [[Shown]];",
                "Then 3 more."
            ]
        );
        let targets: Vec<_> = s[0]
            .links
            .iter()
            .map(|l| l.canonical_target.as_str())
            .collect();
        assert_eq!(targets, vec!["Shown"]);
    }

    #[test]
    fn paragraphs_break() {
        assert_eq!(
            texts(&split_sentences("first para without stop\n\nsecond para")),
            vec!["first para without stop", "second para"]
        );
        assert_eq!(
            texts(&split_sentences("wrapped\nline continues")),
            vec!["wrapped\nline continues"]
        );
    }

    #[test]
    fn piped_link_with_display_text() {
        let text = format!("[[{LIST_LINK}|climate individual scientists]]");
        let links = extract_links(&text);
        assert_eq!(links.len(), 1);
        assert_eq!(links[0].canonical_target, LIST_LINK);
        assert_eq!(links[0].display_text, "climate individual scientists");
        assert_eq!(links[0].raw_span, 0..text.len());
    }

    #[test]
    fn plain_link_is_uppercased() {
        let l = extract_links("general [[scientific consensus]] ,");
        assert_eq!(l[0].canonical_target, "Scientific consensus");
        assert_eq!(l[0].display_text, "scientific consensus");
        assert_eq!(l[0].raw_span, 8..32);
    }

    #[test]
    fn fragment_and_underscores() {
        let l = extract_links("[[foo_bar#History|x]]");
        assert_eq!(l[0].canonical_target, "Foo bar");
        assert_eq!(l[0].display_text, "x");
    }

    #[test]
    fn namespaces_excluded() {
        let text = "[[File:A.jpg|thumb|caption [[Inner]]]] [[Category:Climate]] \
                    [[de:Globale Erwärmung]] [[zh-min-nan:X]] [[:Category:Y]] [[Talk:Z]] [[#Top|up]]";
        let l: Vec<_> = extract_links(text)
            .into_iter()
            .map(|l| l.canonical_target)
            .collect();
        assert_eq!(l, vec!["Talk:Z"]);
    }

    #[test]
    fn unbalanced_brackets_are_not_fatal() {
        let l = extract_links("broken [[foo and [[bar]] ok");
        assert_eq!(l.len(), 1);
        assert_eq!(l[0].canonical_target, "Bar");
        assert!(extract_links("[[never closed").is_empty());
        assert!(extract_links("no links here ]] [").is_empty());
    }

    #[test]
    fn canonicalization_variants() {
        for t in ["foo_bar", "Foo bar", "foo bar", "  foo   bar ", "Foo_bar"] {
            assert_eq!(canonicalize_target(t), "Foo bar");
        }
        assert_eq!(canonicalize_target("ßeta"), "SSeta");
    }
}
