//! Standalone annotated-article HTML export.
//!
//! The latest revision is rendered minimally (headings, paragraphs, lists,
//! links, bold/italic); templates, references, comments and tables are
//! dropped. Each occurrence of a ranked link is wrapped in
//! `<mark class="cl bin-N" data-link=".." data-bin="N" id="occ-K">`.
//! Images become grayscale placeholders. The document has no external
//! resources and no scripts.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::report::ArticleReport;
use crate::wikitext::{self, Markup};

/// Bin colors, index 0 = bin 1 (least controversial, pale blue) through
/// index 4 = bin 5 (most controversial, red).
pub const BIN_COLORS: [&str; 5] = ["#dbe9f6", "#91bfdb", "#fee090", "#fc8d59", "#d73027"];

pub fn bin_color(bin: u8) -> &'static str {
    BIN_COLORS[(bin.clamp(1, 5) - 1) as usize]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedArticle {
    /// Complete HTML document.
    pub html: String,
    /// Rendered article body only.
    pub body: String,
    /// link → occurrence element ids, in document order.
    pub link_index: BTreeMap<String, Vec<String>>,
}

pub fn escape_html(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Removes `<!-- -->` comments and `<ref>` elements.
fn strip_noise(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    loop {
        let comment = rest.find("<!--");
        let reference = rest.find("<ref");
        let next = match (comment, reference) {
            (Some(c), Some(r)) => Some(c.min(r)),
            (c, r) => c.or(r),
        };
        let Some(at) = next else {
            out.push_str(rest);
            break;
        };
        out.push_str(&rest[..at]);
        let tail = &rest[at..];
        let skip = if tail.starts_with("<!--") {
            tail.find("-->").map_or(tail.len(), |e| e + 3)
        } else {
            let open_end = tail.find('>').map_or(tail.len(), |e| e + 1);
            if tail[..open_end].ends_with("/>") {
                open_end
            } else {
                tail.find("</ref>").map_or(open_end, |e| e + "</ref>".len())
            }
        };
        rest = &tail[skip..];
    }
    out
}

fn remove_templates(text: &str) -> String {
    let spans = wikitext::template_spans(text);
    let mut out = String::with_capacity(text.len());
    let mut at = 0;
    for s in spans {
        out.push_str(&text[at..s.start]);
        at = s.end;
    }
    out.push_str(&text[at..]);
    out
}

struct Renderer<'a> {
    bins: &'a HashMap<String, u8>,
    link_index: BTreeMap<String, Vec<String>>,
    occurrences: usize,
}

impl Renderer<'_> {
    fn emphasis(text: &str) -> String {
        let mut out = String::new();
        let (mut bold, mut italic) = (false, false);
        let mut rest = text;
        while !rest.is_empty() {
            if let Some(r) = rest.strip_prefix("'''") {
                out.push_str(if bold { "</b>" } else { "<b>" });
                bold = !bold;
                rest = r;
            } else if let Some(r) = rest.strip_prefix("''") {
                out.push_str(if italic { "</i>" } else { "<i>" });
                italic = !italic;
                rest = r;
            } else {
                let c = rest.chars().next().expect("non-empty");
                out.push(c);
                rest = &rest[c.len_utf8()..];
            }
        }
        if italic {
            out.push_str("</i>");
        }
        if bold {
            out.push_str("</b>");
        }
        out
    }

    fn inline(&mut self, text: &str) -> String {
        let mut out = String::new();
        let mut at = 0;
        for span in wikitext::link_markup_spans(text) {
            out.push_str(&Self::emphasis(&escape_html(&text[at..span.start])));
            at = span.end;
            match wikitext::classify_markup(&text[span]) {
                Markup::Link(link) => {
                    let shown = escape_html(&link.display_text);
                    match self.bins.get(&link.canonical_target) {
                        Some(bin) => {
                            self.occurrences += 1;
                            let id = format!("occ-{}", self.occurrences);
                            let _ = write!(
                                out,
                                r#"<mark class="cl bin-{bin}" data-link="{}" data-bin="{bin}" id="{id}">{shown}</mark>"#,
                                escape_html(&link.canonical_target)
                            );
                            self.link_index
                                .entry(link.canonical_target)
                                .or_default()
                                .push(id);
                        }
                        None => out.push_str(&shown),
                    }
                }
                Markup::Media { name } => {
                    let _ = write!(
                        out,
                        r#"<span class="image grayscale" data-image="{0}">[image: {0}]</span>"#,
                        escape_html(&name)
                    );
                }
                Markup::Hidden => {}
            }
        }
        out.push_str(&Self::emphasis(&escape_html(&text[at..])));
        out
    }

    fn body(&mut self, wikitext: &str) -> String {
        let cleaned = remove_templates(&strip_noise(wikitext));
        let mut html = String::new();
        let mut paragraph: Vec<String> = Vec::new();
        let mut list: Option<&'static str> = None;
        let mut in_table = false;

        let flush_paragraph = |html: &mut String, paragraph: &mut Vec<String>| {
            if !paragraph.is_empty() {
                let _ = writeln!(html, "<p>{}</p>", paragraph.join(" "));
                paragraph.clear();
            }
        };
        let close_list = |html: &mut String, list: &mut Option<&'static str>| {
            if let Some(tag) = list.take() {
                let _ = writeln!(html, "</{tag}>");
            }
        };

        for raw_line in cleaned.lines() {
            let line = raw_line.trim_end();
            if in_table {
                if line.trim_start().starts_with("|}") {
                    in_table = false;
                }
                continue;
            }
            if line.trim_start().starts_with("{|") {
                flush_paragraph(&mut html, &mut paragraph);
                close_list(&mut html, &mut list);
                in_table = true;
                continue;
            }
            if line.trim().is_empty() {
                flush_paragraph(&mut html, &mut paragraph);
                close_list(&mut html, &mut list);
                continue;
            }
            if let Some(level) = heading_level(line) {
                flush_paragraph(&mut html, &mut paragraph);
                close_list(&mut html, &mut list);
                let inner = line.trim_matches('=').trim();
                let _ = writeln!(html, "<h{level}>{}</h{level}>", self.inline(inner));
                continue;
            }
            let marker = line.chars().next();
            if matches!(marker, Some('*') | Some('#')) {
                flush_paragraph(&mut html, &mut paragraph);
                let tag = if marker == Some('*') { "ul" } else { "ol" };
                if list != Some(tag) {
                    close_list(&mut html, &mut list);
                    let _ = writeln!(html, "<{tag}>");
                    list = Some(tag);
                }
                let item = line.trim_start_matches(['*', '#', ':', ';']).trim();
                let _ = writeln!(html, "<li>{}</li>", self.inline(item));
                continue;
            }
            close_list(&mut html, &mut list);
            let rendered = self.inline(line.trim());
            if !rendered.trim().is_empty() {
                paragraph.push(rendered);
            }
        }
        flush_paragraph(&mut html, &mut paragraph);
        close_list(&mut html, &mut list);
        html
    }
}

fn heading_level(line: &str) -> Option<usize> {
    let lead = line.bytes().take_while(|&b| b == b'=').count();
    let trail = line.bytes().rev().take_while(|&b| b == b'=').count();
    let level = lead.min(trail).min(6);
    (level >= 2 && line.len() > 2 * level).then_some(level)
}

/// Renders wikitext with the given link → bin assignment.
pub fn render_body(
    wikitext: &str,
    bins: &HashMap<String, u8>,
) -> (String, BTreeMap<String, Vec<String>>) {
    let mut r = Renderer {
        bins,
        link_index: BTreeMap::new(),
        occurrences: 0,
    };
    let body = r.body(wikitext);
    (body, r.link_index)
}

const STYLE: &str = "body{font-family:Georgia,serif;max-width:52em;margin:2em auto;color:#222;line-height:1.5}\
article{color:#555}\
mark.cl{color:#111;padding:0 .15em;border-radius:2px}\
.image{display:inline-block;border:1px dashed #999;padding:.2em .5em;filter:grayscale(100%);color:#777}\
table{border-collapse:collapse}td,th{border:1px solid #ccc;padding:.2em .6em;text-align:left}\
.legend span{display:inline-block;padding:.1em .6em;margin-right:.3em}";

/// Builds the standalone annotated document for a report.
pub fn render_article(report: &ArticleReport) -> AnnotatedArticle {
    let bins: HashMap<String, u8> = report
        .links
        .iter()
        .map(|l| (l.link.clone(), l.bin))
        .collect();
    let wikitext = report
        .latest_revision
        .as_ref()
        .map(|r| r.wikitext.as_str())
        .unwrap_or("");
    let (body, link_index) = render_body(wikitext, &bins);

    let mut html = String::new();
    let title = escape_html(&report.article_title);
    let _ = write!(
        html,
        "<!DOCTYPE html>\n<html lang=\"{}\">\n<head>\n<meta charset=\"utf-8\">\n<title>{title}: controversial links</title>\n<style>{STYLE}",
        escape_html(&report.language_code)
    );
    for (i, color) in BIN_COLORS.iter().enumerate() {
        let _ = write!(html, ".bin-{}{{background:{color}}}", i + 1);
    }
    let _ = write!(html, "</style>\n</head>\n<body>\n<h1>{title}</h1>\n");
    html.push_str("<p class=\"legend\">");
    for bin in (1..=5u8).rev() {
        let label = match bin {
            5 => "most controversial",
            1 => "least controversial",
            _ => "",
        };
        let _ = write!(html, "<span class=\"bin-{bin}\">{bin} {label}</span>");
    }
    html.push_str("</p>\n");
    if report.links.is_empty() {
        html.push_str(
            "<p class=\"note\">No link in this article attracted disagreeing edits.</p>\n",
        );
    }
    let _ = write!(html, "<article>\n{body}</article>\n");
    if !report.links.is_empty() {
        html.push_str("<h2>Ranking</h2>\n<table>\n<tr><th>Rank</th><th>Link</th><th>Score</th><th>Edits</th><th>Users</th><th>Reverts</th></tr>\n");
        for l in &report.links {
            let _ = writeln!(
                html,
                "<tr><td>{}</td><td><span class=\"bin-{}\">{}</span></td><td>{:.6}</td><td>{}</td><td>{}</td><td>{}</td></tr>",
                l.rank,
                l.bin,
                escape_html(&l.link),
                l.score,
                l.n_edits,
                l.n_users,
                l.n_reverts_involved
            );
        }
        html.push_str("</table>\n");
    }
    html.push_str("</body>\n</html>\n");

    AnnotatedArticle {
        html,
        body,
        link_index,
    }
}
