//! Streaming reader for the wiki XML export format.
//!
//! Only the requested page's revisions are materialized, one at a time, so
//! memory use is bounded by the largest single revision.

use std::io::BufRead;

use chrono::{DateTime, Utc};
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{normalize_title, ArticleHistory, HistorySource, RawRevision};

#[derive(Debug, thiserror::Error)]
pub enum DumpError {
    #[error("malformed XML: {0}")]
    Malformed(String),
    #[error("XML error at byte {position}: {source}")]
    Xml {
        position: u64,
        source: quick_xml::Error,
    },
    #[error("page {0:?} not found in dump")]
    PageNotInDump(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tag {
    MediaWiki,
    Page,
    Title,
    Revision,
    Id,
    ParentId,
    Timestamp,
    Contributor,
    Username,
    Ip,
    Comment,
    Text,
    Other,
}

impl Tag {
    fn from_name(name: &[u8]) -> Tag {
        match name {
            b"mediawiki" => Tag::MediaWiki,
            b"page" => Tag::Page,
            b"title" => Tag::Title,
            b"revision" => Tag::Revision,
            b"id" => Tag::Id,
            b"parentid" => Tag::ParentId,
            b"timestamp" => Tag::Timestamp,
            b"contributor" => Tag::Contributor,
            b"username" => Tag::Username,
            b"ip" => Tag::Ip,
            b"comment" => Tag::Comment,
            b"text" => Tag::Text,
            _ => Tag::Other,
        }
    }
}

#[derive(Debug, Default)]
struct RevisionBuilder {
    rev_id: Option<u64>,
    parent_id: u64,
    timestamp: Option<DateTime<Utc>>,
    user: String,
    comment: String,
    text: String,
    text_deleted: bool,
}

impl RevisionBuilder {
    fn finish(self) -> Result<RawRevision, DumpError> {
        let rev_id = self
            .rev_id
            .ok_or_else(|| DumpError::Malformed("revision without <id>".into()))?;
        let timestamp = self.timestamp.ok_or_else(|| {
            DumpError::Malformed(format!("revision {rev_id} without <timestamp>"))
        })?;
        Ok(if self.text_deleted {
            RawRevision::suppressed(rev_id, self.parent_id, timestamp, self.user, self.comment)
        } else {
            RawRevision::new(
                rev_id,
                self.parent_id,
                timestamp,
                self.user,
                self.comment,
                self.text,
            )
        })
    }
}

/// Iterator over the revisions of one page in an XML export.
pub struct DumpRevisions<R: BufRead> {
    reader: Reader<R>,
    buf: Vec<u8>,
    wanted: String,
    stack: Vec<Tag>,
    capture: Option<Tag>,
    text: String,
    page_title: Option<String>,
    page_matches: bool,
    current: Option<RevisionBuilder>,
    saw_root: bool,
    found_page: bool,
    done: bool,
    peak_buffer: usize,
}

impl<R: BufRead> DumpRevisions<R> {
    pub fn new(input: R, article_title: &str) -> Self {
        DumpRevisions {
            reader: Reader::from_reader(input),
            buf: Vec::new(),
            wanted: normalize_title(article_title),
            stack: Vec::new(),
            capture: None,
            text: String::new(),
            page_title: None,
            page_matches: false,
            current: None,
            saw_root: false,
            found_page: false,
            done: false,
            peak_buffer: 0,
        }
    }

    /// The page title as written in the dump, once the page has been found.
    pub fn page_title(&self) -> Option<&str> {
        if self.found_page {
            self.page_title.as_deref()
        } else {
            None
        }
    }

    pub fn found_page(&self) -> bool {
        self.found_page
    }

    /// Largest raw event buffer seen so far, in bytes.
    pub fn peak_buffer_bytes(&self) -> usize {
        self.peak_buffer
    }

    fn xml_err(&self, source: quick_xml::Error) -> DumpError {
        DumpError::Xml {
            position: self.reader.buffer_position(),
            source,
        }
    }

    fn parent(&self) -> Option<Tag> {
        self.stack.last().copied()
    }

    fn in_revision(&self) -> bool {
        self.stack.contains(&Tag::Revision)
    }

    fn open(&mut self, e: &BytesStart<'_>, empty: bool) -> Result<(), DumpError> {
        let tag = Tag::from_name(e.local_name().as_ref());
        let parent = self.parent();
        if self.stack.is_empty() {
            if tag != Tag::MediaWiki {
                return Err(DumpError::Malformed(format!(
                    "unexpected root element <{}>",
                    String::from_utf8_lossy(e.name().as_ref())
                )));
            }
            self.saw_root = true;
        }
        let deleted = e
            .try_get_attribute("deleted")
            .map_err(|err| self.xml_err(err.into()))?
            .is_some();
        match tag {
            Tag::Page if parent == Some(Tag::MediaWiki) => {
                self.page_title = None;
                self.page_matches = false;
            }
            Tag::Title if parent == Some(Tag::Page) => self.begin_capture(tag),
            Tag::Revision if parent == Some(Tag::Page) && self.page_matches => {
                self.current = Some(RevisionBuilder::default());
            }
            Tag::Id | Tag::ParentId | Tag::Timestamp | Tag::Comment | Tag::Text
                if parent == Some(Tag::Revision) && self.current.is_some() =>
            {
                if deleted {
                    if let Some(rev) = self.current.as_mut() {
                        if tag == Tag::Text {
                            rev.text_deleted = true;
                        }
                    }
                } else {
                    self.begin_capture(tag);
                }
            }
            Tag::Username | Tag::Ip
                if parent == Some(Tag::Contributor)
                    && self.in_revision()
                    && self.current.is_some() =>
            {
                self.begin_capture(tag)
            }
            _ => {}
        }
        if empty {
            self.close(tag)?;
        } else {
            self.stack.push(tag);
        }
        Ok(())
    }

    fn begin_capture(&mut self, tag: Tag) {
        self.capture = Some(tag);
        self.text.clear();
    }

    /// Handles the end of `tag`; returns a finished revision if one closed.
    fn close(&mut self, tag: Tag) -> Result<Option<RawRevision>, DumpError> {
        if self.capture == Some(tag) {
            self.capture = None;
            let value = std::mem::take(&mut self.text);
            match tag {
                Tag::Title => {
                    self.page_matches = normalize_title(&value) == self.wanted;
                    if self.page_matches {
                        self.found_page = true;
                    }
                    self.page_title = Some(value);
                }
                _ => {
                    if let Some(rev) = self.current.as_mut() {
                        match tag {
                            Tag::Id => rev.rev_id = Some(parse_u64(&value, "id")?),
                            Tag::ParentId => rev.parent_id = parse_u64(&value, "parentid")?,
                            Tag::Timestamp => {
                                rev.timestamp = Some(
                                    DateTime::parse_from_rfc3339(value.trim())
                                        .map_err(|e| {
                                            DumpError::Malformed(format!(
                                                "bad timestamp {value:?}: {e}"
                                            ))
                                        })?
                                        .with_timezone(&Utc),
                                )
                            }
                            Tag::Username | Tag::Ip => rev.user = value,
                            Tag::Comment => rev.comment = value,
                            Tag::Text => rev.text = value,
                            _ => {}
                        }
                    }
                }
            }
        }
        match tag {
            Tag::Revision
                if self.current.is_some() && self.parent_after_close() == Some(Tag::Page) =>
            {
                let rev = self.current.take().expect("checked");
                return rev.finish().map(Some);
            }
            Tag::Page if self.page_matches => {
                // Titles are unique within an export.
                self.done = true;
            }
            _ => {}
        }
        Ok(None)
    }

    /// Parent of the element being closed (the stack top has already been popped).
    fn parent_after_close(&self) -> Option<Tag> {
        self.parent()
    }

    fn step(&mut self) -> Result<Option<RawRevision>, DumpError> {
        loop {
            if self.done {
                return Ok(None);
            }
            self.buf.clear();
            let event = match self.reader.read_event_into(&mut self.buf) {
                Ok(ev) => ev.into_owned(),
                Err(e) => return Err(self.xml_err(e)),
            };
            self.peak_buffer = self.peak_buffer.max(self.buf.capacity());
            match event {
                Event::Start(e) => self.open(&e, false)?,
                Event::Empty(e) => self.open(&e, true)?,
                Event::End(e) => {
                    let tag = Tag::from_name(e.local_name().as_ref());
                    match self.stack.pop() {
                        Some(open) if open == tag => {}
                        _ => {
                            return Err(DumpError::Malformed(format!(
                                "unexpected </{}>",
                                String::from_utf8_lossy(e.name().as_ref())
                            )))
                        }
                    }
                    if let Some(rev) = self.close(tag)? {
                        return Ok(Some(rev));
                    }
                }
                Event::Text(t) => {
                    if self.capture.is_some() {
                        let s = t.unescape().map_err(|e| self.xml_err(e))?;
                        self.text.push_str(&s);
                    }
                }
                Event::CData(c) => {
                    if self.capture.is_some() {
                        self.text
                            .push_str(&String::from_utf8_lossy(&c.into_inner()));
                    }
                }
                Event::Eof => {
                    if !self.saw_root {
                        return Err(DumpError::Malformed("no <mediawiki> root element".into()));
                    }
                    if !self.stack.is_empty() {
                        return Err(DumpError::Malformed("unexpected end of input".into()));
                    }
                    self.done = true;
                    return Ok(None);
                }
                _ => {}
            }
        }
    }
}

impl<R: BufRead> Iterator for DumpRevisions<R> {
    type Item = Result<RawRevision, DumpError>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.step() {
            Ok(Some(rev)) => Some(Ok(rev)),
            Ok(None) => None,
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

fn parse_u64(value: &str, what: &str) -> Result<u64, DumpError> {
    value
        .trim()
        .parse()
        .map_err(|_| DumpError::Malformed(format!("bad <{what}> value {value:?}")))
}

/// Reads every revision of `article_title` from an XML export.
pub fn parse_dump<R: BufRead>(input: R, article_title: &str) -> Result<ArticleHistory, DumpError> {
    let mut revisions_iter = DumpRevisions::new(input, article_title);
    let mut revisions = Vec::new();
    for rev in revisions_iter.by_ref() {
        revisions.push(rev?);
    }
    if !revisions_iter.found_page() {
        return Err(DumpError::PageNotInDump(article_title.to_string()));
    }
    let last_ts = revisions.iter().map(|r| r.timestamp).max();
    let mut history = ArticleHistory {
        article_title: revisions_iter
            .page_title()
            .unwrap_or(article_title)
            .to_string(),
        language_code: String::new(),
        revisions,
        fetched_at: last_ts.unwrap_or(DateTime::<Utc>::UNIX_EPOCH),
        source: HistorySource::Dump,
        complete: true,
    };
    history.sort_revisions();
    Ok(history)
}

/// Writes a history as a minimal XML export that [`parse_dump`] reads back.
pub fn write_dump<W: std::io::Write>(out: &mut W, history: &ArticleHistory) -> std::io::Result<()> {
    use quick_xml::escape::escape;
    writeln!(
        out,
        r#"<mediawiki xmlns="http://www.mediawiki.org/xml/export-0.11/" version="0.11" xml:lang="{}">"#,
        escape(&history.language_code)
    )?;
    writeln!(out, "  <page>")?;
    writeln!(out, "    <title>{}</title>", escape(&history.article_title))?;
    writeln!(out, "    <ns>0</ns>")?;
    for rev in &history.revisions {
        writeln!(out, "    <revision>")?;
        writeln!(out, "      <id>{}</id>", rev.rev_id)?;
        if rev.parent_id != 0 {
            writeln!(out, "      <parentid>{}</parentid>", rev.parent_id)?;
        }
        writeln!(
            out,
            "      <timestamp>{}</timestamp>",
            rev.timestamp.format("%Y-%m-%dT%H:%M:%SZ")
        )?;
        if rev.is_ip_user {
            writeln!(
                out,
                "      <contributor><ip>{}</ip></contributor>",
                escape(&rev.user)
            )?;
        } else {
            writeln!(
                out,
                "      <contributor><username>{}</username></contributor>",
                escape(&rev.user)
            )?;
        }
        if !rev.comment.is_empty() {
            writeln!(out, "      <comment>{}</comment>", escape(&rev.comment))?;
        }
        if rev.suppressed {
            writeln!(out, r#"      <text deleted="deleted" />"#)?;
        } else {
            writeln!(
                out,
                r#"      <text xml:space="preserve" bytes="{}">{}</text>"#,
                rev.wikitext.len(),
                escape(&rev.wikitext)
            )?;
        }
        writeln!(out, "    </revision>")?;
    }
    writeln!(out, "  </page>")?;
    writeln!(out, "</mediawiki>")
}
