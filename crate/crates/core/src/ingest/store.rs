//! Append-only per-article revision store.
//!
//! Each article lives in `<lang>__<title-slug>.revs`: a sequence of gzip
//! members, one per appended batch, each holding newline-delimited JSON
//! records. A batch starts with a `meta` record followed by `revision`
//! records. Loading concatenates all members and keeps the first record seen
//! for every `rev_id`. See `docs/formats.md` for the record schema.

use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use serde::{Deserialize, Serialize};

use super::{ArticleHistory, HistorySource, RawRevision};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("store I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("corrupt store record in {path} line {line}: {source}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        source: serde_json::Error,
    },
    #[error("no stored history for {0}")]
    Missing(PathBuf),
    #[error("store for {0} is locked by another writer")]
    Locked(PathBuf),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Record {
    Meta {
        article_title: String,
        language_code: String,
        fetched_at: DateTime<Utc>,
        source: HistorySource,
        complete: bool,
    },
    Revision(RawRevision),
}

/// Directory of `.revs` files.
#[derive(Debug, Clone)]
pub struct RevisionStore {
    dir: PathBuf,
}

/// Exclusive write access to one article's file; released on drop.
pub struct WriteLock {
    path: PathBuf,
}

impl Drop for WriteLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

/// File-name slug for a title: spaces become underscores, anything outside
/// `[A-Za-z0-9_.-]` is percent-encoded.
pub fn title_slug(title: &str) -> String {
    let mut out = String::new();
    for b in title.trim().replace(' ', "_").bytes() {
        if b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-' | b'.') {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

impl RevisionStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        RevisionStore { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, lang: &str, title: &str) -> PathBuf {
        self.dir
            .join(format!("{}__{}.revs", lang, title_slug(title)))
    }

    pub fn exists(&self, lang: &str, title: &str) -> bool {
        self.path_for(lang, title).exists()
    }

    fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
        move |source| StoreError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn lock(&self, lang: &str, title: &str) -> Result<WriteLock, StoreError> {
        std::fs::create_dir_all(&self.dir).map_err(Self::io_err(&self.dir))?;
        let mut path = self.path_for(lang, title);
        path.set_extension("revs.lock");
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(WriteLock { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(StoreError::Locked(path))
            }
            Err(e) => Err(StoreError::Io { path, source: e }),
        }
    }

    /// Appends one batch as a new gzip member.
    pub fn append(
        &self,
        meta: &ArticleHistory,
        revisions: &[RawRevision],
    ) -> Result<(), StoreError> {
        std::fs::create_dir_all(&self.dir).map_err(Self::io_err(&self.dir))?;
        let path = self.path_for(&meta.language_code, &meta.article_title);
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(Self::io_err(&path))?;
        let mut enc = GzEncoder::new(file, Compression::default());
        let header = Record::Meta {
            article_title: meta.article_title.clone(),
            language_code: meta.language_code.clone(),
            fetched_at: meta.fetched_at,
            source: meta.source,
            complete: meta.complete,
        };
        let mut write_record = |rec: &Record| -> std::io::Result<()> {
            serde_json::to_writer(&mut enc, rec)?;
            enc.write_all(b"\n")
        };
        write_record(&header).map_err(Self::io_err(&path))?;
        for rev in revisions {
            write_record(&Record::Revision(rev.clone())).map_err(Self::io_err(&path))?;
        }
        enc.finish()
            .and_then(|f| f.sync_all())
            .map_err(Self::io_err(&path))?;
        Ok(())
    }

    /// Replaces any stored history with `history`.
    pub fn save(&self, history: &ArticleHistory) -> Result<(), StoreError> {
        let path = self.path_for(&history.language_code, &history.article_title);
        if path.exists() {
            std::fs::remove_file(&path).map_err(Self::io_err(&path))?;
        }
        self.append(history, &history.revisions)
    }

    pub fn load(&self, lang: &str, title: &str) -> Result<ArticleHistory, StoreError> {
        let path = self.path_for(lang, title);
        if !path.exists() {
            return Err(StoreError::Missing(path));
        }
        let file = File::open(&path).map_err(Self::io_err(&path))?;
        let reader = BufReader::new(MultiGzDecoder::new(BufReader::new(file)));
        let mut seen = HashSet::new();
        let mut history = ArticleHistory {
            article_title: title.to_string(),
            language_code: lang.to_string(),
            revisions: Vec::new(),
            fetched_at: DateTime::<Utc>::UNIX_EPOCH,
            source: HistorySource::Api,
            complete: true,
        };
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(Self::io_err(&path))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: Record =
                serde_json::from_str(&line).map_err(|source| StoreError::Corrupt {
                    path: path.clone(),
                    line: idx + 1,
                    source,
                })?;
            match record {
                Record::Meta {
                    article_title,
                    language_code,
                    fetched_at,
                    source,
                    complete,
                } => {
                    history.article_title = article_title;
                    history.language_code = language_code;
                    history.fetched_at = fetched_at;
                    history.source = source;
                    history.complete = complete;
                }
                Record::Revision(rev) => {
                    if seen.insert(rev.rev_id) {
                        history.revisions.push(rev);
                    }
                }
            }
        }
        history.sort_revisions();
        Ok(history)
    }

    /// Highest stored rev_id, used as the resume checkpoint.
    pub fn last_rev_id(&self, lang: &str, title: &str) -> Result<Option<u64>, StoreError> {
        match self.load(lang, title) {
            Ok(h) => Ok(h.revisions.last().map(|r| r.rev_id)),
            Err(StoreError::Missing(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }
}
