//! Acquisition and persistence of an article's revision history.
//!
//! Histories come from three places: the live wiki API ([`api`]), an XML
//! history export ([`dump`]) or the synthetic generator in
//! [`crate::fixtures`]. All three produce the same [`ArticleHistory`].

pub mod api;
pub mod dump;
pub mod store;

use std::collections::HashSet;
use std::net::IpAddr;

use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use api::{fetch_history, ApiTransport, HistoryFetcher, TransportError};
pub use dump::{parse_dump, write_dump, DumpError, DumpRevisions};
pub use store::{RevisionStore, StoreError};

/// One stored revision of an article.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRevision {
    pub rev_id: u64,
    /// 0 for the first revision.
    pub parent_id: u64,
    pub timestamp: DateTime<Utc>,
    pub user: String,
    pub is_ip_user: bool,
    pub comment: String,
    pub wikitext: String,
    /// Hex SHA-256 of `wikitext`.
    pub text_hash: String,
    /// Text was deleted or suppressed on the wiki; `wikitext` is empty.
    #[serde(default)]
    pub suppressed: bool,
}

impl RawRevision {
    pub fn new(
        rev_id: u64,
        parent_id: u64,
        timestamp: DateTime<Utc>,
        user: impl Into<String>,
        comment: impl Into<String>,
        wikitext: impl Into<String>,
    ) -> Self {
        let user = user.into();
        let wikitext = wikitext.into();
        RawRevision {
            rev_id,
            parent_id,
            timestamp: timestamp.trunc_subsecs(0),
            is_ip_user: is_ip_literal(&user),
            user,
            comment: comment.into(),
            text_hash: text_hash(&wikitext),
            wikitext,
            suppressed: false,
        }
    }

    /// A revision whose text is hidden from public view.
    pub fn suppressed(
        rev_id: u64,
        parent_id: u64,
        timestamp: DateTime<Utc>,
        user: impl Into<String>,
        comment: impl Into<String>,
    ) -> Self {
        let mut rev = Self::new(rev_id, parent_id, timestamp, user, comment, "");
        rev.suppressed = true;
        rev
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistorySource {
    Api,
    Dump,
    Fixture,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleHistory {
    pub article_title: String,
    pub language_code: String,
    /// Oldest first.
    pub revisions: Vec<RawRevision>,
    pub fetched_at: DateTime<Utc>,
    pub source: HistorySource,
    /// False when retrieval stopped before the end of the history.
    #[serde(default = "default_true")]
    pub complete: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HistoryViolation {
    #[error("duplicate rev_id {0}")]
    DuplicateRevId(u64),
    #[error("rev {0} is older than its predecessor")]
    TimestampOrder(u64),
    #[error("rev {rev_id} names parent {parent_id}, which is not an earlier revision")]
    DanglingParent { rev_id: u64, parent_id: u64 },
}

impl ArticleHistory {
    /// Checks ordering and id invariants. Dangling parents are tolerated only
    /// when the parent id is 0.
    pub fn validate(&self) -> Result<(), HistoryViolation> {
        let mut seen = HashSet::new();
        let mut prev_ts: Option<DateTime<Utc>> = None;
        for (idx, rev) in self.revisions.iter().enumerate() {
            if idx > 0 && rev.parent_id != 0 && !seen.contains(&rev.parent_id) {
                return Err(HistoryViolation::DanglingParent {
                    rev_id: rev.rev_id,
                    parent_id: rev.parent_id,
                });
            }
            if !seen.insert(rev.rev_id) {
                return Err(HistoryViolation::DuplicateRevId(rev.rev_id));
            }
            if prev_ts.is_some_and(|t| rev.timestamp < t) {
                return Err(HistoryViolation::TimestampOrder(rev.rev_id));
            }
            prev_ts = Some(rev.timestamp);
        }
        Ok(())
    }

    /// Orders revisions by timestamp, keeping source order for equal times.
    pub(crate) fn sort_revisions(&mut self) {
        self.revisions.sort_by_key(|r| r.timestamp);
    }
}

pub fn text_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// True when `user` parses as an IPv4 or IPv6 address literal.
pub fn is_ip_literal(user: &str) -> bool {
    user.trim().parse::<IpAddr>().is_ok()
}

/// Title comparison key: underscores are spaces, whitespace collapsed, first
/// letter uppercase.
pub fn normalize_title(title: &str) -> String {
    crate::wikitext::canonicalize_target(title)
}
