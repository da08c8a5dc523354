//! Revision history retrieval through the MediaWiki query API.
//!
//! The HTTP layer is abstracted behind [`ApiTransport`] so the pagination,
//! retry and checkpoint logic can run against canned responses.

use std::collections::{BTreeMap, HashSet};
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde_json::Value;

use super::store::{RevisionStore, StoreError};
use super::{ArticleHistory, HistorySource, RawRevision};
use crate::config::ApiConfig;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    #[error("rate limited")]
    RateLimited,
    #[error("HTTP status {0}")]
    Status(u16),
    #[error("network error: {0}")]
    Network(String),
}

/// One GET against the API endpoint; returns the decoded JSON body.
pub trait ApiTransport {
    fn get(&self, endpoint: &str, params: &[(String, String)]) -> Result<Value, TransportError>;
}

impl<T: ApiTransport + ?Sized> ApiTransport for &T {
    fn get(&self, endpoint: &str, params: &[(String, String)]) -> Result<Value, TransportError> {
        (**self).get(endpoint, params)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("article {0:?} not found")]
    ArticleNotFound(String),
    #[error("rate limited after {0} attempts")]
    RateLimited(u32),
    #[error("transport failure: {0}")]
    Transport(TransportError),
    #[error("unexpected API response: {0}")]
    BadResponse(String),
    #[error("history truncated ({reason}); {} revisions retrieved", partial.revisions.len())]
    Truncated {
        partial: Box<ArticleHistory>,
        reason: String,
    },
    #[error(transparent)]
    Store(#[from] StoreError),
}

pub struct HistoryFetcher<T> {
    transport: T,
    config: ApiConfig,
}

enum PageOutcome {
    Page(Value),
    Failed(IngestError),
}

impl<T: ApiTransport> HistoryFetcher<T> {
    pub fn new(transport: T, config: ApiConfig) -> Self {
        HistoryFetcher { transport, config }
    }

    fn request(&self, endpoint: &str, params: &[(String, String)]) -> PageOutcome {
        let mut last = TransportError::RateLimited;
        for attempt in 0..self.config.max_attempts {
            if attempt > 0 {
                let millis = self
                    .config
                    .backoff_millis
                    .saturating_mul(1 << (attempt - 1).min(10));
                std::thread::sleep(Duration::from_millis(millis));
            }
            match self.transport.get(endpoint, params) {
                Ok(body) => {
                    let code = body.pointer("/error/code").and_then(Value::as_str);
                    match code {
                        Some("ratelimited") | Some("maxlag") => {
                            last = TransportError::RateLimited;
                            continue;
                        }
                        Some(other) => {
                            return PageOutcome::Failed(IngestError::BadResponse(format!(
                                "API error {other}: {}",
                                body.pointer("/error/info")
                                    .and_then(Value::as_str)
                                    .unwrap_or("")
                            )))
                        }
                        None => return PageOutcome::Page(body),
                    }
                }
                Err(e @ TransportError::Status(s)) if s < 500 && s != 429 => {
                    return PageOutcome::Failed(IngestError::Transport(e))
                }
                Err(e) => last = e,
            }
            log::warn!("API request attempt {} failed: {last}", attempt + 1);
        }
        PageOutcome::Failed(match last {
            TransportError::RateLimited | TransportError::Status(429) => {
                IngestError::RateLimited(self.config.max_attempts)
            }
            other => IngestError::Transport(other),
        })
    }

    /// Retrieves every revision of `title`, oldest first.
    ///
    /// With a store, each page of results is appended as soon as it arrives
    /// and the returned history is the store's full content. With
    /// `resume_from`, retrieval starts at that revision and revisions already
    /// present are skipped.
    pub fn fetch_history(
        &self,
        title: &str,
        lang: &str,
        resume_from: Option<u64>,
        store: Option<&RevisionStore>,
    ) -> Result<ArticleHistory, IngestError> {
        let endpoint = self.config.endpoint(lang);
        let _lock = store.map(|s| s.lock(lang, title)).transpose()?;
        let mut known: HashSet<u64> = HashSet::new();
        if let (Some(store), Some(_)) = (store, resume_from) {
            if store.exists(lang, title) {
                known.extend(store.load(lang, title)?.revisions.iter().map(|r| r.rev_id));
            }
        }

        let mut base: BTreeMap<String, String> = [
            ("action", "query"),
            ("prop", "revisions"),
            ("rvprop", "ids|timestamp|user|comment|content"),
            ("rvslots", "main"),
            ("rvlimit", "max"),
            ("rvdir", "newer"),
            ("format", "json"),
            ("formatversion", "2"),
            ("maxlag", "5"),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
        base.insert("titles".into(), title.to_string());
        if let Some(start) = resume_from {
            base.insert("rvstartid".into(), start.to_string());
        }

        let mut history = ArticleHistory {
            article_title: title.to_string(),
            language_code: lang.to_string(),
            revisions: Vec::new(),
            fetched_at: Utc::now().with_nanosecond_zero(),
            source: HistorySource::Api,
            complete: true,
        };
        let mut continuation: BTreeMap<String, String> = BTreeMap::new();
        let mut pages = 0usize;

        loop {
            let mut params = base.clone();
            params.extend(continuation.clone());
            let params: Vec<(String, String)> = params.into_iter().collect();
            let body = match self.request(&endpoint, &params) {
                PageOutcome::Page(body) => body,
                PageOutcome::Failed(err) if pages == 0 => return Err(err),
                PageOutcome::Failed(err) => {
                    history.complete = false;
                    if let Some(store) = store {
                        store.append(&history, &[])?;
                    }
                    return Err(IngestError::Truncated {
                        partial: Box::new(history),
                        reason: err.to_string(),
                    });
                }
            };
            pages += 1;

            let page = body
                .pointer("/query/pages/0")
                .ok_or_else(|| IngestError::BadResponse("missing query.pages".into()))?;
            if page.get("missing").is_some() || page.get("invalid").is_some() {
                return Err(IngestError::ArticleNotFound(title.to_string()));
            }
            if let Some(t) = page.get("title").and_then(Value::as_str) {
                history.article_title = t.to_string();
            }
            let mut batch = Vec::new();
            for rev in page
                .get("revisions")
                .and_then(Value::as_array)
                .map(Vec::as_slice)
                .unwrap_or(&[])
            {
                let rev = parse_api_revision(rev)?;
                if known.insert(rev.rev_id) {
                    batch.push(rev);
                }
            }

            let more = body.get("continue").and_then(Value::as_object);
            if more.is_none() {
                history.complete = true;
            }
            if let Some(store) = store {
                store.append(&history, &batch)?;
            }
            history.revisions.extend(batch);

            match more {
                Some(obj) => {
                    continuation = obj
                        .iter()
                        .map(|(k, v)| {
                            let v = v
                                .as_str()
                                .map(str::to_string)
                                .unwrap_or_else(|| v.to_string());
                            (k.clone(), v)
                        })
                        .collect();
                }
                None => break,
            }
        }

        match store {
            Some(store) => {
                let mut merged = store.load(lang, &history.article_title)?;
                merged.fetched_at = history.fetched_at;
                merged.complete = true;
                Ok(merged)
            }
            None => {
                history.sort_revisions();
                Ok(history)
            }
        }
    }
}

trait NanoZero {
    fn with_nanosecond_zero(self) -> Self;
}

impl NanoZero for DateTime<Utc> {
    fn with_nanosecond_zero(self) -> Self {
        use chrono::SubsecRound;
        self.trunc_subsecs(0)
    }
}

fn parse_api_revision(rev: &Value) -> Result<RawRevision, IngestError> {
    let bad = |what: &str| IngestError::BadResponse(format!("revision without {what}: {rev}"));
    let rev_id = rev
        .get("revid")
        .and_then(Value::as_u64)
        .ok_or_else(|| bad("revid"))?;
    let parent_id = rev.get("parentid").and_then(Value::as_u64).unwrap_or(0);
    let timestamp = rev
        .get("timestamp")
        .and_then(Value::as_str)
        .and_then(|s| DateTime::parse_from_rfc3339(s).ok())
        .ok_or_else(|| bad("timestamp"))?
        .with_timezone(&Utc);
    let user = rev.get("user").and_then(Value::as_str).unwrap_or("");
    let comment = rev.get("comment").and_then(Value::as_str).unwrap_or("");
    let main = rev.pointer("/slots/main");
    let hidden = rev.get("texthidden").is_some()
        || main.is_some_and(|m| m.get("texthidden").is_some() || m.get("textmissing").is_some());
    let content = main
        .and_then(|m| m.get("content"))
        .or_else(|| rev.get("content"))
        .and_then(Value::as_str);
    Ok(match content {
        Some(text) if !hidden => {
            RawRevision::new(rev_id, parent_id, timestamp, user, comment, text)
        }
        _ => RawRevision::suppressed(rev_id, parent_id, timestamp, user, comment),
    })
}

/// Convenience wrapper around [`HistoryFetcher::fetch_history`].
pub fn fetch_history<T: ApiTransport>(
    transport: T,
    config: &ApiConfig,
    article_title: &str,
    language_code: &str,
    resume_from: Option<u64>,
    store: Option<&RevisionStore>,
) -> Result<ArticleHistory, IngestError> {
    HistoryFetcher::new(transport, config.clone()).fetch_history(
        article_title,
        language_code,
        resume_from,
        store,
    )
}
