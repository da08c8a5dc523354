use std::cell::Cell;

use serde_json::{json, Value};
use wikidispute_core::config::ApiConfig;
use wikidispute_core::fixtures::{
    synthetic_history, worked_example_history, SyntheticParams, WORKED_TITLE, WORKED_XML,
};
use wikidispute_core::ingest::api::IngestError;
use wikidispute_core::ingest::{
    fetch_history, parse_dump, write_dump, ApiTransport, ArticleHistory, RevisionStore,
    TransportError,
};

/// Serves a history the way the revisions API does, `per_page` at a time.
struct Served {
    history: ArticleHistory,
    per_page: usize,
    fail_after: Option<usize>,
    calls: Cell<usize>,
}

impl Served {
    fn new(history: ArticleHistory, per_page: usize) -> Self {
        Served {
            history,
            per_page,
            fail_after: None,
            calls: Cell::new(0),
        }
    }
}

impl ApiTransport for Served {
    fn get(&self, _endpoint: &str, params: &[(String, String)]) -> Result<Value, TransportError> {
        let call = self.calls.get();
        self.calls.set(call + 1);
        if self.fail_after.is_some_and(|n| call >= n) {
            return Err(TransportError::Status(503));
        }
        let param = |k: &str| params.iter().find(|(n, _)| n == k).map(|(_, v)| v.as_str());
        let revs = &self.history.revisions;
        let start = match (param("rvcontinue"), param("rvstartid")) {
            (Some(c), _) => c.parse::<usize>().unwrap(),
            (None, Some(id)) => revs
                .iter()
                .position(|r| r.rev_id.to_string() == id)
                .unwrap(),
            (None, None) => 0,
        };
        let end = (start + self.per_page).min(revs.len());
        let items: Vec<Value> = revs[start..end]
            .iter()
            .map(|r| {
                let main = if r.suppressed {
                    json!({"texthidden": true})
                } else {
                    json!({"contentmodel": "wikitext", "content": r.wikitext})
                };
                let mut v = json!({"revid": r.rev_id, "parentid": r.parent_id,
                    "timestamp": r.timestamp.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
                    "user": r.user, "comment": r.comment, "slots": {"main": main}});
                if r.is_ip_user {
                    v["anon"] = json!(true);
                }
                v
            })
            .collect();
        let mut body = json!({"query": {"pages": [{"pageid": 9, "ns": 0,
            "title": self.history.article_title, "revisions": items}]}});
        if end < revs.len() {
            body["continue"] = json!({"rvcontinue": end.to_string(), "continue": "||"});
        }
        Ok(body)
    }
}

fn quick() -> ApiConfig {
    ApiConfig {
        backoff_millis: 0,
        max_attempts: 2,
        ..ApiConfig::default()
    }
}

fn assert_same_history(a: &ArticleHistory, b: &ArticleHistory) {
    assert_eq!(a.article_title, b.article_title);
    assert_eq!(a.revisions, b.revisions);
}

#[test]
fn dump_and_api_agree_on_worked_example() {
    let from_dump = parse_dump(WORKED_XML.as_bytes(), WORKED_TITLE).unwrap();
    let from_api = fetch_history(
        Served::new(worked_example_history(), 2),
        &quick(),
        WORKED_TITLE,
        "en",
        None,
        None,
    )
    .unwrap();
    assert_same_history(&from_dump, &from_api);
}

#[test]
fn dump_and_api_agree_on_synthetic_history() {
    let h = synthetic_history(
        41,
        &SyntheticParams {
            revisions: 120,
            ..SyntheticParams::default()
        },
    );
    assert!(h.revisions.iter().any(|r| r.suppressed) && h.revisions.iter().any(|r| r.is_ip_user));
    let mut xml = Vec::new();
    write_dump(&mut xml, &h).unwrap();
    let from_dump = parse_dump(xml.as_slice(), &h.article_title).unwrap();
    let from_api = fetch_history(
        Served::new(h.clone(), 50),
        &quick(),
        &h.article_title,
        "en",
        None,
        None,
    )
    .unwrap();
    assert_same_history(&from_dump, &from_api);
    assert_same_history(&from_dump, &h);
}

#[test]
fn truncated_fetch_resumes_into_the_same_store() {
    let h = synthetic_history(
        8,
        &SyntheticParams {
            revisions: 30,
            ..SyntheticParams::default()
        },
    );
    let dir = tempfile::tempdir().unwrap();
    let store = RevisionStore::new(dir.path());

    let mut flaky = Served::new(h.clone(), 10);
    flaky.fail_after = Some(2);
    let err =
        fetch_history(&flaky, &quick(), &h.article_title, "en", None, Some(&store)).unwrap_err();
    let IngestError::Truncated { partial, .. } = err else {
        panic!("expected truncation, got {err}");
    };
    assert!(!partial.complete);
    assert_eq!(partial.revisions.len(), 20);

    let last = store.last_rev_id("en", &h.article_title).unwrap().unwrap();
    let full = fetch_history(
        Served::new(h.clone(), 10),
        &quick(),
        &h.article_title,
        "en",
        Some(last),
        Some(&store),
    )
    .unwrap();
    assert!(full.complete);
    assert_same_history(&full, &h);
    assert_same_history(&store.load("en", &h.article_title).unwrap(), &h);
}
