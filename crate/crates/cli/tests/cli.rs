use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, Output};

use axum::extract::Query;
use axum::routing::get;
use axum::{Json, Router};
use serde_json::{json, Value};
use wikidispute_core::fixtures::{worked_example_history, WORKED_LIST_LINK, WORKED_XML};
use wikidispute_core::report::ArticleReport;

fn run(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wikidispute"));
    cmd.current_dir(dir)
        .args(args)
        .env_remove("WIKIDISPUTE_API_URL");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn analyze_bundled_fixture_dump() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("worked.xml"), WORKED_XML).unwrap();
    let o = run(
        dir.path(),
        &[
            "analyze",
            "--article",
            "Global warming",
            "--dump",
            "worked.xml",
            "--out",
            "gw.report.json",
        ],
        &[],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("2 links ranked"), "{}", stdout(&o));
    let report = ArticleReport::from_json(
        &std::fs::read_to_string(dir.path().join("gw.report.json")).unwrap(),
    )
    .unwrap();
    let scores: Vec<(&str, &str)> = report
        .links
        .iter()
        .map(|l| (l.link.as_str(), l.score_exact.as_str()))
        .collect();
    assert_eq!(
        scores,
        [(WORKED_LIST_LINK, "3/2"), ("Scientific consensus", "1/2")]
    );

    let o = run(
        dir.path(),
        &["render", "--report", "gw.report.json", "--out", "gw.html"],
        &[],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let html = std::fs::read_to_string(dir.path().join("gw.html")).unwrap();
    assert!(html.starts_with("<!DOCTYPE html>"));
    assert!(html.contains("data-link=") && html.contains("data-bin=\"5\""));
    assert!(!html.contains("<script") && !html.contains("src="));
}

#[test]
fn fixtures_are_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = run(
        dir.path(),
        &["fixtures", "--seed", "9", "--revisions", "30"],
        &[],
    );
    let b = run(
        dir.path(),
        &["fixtures", "--seed", "9", "--revisions", "30"],
        &[],
    );
    let c = run(
        dir.path(),
        &["fixtures", "--seed", "10", "--revisions", "30"],
        &[],
    );
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    assert_eq!(stdout(&a).matches("<revision>").count(), 30);
}

#[test]
fn usage_errors_exit_2_and_missing_inputs_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["analyze", "--no-such-flag"], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
    let o = run(dir.path(), &["frobnicate"], &[]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(
        dir.path(),
        &["render", "--report", "missing.json", "--out", "x.html"],
        &[],
    );
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr(&o).lines().count(), 1, "{}", stderr(&o));
    let o = run(
        dir.path(),
        &["analyze", "--article", "Nothing", "--store", "empty"],
        &[],
    );
    assert_eq!(o.status.code(), Some(1));
    let o = run(dir.path(), &["serve", "--reports", "no-such-dir"], &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn invalid_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.toml"),
        "[diff]\njaccard_threshold = 2.0\n",
    )
    .unwrap();
    std::fs::write(dir.path().join("worked.xml"), WORKED_XML).unwrap();
    let o = run(
        dir.path(),
        &[
            "--config",
            "bad.toml",
            "analyze",
            "--article",
            "Global warming",
            "--dump",
            "worked.xml",
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("jaccard_threshold"));
}

/// Minimal stand-in for the revisions API serving the three fixture
/// revisions two per page.
fn spawn_mock_api() -> String {
    let history = worked_example_history();
    let revs: Vec<Value> = history
        .revisions
        .iter()
        .map(|r| {
            json!({"revid": r.rev_id, "parentid": r.parent_id,
                "timestamp": r.timestamp.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
                "user": r.user, "comment": r.comment,
                "slots": {"main": {"contentmodel": "wikitext", "content": r.wikitext}}})
        })
        .collect();
    let handler = move |Query(q): Query<HashMap<String, String>>| {
        let revs = revs.clone();
        async move {
            if q.get("titles").map(String::as_str) != Some("Global warming") {
                return Json(
                    json!({"query": {"pages": [{"ns": 0, "title": "x", "missing": true}]}}),
                );
            }
            let start: usize = q.get("rvcontinue").map_or(0, |c| c.parse().unwrap());
            let end = (start + 2).min(revs.len());
            let mut body = json!({"query": {"pages": [{"pageid": 1, "ns": 0,
                "title": "Global warming", "revisions": revs[start..end]}]}});
            if end < revs.len() {
                body["continue"] = json!({"rvcontinue": end.to_string(), "continue": "||"});
            }
            Json(body)
        }
    };
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .enable_all()
            .build()
            .unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, Router::new().route("/w/api.php", get(handler)))
                .await
                .unwrap();
        });
    });
    format!("http://{}/w/api.php", rx.recv().unwrap())
}

#[test]
fn fetch_through_http_then_analyze_from_store() {
    let url = spawn_mock_api();
    let dir = tempfile::tempdir().unwrap();
    let env = [("WIKIDISPUTE_API_URL", url.as_str())];
    let o = run(
        dir.path(),
        &["fetch", "--article", "Global warming", "--store", "cache"],
        &env,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("3 revisions"));
    assert!(dir.path().join("cache/en__Global_warming.revs").exists());

    let o = run(
        dir.path(),
        &[
            "fetch",
            "--article",
            "Global warming",
            "--store",
            "cache",
            "--resume",
        ],
        &env,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("3 revisions"));

    let o = run(
        dir.path(),
        &["analyze", "--article", "Global warming", "--store", "cache"],
        &[],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let report_path = dir.path().join("en__Global_warming.report.json");
    let report = ArticleReport::from_json(&std::fs::read_to_string(report_path).unwrap()).unwrap();
    assert_eq!(report.links[0].score_exact, "3/2");

    let o = run(
        dir.path(),
        &["fetch", "--article", "Missing page", "--store", "cache"],
        &env,
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not found"));
}
