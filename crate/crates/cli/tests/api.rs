use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;
use wikidispute::server::{router, ReportIndex};
use wikidispute_core::analyze::analyze_history;
use wikidispute_core::fixtures::{stats_history, worked_example_history, WORKED_LIST_LINK};
use wikidispute_core::report::{ArticleReport, ReportView};
use wikidispute_core::Config;

fn reports() -> (ArticleReport, ArticleReport) {
    (
        analyze_history(&worked_example_history(), &Config::default()),
        analyze_history(&stats_history(), &Config::default()),
    )
}

fn index() -> ReportIndex {
    let (a, b) = reports();
    let mut index = ReportIndex::default();
    index.insert(a);
    index.insert(b);
    index
}

async fn get(uri: &str) -> (StatusCode, String, String) {
    let response = router(index())
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = response.status();
    let content_type = response
        .headers()
        .get("content-type")
        .map(|v| v.to_str().unwrap().to_string())
        .unwrap_or_default();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    (
        status,
        content_type,
        String::from_utf8(bytes.to_vec()).unwrap(),
    )
}

async fn get_json(uri: &str) -> (StatusCode, Value) {
    let (status, _, body) = get(uri).await;
    (status, serde_json::from_str(&body).unwrap())
}

#[tokio::test]
async fn health_and_listing() {
    let (status, body) = get_json("/healthz").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["articles"], 2);
    let (_, list) = get_json("/api/articles").await;
    let titles: Vec<&str> = list
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["article_title"].as_str().unwrap())
        .collect();
    assert_eq!(titles, ["Global warming", "Greenhouse gas"]);
}

#[tokio::test]
async fn report_links_match_report_file() {
    let (report, _) = reports();
    let file = report.to_json();
    let reloaded = ArticleReport::from_json(&file).unwrap();
    let (status, _, body) = get("/api/articles/en/Global_warming").await;
    assert_eq!(status, StatusCode::OK);
    let links = serde_json::to_string(&reloaded.links).unwrap();
    assert!(body.contains(&format!("\"links\":{links}")), "{body}");
    let view: ReportView = serde_json::from_str(&body).unwrap();
    assert_eq!(view.links, reloaded.links);
    let body: Value = serde_json::from_str(&body).unwrap();
    assert_eq!(body["bucket"], "month");
}

#[tokio::test]
async fn top_and_bucket_parameters() {
    let (_, body) = get_json("/api/articles/en/Greenhouse%20gas?top=2&bucket=week").await;
    assert_eq!(body["links"].as_array().unwrap().len(), 2);
    assert_eq!(body["total_links"], 4);
    assert!(body["series"]
        .as_array()
        .unwrap()
        .iter()
        .all(|s| s["bucket"] == "week"));
    let (status, err) = get_json("/api/articles/en/Greenhouse_gas?bucket=year").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(err["error"].is_string());
    let (status, _) = get_json("/api/articles/en/Greenhouse_gas?top=-1").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn link_detail_rows_newest_first() {
    let uri = format!(
        "/api/articles/en/Global_warming/links/{}",
        WORKED_LIST_LINK.replace(' ', "_")
    );
    let (status, body) = get_json(&uri).await;
    assert_eq!(status, StatusCode::OK);
    let rows = body["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["rev_id"], 169_761_113);
    assert_eq!(rows[1]["rev_id"], 169_685_102);
    for row in rows {
        assert_eq!(row["type"], "e");
        assert_eq!(row["section"], "abstract");
        let ops: Vec<&str> = row["diff"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| r["op"].as_str().unwrap())
            .collect();
        assert!(ops.contains(&"delete") && ops.contains(&"insert"));
    }
}

#[tokio::test]
async fn reverted_rows_name_their_reverter() {
    let (_, body) = get_json("/api/articles/en/Greenhouse_gas/links/Water_vapor").await;
    let rows = body["rows"].as_array().unwrap();
    assert_eq!(rows[0]["reverted_by"], Value::Null);
    assert_eq!(rows[1]["rev_id"], 1003);
    assert_eq!(rows[1]["reverted_by"], 1004);
}

#[tokio::test]
async fn unknown_things_are_404_json() {
    for uri in [
        "/api/articles/en/Nope",
        "/api/articles/de/Global_warming",
        "/api/articles/en/Global_warming/links/Nope",
        "/api/articles/en/Global_warming/annotated/extra",
        "/elsewhere",
    ] {
        let (status, content_type, body) = get(uri).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{uri}");
        assert!(content_type.starts_with("application/json"), "{uri}");
        let v: Value = serde_json::from_str(&body).unwrap();
        assert!(v["error"].is_string());
    }
}

#[tokio::test]
async fn repeated_requests_are_byte_identical() {
    let a = get("/api/articles/en/Greenhouse_gas?bucket=week").await;
    let b = get("/api/articles/en/Greenhouse_gas?bucket=week").await;
    assert_eq!(a, b);
}

#[tokio::test]
async fn annotated_page_is_html() {
    let (status, content_type, body) = get("/api/articles/en/Global_warming/annotated").await;
    assert_eq!(status, StatusCode::OK);
    assert!(content_type.starts_with("text/html"));
    assert!(body.contains(r#"data-bin="5""#) && body.contains(r#"data-bin="1""#));
}

#[test]
fn load_dir_reads_only_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = reports();
    std::fs::write(dir.path().join("a.report.json"), a.to_json()).unwrap();
    std::fs::write(dir.path().join("b.report.json"), b.to_json()).unwrap();
    std::fs::write(dir.path().join("notes.json"), "not a report").unwrap();
    let index = ReportIndex::load_dir(dir.path()).unwrap();
    assert_eq!(index.len(), 2);
    assert!(index.get("en", "global_warming").is_some());

    std::fs::write(dir.path().join("broken.report.json"), "{").unwrap();
    assert!(ReportIndex::load_dir(dir.path()).is_err());
}
