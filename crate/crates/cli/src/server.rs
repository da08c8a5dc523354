//! Read-only JSON API over precomputed report files.
//!
//! | route | body |
//! |---|---|
//! | `GET /healthz` | `{"status":"ok","articles":N}` |
//! | `GET /api/articles` | article summaries |
//! | `GET /api/articles/{lang}/{title}?top=N&bucket=month\|week` | [`ReportView`] |
//! | `GET /api/articles/{lang}/{title}/links/{link}` | [`LinkDetail`] |
//! | `GET /api/articles/{lang}/{title}/annotated` | standalone HTML |
//!
//! Errors are `{"error": "..."}` with status 404 (unknown article or link)
//! or 400 (bad query parameter).

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use anyhow::Context;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use wikidispute_core::ingest::normalize_title;
use wikidispute_core::render::render_article;
use wikidispute_core::report::{ArticleReport, LinkDetail, ReportView};
use wikidispute_core::scoring::Bucket;
use wikidispute_core::wikitext::canonicalize_target;

/// Reports keyed by `(language code, normalized title)`.
#[derive(Debug, Default, Clone)]
pub struct ReportIndex {
    reports: BTreeMap<(String, String), ArticleReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleSummary {
    pub language_code: String,
    pub article_title: String,
    pub analyzed_revisions: usize,
    pub links: usize,
    pub top_link: Option<String>,
}

impl ReportIndex {
    pub fn insert(&mut self, report: ArticleReport) {
        let key = (
            report.language_code.clone(),
            normalize_title(&report.article_title),
        );
        self.reports.insert(key, report);
    }

    pub fn len(&self) -> usize {
        self.reports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reports.is_empty()
    }

    pub fn get(&self, lang: &str, title: &str) -> Option<&ArticleReport> {
        self.reports
            .get(&(lang.to_string(), normalize_title(title)))
    }

    /// Loads every `*.report.json` file in `dir`.
    pub fn load_dir(dir: &Path) -> anyhow::Result<ReportIndex> {
        let mut index = ReportIndex::default();
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .with_context(|| format!("cannot read report directory {}", dir.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.to_string_lossy().ends_with(".report.json"))
            .collect();
        paths.sort();
        for path in paths {
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            let report = ArticleReport::from_json(&text)
                .with_context(|| format!("invalid report {}", path.display()))?;
            log::info!("loaded {} ({})", report.article_title, path.display());
            index.insert(report);
        }
        Ok(index)
    }

    pub fn summaries(&self) -> Vec<ArticleSummary> {
        self.reports
            .values()
            .map(|r| ArticleSummary {
                language_code: r.language_code.clone(),
                article_title: r.article_title.clone(),
                analyzed_revisions: r.analyzed_revisions,
                links: r.links.len(),
                top_link: r.links.first().map(|l| l.link.clone()),
            })
            .collect()
    }
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (
        status,
        Json(ErrorBody {
            error: message.into(),
        }),
    )
        .into_response()
}

type Shared = Arc<ReportIndex>;

#[derive(Debug, Deserialize)]
struct ViewQuery {
    top: Option<String>,
    bucket: Option<String>,
}

async fn healthz(State(index): State<Shared>) -> Response {
    Json(serde_json::json!({"status": "ok", "articles": index.len()})).into_response()
}

async fn list_articles(State(index): State<Shared>) -> Json<Vec<ArticleSummary>> {
    Json(index.summaries())
}

fn article_not_found(lang: &str, title: &str) -> Response {
    error(
        StatusCode::NOT_FOUND,
        format!("no report for {lang}:{title}"),
    )
}

async fn get_report(
    State(index): State<Shared>,
    UrlPath((lang, title)): UrlPath<(String, String)>,
    Query(q): Query<ViewQuery>,
) -> Response {
    let Some(report) = index.get(&lang, &title) else {
        return article_not_found(&lang, &title);
    };
    let top = match q.top.as_deref().map(str::parse::<usize>) {
        None => None,
        Some(Ok(n)) => Some(n),
        Some(Err(_)) => {
            return error(
                StatusCode::BAD_REQUEST,
                "top must be a non-negative integer",
            )
        }
    };
    let bucket = match q.bucket.as_deref() {
        None => Bucket::Month,
        Some(b) => match Bucket::parse(b) {
            Some(b) => b,
            None => return error(StatusCode::BAD_REQUEST, "bucket must be month or week"),
        },
    };
    let view: ReportView = report.view(top, bucket);
    Json(view).into_response()
}

async fn get_link(
    State(index): State<Shared>,
    UrlPath((lang, title, link)): UrlPath<(String, String, String)>,
) -> Response {
    let Some(report) = index.get(&lang, &title) else {
        return article_not_found(&lang, &title);
    };
    let detail: Option<LinkDetail> = report.detail(&canonicalize_target(&link));
    match detail {
        Some(d) => Json(d).into_response(),
        None => error(
            StatusCode::NOT_FOUND,
            format!("link {link:?} is not ranked in {title}"),
        ),
    }
}

async fn get_annotated(
    State(index): State<Shared>,
    UrlPath((lang, title)): UrlPath<(String, String)>,
) -> Response {
    match index.get(&lang, &title) {
        Some(report) => (
            [(header::CONTENT_TYPE, "text/html; charset=utf-8")],
            render_article(report).html,
        )
            .into_response(),
        None => article_not_found(&lang, &title),
    }
}

async fn not_found() -> Response {
    error(StatusCode::NOT_FOUND, "no such endpoint")
}

pub fn router(index: ReportIndex) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/api/articles", get(list_articles))
        .route("/api/articles/{lang}/{title}", get(get_report))
        .route("/api/articles/{lang}/{title}/links/{link}", get(get_link))
        .route("/api/articles/{lang}/{title}/annotated", get(get_annotated))
        .fallback(not_found)
        .with_state(Arc::new(index))
}

/// Serves `index` on `addr` until the process is stopped.
pub fn serve(index: ReportIndex, addr: &str) -> anyhow::Result<()> {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("cannot bind {addr}"))?;
        log::info!(
            "serving {} reports on http://{}",
            index.len(),
            listener.local_addr()?
        );
        axum::serve(listener, router(index)).await?;
        Ok(())
    })
}
