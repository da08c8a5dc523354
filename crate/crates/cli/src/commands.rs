//! Subcommand definitions and their implementations.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use wikidispute_core::analyze::analyze_history;
use wikidispute_core::config::API_URL_ENV;
use wikidispute_core::fixtures::{
    stats_history, synthetic_history, worked_example_history, SyntheticParams,
};
use wikidispute_core::ingest::api::IngestError;
use wikidispute_core::ingest::store::title_slug;
use wikidispute_core::ingest::{
    fetch_history, parse_dump, write_dump, ArticleHistory, RevisionStore,
};
use wikidispute_core::render::render_article;
use wikidispute_core::report::ArticleReport;
use wikidispute_core::Config;

use crate::server::{serve, ReportIndex};
use crate::transport::HttpTransport;

#[derive(Debug, Parser)]
#[command(
    name = "wikidispute",
    version,
    about = "Rank the wiki links of an article by how much editors disagree over them"
)]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Wiki language code.
    #[arg(long, global = true, default_value = "en")]
    pub lang: String,
    /// Revision store directory.
    #[arg(long, global = true, default_value = "./cache")]
    pub store: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Download an article's full history into the revision store.
    Fetch(FetchArgs),
    /// Score every link of an article and write a report file.
    Analyze(AnalyzeArgs),
    /// Write a standalone annotated HTML page from a report.
    Render(RenderArgs),
    /// Serve report files over a read-only JSON API.
    Serve(ServeArgs),
    /// Write a deterministic test history as an XML export.
    Fixtures(FixturesArgs),
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    #[arg(long)]
    pub article: String,
    /// Import from an XML history export instead of the API.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    /// Continue from the newest revision already in the store.
    #[arg(long)]
    pub resume: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub article: String,
    /// Read the history from an XML export instead of the store.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    /// Report path; defaults to `<lang>__<title>.report.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Directory containing `*.report.json` files.
    #[arg(long)]
    pub reports: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FixtureKind {
    /// Three revisions with two disagreeing edits.
    WorkedExample,
    /// Six revisions with a revert, tallied by hand.
    Stats,
    /// Seeded random history.
    Synthetic,
}

#[derive(Debug, Args)]
pub struct FixturesArgs {
    #[arg(long, value_enum, default_value = "synthetic")]
    pub kind: FixtureKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 40)]
    pub revisions: usize,
    #[arg(long, default_value_t = 8)]
    pub links: usize,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn load_config(path: Option<&Path>) -> anyhow::Result<Config> {
    let config = match path {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    Ok(config.with_env_overrides())
}

fn open_dump(path: &Path, article: &str, lang: &str) -> anyhow::Result<ArticleHistory> {
    let file = File::open(path).with_context(|| format!("cannot open dump {}", path.display()))?;
    let mut history = parse_dump(BufReader::new(file), article)?;
    history.language_code = lang.to_string();
    Ok(history)
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    std::fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let config = load_config(cli.config.as_deref())?;
    let store = RevisionStore::new(&cli.store);
    match cli.command {
        Command::Fetch(args) => fetch(&config, &store, &cli.lang, args),
        Command::Analyze(args) => analyze(&config, &store, &cli.lang, args),
        Command::Render(args) => render(args),
        Command::Serve(args) => {
            let index = ReportIndex::load_dir(&args.reports)?;
            if index.is_empty() {
                log::warn!("no *.report.json files in {}", args.reports.display());
            }
            serve(index, &args.addr)
        }
        Command::Fixtures(args) => fixtures(args),
    }
}

fn fetch(
    config: &Config,
    store: &RevisionStore,
    lang: &str,
    args: FetchArgs,
) -> anyhow::Result<()> {
    std::fs::create_dir_all(store.dir())
        .with_context(|| format!("cannot create store {}", store.dir().display()))?;
    let history = match &args.dump {
        Some(path) => {
            let history = open_dump(path, &args.article, lang)?;
            store.save(&history)?;
            history
        }
        None => {
            let resume = if args.resume {
                store.last_rev_id(lang, &args.article)?
            } else {
                None
            };
            let transport = HttpTransport::new(&config.api)?;
            log::info!(
                "fetching from {} (override with {API_URL_ENV})",
                config.api.endpoint(lang)
            );
            match fetch_history(
                transport,
                &config.api,
                &args.article,
                lang,
                resume,
                Some(store),
            ) {
                Ok(h) => h,
                Err(IngestError::Truncated { partial, reason }) => bail!(
                    "history of {:?} truncated after {} revisions ({reason}); rerun with --resume",
                    partial.article_title,
                    partial.revisions.len()
                ),
                Err(e) => return Err(e.into()),
            }
        }
    };
    println!(
        "{} ({}): {} revisions in {}",
        history.article_title,
        lang,
        history.revisions.len(),
        store.path_for(lang, &history.article_title).display()
    );
    Ok(())
}

fn analyze(
    config: &Config,
    store: &RevisionStore,
    lang: &str,
    args: AnalyzeArgs,
) -> anyhow::Result<()> {
    let history = match &args.dump {
        Some(path) => open_dump(path, &args.article, lang)?,
        None => store.load(lang, &args.article).with_context(|| {
            format!("no stored history for {:?}; run fetch first", args.article)
        })?,
    };
    let report = analyze_history(&history, config);
    let out = args.out.unwrap_or_else(|| {
        PathBuf::from(format!(
            "{}__{}.report.json",
            lang,
            title_slug(&report.article_title)
        ))
    });
    write_file(&out, &report.to_json())?;
    println!("{}", summary_line(&report, &out));
    Ok(())
}

pub fn summary_line(report: &ArticleReport, out: &Path) -> String {
    let top = report
        .links
        .first()
        .map(|l| format!("; top: {} ({})", l.link, l.score))
        .unwrap_or_default();
    format!(
        "{} ({}): {} of {} revisions analyzed, {} links ranked{top} -> {}",
        report.article_title,
        report.language_code,
        report.analyzed_revisions,
        report.chain_stats.raw_revisions,
        report.links.len(),
        out.display()
    )
}

fn render(args: RenderArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&args.report)
        .with_context(|| format!("cannot read report {}", args.report.display()))?;
    let report = ArticleReport::from_json(&text)
        .with_context(|| format!("invalid report {}", args.report.display()))?;
    let page = render_article(&report);
    write_file(&args.out, &page.html)?;
    println!(
        "{}: {} highlighted links -> {}",
        report.article_title,
        page.link_index.len(),
        args.out.display()
    );
    Ok(())
}

fn fixtures(args: FixturesArgs) -> anyhow::Result<()> {
    let history = match args.kind {
        FixtureKind::WorkedExample => worked_example_history(),
        FixtureKind::Stats => stats_history(),
        FixtureKind::Synthetic => synthetic_history(
            args.seed,
            &SyntheticParams {
                revisions: args.revisions,
                links: args.links,
                ..SyntheticParams::default()
            },
        ),
    };
    match &args.out {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
            let mut w = BufWriter::new(file);
            write_dump(&mut w, &history)?;
            w.flush()?;
            eprintln!(
                "{}: {} revisions -> {}",
                history.article_title,
                history.revisions.len(),
                path.display()
            );
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            write_dump(&mut w, &history)?;
        }
    }
    Ok(())
}
