//! Edit-history mining for wiki articles.
//!
//! The pipeline takes the full revision history of one article, cleans it
//! (collapsing consecutive same-user edits, detecting identity reverts and
//! dropping vandalism pairs), diffs consecutive revisions at section and
//! sentence level, and attributes every disagreeing sentence edit to the wiki
//! links inside that sentence. Each link accumulates `1 / w` per edited
//! sentence, where `w` is the number of links in the sentence.
//!
//! ```no_run
//! use wikidispute_core::{analyze, Config, ingest};
//!
//! let dump = std::fs::File::open("history.xml").unwrap();
//! let history = ingest::parse_dump(std::io::BufReader::new(dump), "Global warming").unwrap();
//! let report = analyze::analyze_history(&history, &Config::default());
//! for link in report.links.iter().take(10) {
//!     println!("{:>3} {:<60} {}", link.rank, link.link, link.score);
//! }
//! ```
//!
//! Score arithmetic is generic over the scalar type (see [`scalar::Scalar`]);
//! the pipeline uses exact rationals and converts to floating point only when
//! a report is serialized.

pub mod analyze;
pub mod chain;
pub mod config;
pub mod diffcore;
pub mod fixtures;
pub mod ingest;
pub mod render;
pub mod report;
pub mod scalar;
pub mod scoring;
pub mod wikitext;

pub use config::Config;
pub use scalar::Scalar;

/// Exact score type used by the pipeline.
pub type ExactScore = num_rational::BigRational;

/// Per-link score accumulated with exact rational arithmetic.
pub type ExactLinkScore = scoring::LinkScore<ExactScore>;
/// Per-link score accumulated in `f64`.
pub type FloatLinkScore = scoring::LinkScore<f64>;
/// Per-link score accumulated in `f32`.
pub type F32LinkScore = scoring::LinkScore<f32>;

pub type ExactScoreSeries = scoring::ScoreSeries<ExactScore>;
pub type FloatScoreSeries = scoring::ScoreSeries<f64>;
