//! Plain-text (TOML) configuration.
//!
//! ```toml
//! [chain]
//! bots = ["ClueBot NG", "XLinkBot"]
//! ip_revert_window_seconds = 60
//! aes_patterns = ["Blanked the page", "Replaced content with"]
//!
//! [diff]
//! jaccard_threshold = 0.3
//!
//! [api]
//! base_url = "https://{lang}.wikipedia.org/w/api.php"
//! user_agent = "wikidispute/0.1 (contact: you@example.org)"
//! max_attempts = 5
//! backoff_millis = 1000
//! ```
//!
//! Every key is optional; missing keys fall back to the defaults below.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Environment variable overriding `api.base_url`.
pub const API_URL_ENV: &str = "WIKIDISPUTE_API_URL";

pub const DEFAULT_BOTS: &[&str] = &[
    "ClueBot NG",
    "ClueBot",
    "AntiVandalBot",
    "VoABot II",
    "MartinBot",
    "Tawkerbot2",
    "Tawkerbot",
    "XLinkBot",
    "CounterVandalismBot",
    "DASHBot",
    "Shadowbot",
];

pub const DEFAULT_AES_PATTERNS: &[&str] = &["Blanked the page", "Replaced content with"];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub chain: ChainConfig,
    pub diff: DiffConfig,
    pub api: ApiConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    pub bots: BTreeSet<String>,
    pub ip_revert_window_seconds: i64,
    pub aes_patterns: Vec<String>,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            bots: DEFAULT_BOTS.iter().map(|s| s.to_string()).collect(),
            ip_revert_window_seconds: 60,
            aes_patterns: DEFAULT_AES_PATTERNS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiffConfig {
    /// Minimum word-level Jaccard similarity for two unmatched sentences to
    /// be paired as a modification.
    pub jaccard_threshold: f64,
}

impl Default for DiffConfig {
    fn default() -> Self {
        DiffConfig {
            jaccard_threshold: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApiConfig {
    /// `{lang}` is replaced by the language code.
    pub base_url: String,
    pub user_agent: String,
    pub max_attempts: u32,
    pub backoff_millis: u64,
}

impl Default for ApiConfig {
    fn default() -> Self {
        ApiConfig {
            base_url: "https://{lang}.wikipedia.org/w/api.php".to_string(),
            user_agent: concat!("wikidispute/", env!("CARGO_PKG_VERSION")).to_string(),
            max_attempts: 5,
            backoff_millis: 1000,
        }
    }
}

impl ApiConfig {
    pub fn endpoint(&self, lang: &str) -> String {
        self.base_url.replace("{lang}", lang)
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Config = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Applies [`API_URL_ENV`] when set.
    pub fn with_env_overrides(mut self) -> Self {
        if let Ok(url) = std::env::var(API_URL_ENV) {
            if !url.trim().is_empty() {
                self.api.base_url = url;
            }
        }
        self
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.chain.ip_revert_window_seconds < 0 {
            return Err(ConfigError::Invalid(
                "ip_revert_window_seconds must be >= 0".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.diff.jaccard_threshold) {
            return Err(ConfigError::Invalid(
                "jaccard_threshold must lie in [0, 1]".into(),
            ));
        }
        if self.api.max_attempts == 0 {
            return Err(ConfigError::Invalid("max_attempts must be >= 1".into()));
        }
        Ok(())
    }
}
