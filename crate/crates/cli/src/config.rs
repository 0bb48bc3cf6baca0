//! Settings from an optional TOML file, then the environment, then flags.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;

pub const ENV_MODEL_URL: &str = "LOGICAL_MODEL_URL";
pub const ENV_DATA_DIR: &str = "LOGICAL_DATA_DIR";

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model_url: Option<String>,
    pub model_timeout_secs: Option<u64>,
    pub data_dir: Option<PathBuf>,
    pub gazetteer: Option<PathBuf>,
    pub resources: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub threshold: Option<f64>,
    pub max_words: Option<usize>,
    pub overlap_words: Option<usize>,
    pub fuzzy_threshold: Option<f64>,
    #[serde(default)]
    pub serve: ServeSection,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServeSection {
    pub bind: Option<String>,
    pub token: Option<String>,
    pub purge_originals: Option<bool>,
    pub max_chars: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Environment values win over the file.
    pub fn with_env(mut self, get: impl Fn(&str) -> Option<String>) -> Self {
        if let Some(u) = get(ENV_MODEL_URL).filter(|s| !s.trim().is_empty()) {
            self.model_url = Some(u);
        }
        if let Some(d) = get(ENV_DATA_DIR).filter(|s| !s.trim().is_empty()) {
            self.data_dir = Some(PathBuf::from(d));
        }
        self
    }
}
