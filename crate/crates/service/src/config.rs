use std::net::SocketAddr;
use std::path::PathBuf;

use deid_core::lineage::DEFAULT_FUZZY_THRESHOLD;
use deid_core::pipeline::DetectConfig;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    pub bind: SocketAddr,
    /// Bearer token required on `/v1` when set.
    pub token: Option<String>,
    /// Drop original text (and event surfaces) once a document is anonymized.
    pub purge_originals: bool,
    /// Largest accepted document, in characters.
    pub max_chars: usize,
    pub detect: DetectConfig,
    /// Threshold for newly created corpus stores.
    pub fuzzy_threshold: f64,
    pub retry_after_secs: u64,
}

impl ServiceConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        ServiceConfig {
            data_dir: data_dir.into(),
            bind: SocketAddr::from(([127, 0, 0, 1], 8077)),
            token: None,
            purge_originals: false,
            max_chars: 200_000,
            detect: DetectConfig::default(),
            fuzzy_threshold: DEFAULT_FUZZY_THRESHOLD,
            retry_after_secs: 5,
        }
    }

    /// Non-loopback binds need a token.
    pub fn check_bind(&self) -> Result<(), String> {
        if self.bind.ip().is_loopback() || self.token.is_some() {
            Ok(())
        } else {
            Err(format!("refusing to bind {} without an API token", self.bind))
        }
    }
}
