//! Detection backends behind one contract.
//!
//! [`detect`] validates the request, asks a [`Detector`] for raw spans and
//! normalizes them: label and threshold filtering, offset checks, word
//! snapping and overlap resolution.

mod exact;
mod external;
mod gazetteer;
mod ingest;
mod model_server;

use std::collections::BTreeSet;

pub use exact::{parse_llm_response, tag_by_exact_match, ExactMatchOutcome, LlmResponseError, Unmatched};
pub use external::{map_external_label, ExternalLabelMap, MappingError, Scheme};
pub use gazetteer::{deterministic_detect, GazetteerConfig, GazetteerDetector, GazetteerError, PatternRule};
pub use ingest::{ingest_external, ingest_llm, ExternalEntity, ExternalRecord, IngestError, LlmRecord};
pub use model_server::{ModelServerClient, WireSpan};

use crate::label::EntityLabel;
use crate::span::{check_span, resolve_spans, snap_span, AnnotationSet, EntitySpan, Source};
use crate::text::CharText;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRequest {
    pub text: String,
    pub labels: Vec<EntityLabel>,
    pub threshold: f64,
}

impl DetectionRequest {
    /// A request for every active label at the default threshold.
    pub fn new(text: impl Into<String>) -> Self {
        DetectionRequest {
            text: text.into(),
            labels: EntityLabel::active().collect(),
            threshold: DEFAULT_THRESHOLD,
        }
    }

    pub fn with_labels(mut self, labels: impl IntoIterator<Item = EntityLabel>) -> Self {
        self.labels = labels.into_iter().collect();
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn validate(&self) -> Result<(), DetectError> {
        if self.labels.is_empty() {
            return Err(DetectError::Parameter("labels must not be empty".into()));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(DetectError::Parameter(format!(
                "threshold {} outside [0, 1]",
                self.threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DetectError {
    #[error("invalid detection request: {0}")]
    Parameter(String),
    #[error("backend {backend} unreachable: {message}")]
    Transport { backend: String, message: String },
    #[error("backend {backend} returned a malformed payload: {message}")]
    Protocol { backend: String, message: String },
}

impl DetectError {
    pub fn is_transport(&self) -> bool {
        matches!(self, DetectError::Transport { .. })
    }
}

/// A span source. Offsets returned by `detect_raw` are character offsets
/// into `req.text`; [`detect`] does the rest of the normalization.
pub trait Detector: Send + Sync {
    fn name(&self) -> &str;

    fn detect_raw(&self, req: &DetectionRequest) -> Result<Vec<EntitySpan>, DetectError>;

    fn supported_labels(&self) -> BTreeSet<EntityLabel> {
        EntityLabel::active().collect()
    }

    /// Backends that cannot serve concurrent requests return true; callers
    /// then serialize calls.
    fn single_flight(&self) -> bool {
        false
    }
}

pub fn detect(req: &DetectionRequest, backend: &dyn Detector) -> Result<AnnotationSet, DetectError> {
    req.validate()?;
    if req.text.is_empty() {
        return Ok(AnnotationSet::empty("", Source::Model));
    }
    let raw = backend.detect_raw(req)?;
    let text = CharText::new(&req.text);
    let wanted: BTreeSet<EntityLabel> = req.labels.iter().copied().collect();
    let mut spans = Vec::with_capacity(raw.len());
    for s in raw {
        if let Some(rule) = check_span(&text, &s) {
            return Err(DetectError::Protocol {
                backend: backend.name().to_string(),
                message: format!("span [{}, {}) {}: {rule}", s.start, s.end, s.label),
            });
        }
        if !wanted.contains(&s.label) || s.effective_score() < req.threshold {
            continue;
        }
        spans.push(snap_span(&text, &s));
    }
    Ok(AnnotationSet::new("", Source::Model, resolve_spans(&spans)))
}

/// Labels a scheme or backend can be scored on.
pub fn supported_labels(backend: &dyn Detector) -> BTreeSet<EntityLabel> {
    backend.supported_labels()
}
