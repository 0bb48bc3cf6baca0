//! Client for an external span-prediction server.
//!
//! Request: `POST {url}` with `{"text": str, "labels": [str], "threshold": float}`.
//! Response: `[{"start": int, "end": int, "label": str, "score": float}]`,
//! offsets in Unicode scalar values.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{DetectError, DetectionRequest, Detector};
use crate::label::EntityLabel;
use crate::span::{EntitySpan, Source};

#[derive(Debug, Serialize)]
struct WireRequest<'a> {
    text: &'a str,
    labels: Vec<&'static str>,
    threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireSpan {
    pub start: usize,
    pub end: usize,
    pub label: String,
    pub score: f64,
}

#[derive(Debug, Clone)]
pub struct ModelServerClient {
    url: String,
    name: String,
    agent: ureq::Agent,
}

impl ModelServerClient {
    pub fn new(url: impl Into<String>, timeout: Duration) -> Self {
        let url = url.into();
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        ModelServerClient {
            name: format!("model-server({url})"),
            url,
            agent,
        }
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    fn protocol(&self, message: impl Into<String>) -> DetectError {
        DetectError::Protocol {
            backend: self.name.clone(),
            message: message.into(),
        }
    }
}

impl Detector for ModelServerClient {
    fn name(&self) -> &str {
        &self.name
    }

    fn detect_raw(&self, req: &DetectionRequest) -> Result<Vec<EntitySpan>, DetectError> {
        let body = WireRequest {
            text: &req.text,
            labels: req.labels.iter().map(|l| l.as_str()).collect(),
            threshold: req.threshold,
        };
        let mut response = self.agent.post(&self.url).send_json(&body).map_err(|e| match e {
            ureq::Error::StatusCode(code) if code < 500 => self.protocol(format!("HTTP status {code}")),
            other => DetectError::Transport {
                backend: self.name.clone(),
                message: other.to_string(),
            },
        })?;
        let wire: Vec<WireSpan> = response
            .body_mut()
            .read_json()
            .map_err(|e| self.protocol(e.to_string()))?;
        wire.into_iter()
            .map(|w| {
                let label: EntityLabel = w.label.parse().map_err(|_| self.protocol(format!("unknown label {:?}", w.label)))?;
                if !(0.0..=1.0).contains(&w.score) {
                    return Err(self.protocol(format!("score {} outside [0, 1]", w.score)));
                }
                Ok(EntitySpan::new(w.start, w.end, label)
                    .with_score(w.score)
                    .with_source(Source::Model))
            })
            .collect()
    }
}
