//! File-level ingestion of third-party outputs.
//!
//! Service results (one JSON line per document):
//! `{"doc_id": str, "entities": [{"category": str, "subcategory": str?, "start": int?, "end": int?, "text": str?, "score": float?}]}`.
//! An entity with offsets is taken as is; one with only `text` is located by
//! exact matching. LLM results: `{"doc_id": str, "response": str}` where the
//! response holds the extraction JSON object.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::exact::{parse_llm_response, tag_by_exact_match, LlmResponseError, Unmatched};
use super::external::{ExternalLabelMap, MappingError};
use crate::label::EntityLabel;
use crate::span::{check_span, resolve_spans, AnnotationSet, EntitySpan, Source};
use crate::text::CharText;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalEntity {
    pub category: String,
    #[serde(default)]
    pub subcategory: Option<String>,
    #[serde(default)]
    pub start: Option<usize>,
    #[serde(default)]
    pub end: Option<usize>,
    #[serde(default)]
    pub text: Option<String>,
    #[serde(default)]
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalRecord {
    pub doc_id: String,
    pub entities: Vec<ExternalEntity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmRecord {
    pub doc_id: String,
    pub response: String,
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Llm(#[from] LlmResponseError),
    #[error("doc {doc_id}: entity {index} has neither offsets nor text")]
    Unlocated { doc_id: String, index: usize },
    #[error("doc {doc_id}: entity {index} [{start}, {end}) is invalid: {reason}")]
    Offsets {
        doc_id: String,
        index: usize,
        start: usize,
        end: usize,
        reason: String,
    },
}

pub fn ingest_external(
    record: &ExternalRecord,
    map: &ExternalLabelMap,
    text: &str,
) -> Result<(AnnotationSet, Vec<Unmatched>), IngestError> {
    let chars = CharText::new(text);
    let mut spans = Vec::new();
    let mut by_surface: BTreeMap<EntityLabel, Vec<String>> = BTreeMap::new();
    for (index, e) in record.entities.iter().enumerate() {
        let Some(label) = map.lookup(&e.category, e.subcategory.as_deref().unwrap_or(""))? else {
            continue;
        };
        match (e.start, e.end, &e.text) {
            (Some(start), Some(end), _) => {
                let mut span = EntitySpan::new(start, end, label).with_source(Source::External);
                span.score = e.score;
                if let Some(rule) = check_span(&chars, &span) {
                    return Err(IngestError::Offsets {
                        doc_id: record.doc_id.clone(),
                        index,
                        start,
                        end,
                        reason: rule.to_string(),
                    });
                }
                spans.push(span);
            }
            (_, _, Some(surface)) => by_surface.entry(label).or_default().push(surface.clone()),
            _ => {
                return Err(IngestError::Unlocated {
                    doc_id: record.doc_id.clone(),
                    index,
                })
            }
        }
    }
    let tagged = tag_by_exact_match(text, &by_surface);
    spans.extend(tagged.set.spans);
    Ok((
        AnnotationSet::new(record.doc_id.clone(), Source::External, resolve_spans(&spans)),
        tagged.unmatched,
    ))
}

pub fn ingest_llm(record: &LlmRecord, text: &str) -> Result<(AnnotationSet, Vec<Unmatched>), IngestError> {
    let extraction = parse_llm_response(&record.response)?;
    let mut tagged = tag_by_exact_match(text, &extraction);
    tagged.set.doc_id = record.doc_id.clone();
    Ok((tagged.set, tagged.unmatched))
}
