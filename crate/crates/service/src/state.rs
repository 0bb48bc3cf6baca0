//! Per-document review state and its transitions.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use deid_core::chunker::{BoundaryWarning, ChunkMapEntry};
use deid_core::lineage::{OffsetMap, ReplacementEvent};
use deid_core::text::CharText;
use deid_core::{
    resolve_overlaps, snap_span_to_word_boundaries, validate_annotation_set, AnnotationSet, Document, EntityLabel,
    EntitySpan, Scope, Source,
};
use serde::{Deserialize, Serialize};

pub const RECORD_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pending,
    Reviewed,
    Anonymized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "lowercase")]
pub enum Decision {
    Accepted,
    Rejected,
    Edited { start: usize, end: usize, label: EntityLabel },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpan {
    pub id: u32,
    #[serde(flatten)]
    pub span: EntitySpan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anonymized {
    pub scope: Scope,
    pub text: String,
    pub events: Vec<ReplacementEvent>,
    pub offset_map: OffsetMap,
    pub at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub format: u32,
    pub doc_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_id: Option<String>,
    /// Bumped on every change; clients echo it for optimistic concurrency.
    pub version: u64,
    pub status: Status,
    pub created_at: DateTime<Utc>,
    /// `None` once purged after anonymization.
    pub text: Option<String>,
    pub char_len: usize,
    pub model_spans: Vec<ModelSpan>,
    #[serde(default)]
    pub decisions: BTreeMap<u32, Decision>,
    #[serde(default)]
    pub added: Vec<EntitySpan>,
    #[serde(default)]
    pub chunks: Vec<ChunkMapEntry>,
    #[serde(default)]
    pub warnings: Vec<BoundaryWarning>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anonymized: Option<Anonymized>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionItem {
    pub span_id: u32,
    #[serde(flatten)]
    pub decision: Decision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanInput {
    pub start: usize,
    pub end: usize,
    pub label: EntityLabel,
}

/// The complete set of reviewer decisions. A PUT replaces the previous
/// decisions and added spans; spans without a decision count as accepted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReviewRequest {
    #[serde(default)]
    pub version: Option<u64>,
    #[serde(default)]
    pub decisions: Vec<DecisionItem>,
    #[serde(default)]
    pub added: Vec<SpanInput>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReviewError {
    #[error("document is already anonymized")]
    Anonymized,
    #[error("version {given} is stale (current {current})")]
    Stale { given: u64, current: u64 },
    #[error("unknown span id {0}")]
    UnknownSpan(u32),
    #[error("more than one decision for span {0}")]
    DuplicateDecision(u32),
    #[error("invalid spans: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("original text has been purged")]
    Purged,
}

impl DocumentRecord {
    pub fn new(doc_id: String, corpus_id: Option<String>, text: String, detected: &AnnotationSet) -> Self {
        let char_len = text.chars().count();
        DocumentRecord {
            format: RECORD_VERSION,
            doc_id,
            corpus_id,
            version: 1,
            status: Status::Pending,
            created_at: Utc::now(),
            text: Some(text),
            char_len,
            model_spans: detected
                .spans
                .iter()
                .enumerate()
                .map(|(i, s)| ModelSpan {
                    id: i as u32,
                    span: s.clone(),
                })
                .collect(),
            decisions: BTreeMap::new(),
            added: Vec::new(),
            chunks: Vec::new(),
            warnings: Vec::new(),
            anonymized: None,
        }
    }

    pub fn document(&self) -> Option<Document> {
        self.text.as_ref().map(|t| Document::new(self.doc_id.clone(), t.clone()))
    }

    pub fn surface(&self, s: &EntitySpan) -> Option<String> {
        let t = self.text.as_deref()?;
        CharText::new(t).slice(s.start..s.end).map(str::to_string)
    }

    /// Accepted, edited and added spans, overlap-resolved.
    pub fn final_spans(&self) -> AnnotationSet {
        let mut spans: Vec<EntitySpan> = Vec::new();
        for m in &self.model_spans {
            match self.decisions.get(&m.id) {
                None | Some(Decision::Accepted) => spans.push(m.span.clone()),
                Some(Decision::Rejected) => {}
                Some(Decision::Edited { start, end, label }) => {
                    spans.push(EntitySpan::new(*start, *end, *label).with_source(Source::Human))
                }
            }
        }
        spans.extend(self.added.iter().cloned());
        resolve_overlaps(&AnnotationSet::new(self.doc_id.clone(), Source::Human, spans))
    }

    /// Applies a review. Returns whether anything changed; an identical
    /// repeat leaves the version alone.
    pub fn apply_review(&mut self, req: &ReviewRequest) -> Result<bool, ReviewError> {
        if self.status == Status::Anonymized {
            return Err(ReviewError::Anonymized);
        }
        if let Some(given) = req.version {
            if given != self.version {
                return Err(ReviewError::Stale {
                    given,
                    current: self.version,
                });
            }
        }
        let doc = self.document().ok_or(ReviewError::Purged)?;
        let ids: BTreeSet<u32> = self.model_spans.iter().map(|m| m.id).collect();

        let mut decisions = BTreeMap::new();
        let mut human = Vec::new();
        for d in &req.decisions {
            if !ids.contains(&d.span_id) {
                return Err(ReviewError::UnknownSpan(d.span_id));
            }
            if decisions.insert(d.span_id, d.decision.clone()).is_some() {
                return Err(ReviewError::DuplicateDecision(d.span_id));
            }
            if let Decision::Edited { start, end, label } = d.decision {
                human.push((format!("span {}", d.span_id), EntitySpan::new(start, end, label)));
            }
        }
        for (i, a) in req.added.iter().enumerate() {
            human.push((format!("added {i}"), EntitySpan::new(a.start, a.end, a.label)));
        }
        let problems: Vec<String> = human
            .iter()
            .flat_map(|(what, s)| {
                let set = AnnotationSet::new(self.doc_id.clone(), Source::Human, vec![s.clone()]);
                validate_annotation_set(&doc, &set)
                    .into_iter()
                    .map(move |v| format!("{what}: {}", v.to_string().trim_start_matches("span 0: ")))
            })
            .collect();
        if !problems.is_empty() {
            return Err(ReviewError::Invalid(problems));
        }

        let snap = |s: &EntitySpan| snap_span_to_word_boundaries(&doc, &s.clone().with_source(Source::Human));
        for d in decisions.values_mut() {
            if let Decision::Edited { start, end, label } = d {
                let s = snap(&EntitySpan::new(*start, *end, *label));
                *d = Decision::Edited {
                    start: s.start,
                    end: s.end,
                    label: s.label,
                };
            }
        }
        let added: Vec<EntitySpan> = req
            .added
            .iter()
            .map(|a| snap(&EntitySpan::new(a.start, a.end, a.label)))
            .collect();

        let changed = decisions != self.decisions || added != self.added || self.status != Status::Reviewed;
        if changed {
            self.decisions = decisions;
            self.added = added;
            self.status = Status::Reviewed;
            self.version += 1;
        }
        Ok(changed)
    }

    /// Records the rewrite and, when asked, drops the original text and
    /// the surfaces carried by the events.
    pub fn mark_anonymized(&mut self, a: Anonymized, purge: bool) {
        let mut a = a;
        if purge {
            self.text = None;
            for e in &mut a.events {
                e.surface.clear();
            }
        }
        self.anonymized = Some(a);
        self.status = Status::Anonymized;
        self.version += 1;
    }
}
