//! Documents, spans and annotation sets, with their offset invariants.

use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::label::EntityLabel;
use crate::text::CharText;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<DateTime<Utc>>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
            created_at: None,
        }
    }

    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    #[default]
    Gold,
    Model,
    Human,
    External,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Gold => "gold",
            Source::Model => "model",
            Source::Human => "human",
            Source::External => "external",
        })
    }
}

/// Half-open character interval `[start, end)` carrying a label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntitySpan {
    pub start: usize,
    pub end: usize,
    pub label: EntityLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default)]
    pub source: Source,
}

impl EntitySpan {
    pub fn new(start: usize, end: usize, label: EntityLabel) -> Self {
        EntitySpan {
            start,
            end,
            label,
            score: None,
            source: Source::Gold,
        }
    }

    pub fn with_score(mut self, score: f64) -> Self {
        self.score = Some(score);
        self
    }

    pub fn with_source(mut self, source: Source) -> Self {
        self.source = source;
        self
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// Unscored spans (gold, human) count as certain.
    pub fn effective_score(&self) -> f64 {
        self.score.unwrap_or(1.0)
    }

    pub fn overlaps(&self, other: &EntitySpan) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn contains(&self, other: &EntitySpan) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationSet {
    pub doc_id: String,
    pub origin: Source,
    pub spans: Vec<EntitySpan>,
}

impl AnnotationSet {
    pub fn new(doc_id: impl Into<String>, origin: Source, spans: Vec<EntitySpan>) -> Self {
        AnnotationSet {
            doc_id: doc_id.into(),
            origin,
            spans,
        }
    }

    pub fn empty(doc_id: impl Into<String>, origin: Source) -> Self {
        Self::new(doc_id, origin, Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn len(&self) -> usize {
        self.spans.len()
    }

    pub fn with_label(&self, label: EntityLabel) -> impl Iterator<Item = &EntitySpan> {
        self.spans.iter().filter(move |s| s.label == label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    EmptyInterval,
    EndBeyondText,
    BlankSurface,
    ScoreOutOfRange,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::EmptyInterval => "empty interval",
            Rule::EndBeyondText => "end beyond text",
            Rule::BlankSurface => "blank surface",
            Rule::ScoreOutOfRange => "score outside [0, 1]",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Span { index: usize, rule: Rule },
    DocumentMismatch { expected: String, found: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Span { index, rule } => write!(f, "span {index}: {rule}"),
            Violation::DocumentMismatch { expected, found } => {
                write!(f, "set: doc_id {found:?} does not name document {expected:?}")
            }
        }
    }
}

/// Checks every span of `set` against `doc`. An empty result means the set is valid.
pub fn validate_annotation_set(doc: &Document, set: &AnnotationSet) -> Vec<Violation> {
    let mut out = Vec::new();
    if set.doc_id != doc.id {
        out.push(Violation::DocumentMismatch {
            expected: doc.id.clone(),
            found: set.doc_id.clone(),
        });
    }
    let text = CharText::new(&doc.text);
    for (index, span) in set.spans.iter().enumerate() {
        out.extend(
            check_span(&text, span)
                .into_iter()
                .map(|rule| Violation::Span { index, rule }),
        );
    }
    out
}

pub(crate) fn check_span(text: &CharText<'_>, span: &EntitySpan) -> Option<Rule> {
    if span.start >= span.end {
        return Some(Rule::EmptyInterval);
    }
    if span.end > text.len() {
        return Some(Rule::EndBeyondText);
    }
    if let Some(score) = span.score {
        if !(0.0..=1.0).contains(&score) {
            return Some(Rule::ScoreOutOfRange);
        }
    }
    match text.slice(span.start..span.end) {
        Some(s) if !s.trim().is_empty() => None,
        _ => Some(Rule::BlankSurface),
    }
}

/// Grows `span` so that it starts at a word start and ends at a word end.
/// Edge punctuation of the touched tokens is not pulled in.
pub fn snap_span_to_word_boundaries(doc: &Document, span: &EntitySpan) -> EntitySpan {
    snap_span(&CharText::new(&doc.text), span)
}

pub(crate) fn snap_span(text: &CharText<'_>, span: &EntitySpan) -> EntitySpan {
    let mut out = span.clone();
    if span.start >= span.end || span.end > text.len() {
        return out;
    }
    if let Some(tok) = text.token_at(span.start) {
        let core = text.word_core(tok);
        if !core.is_empty() && core.start <= span.start && span.start < core.end {
            out.start = core.start;
        }
    }
    if let Some(tok) = text.token_at(span.end - 1) {
        let core = text.word_core(tok);
        if !core.is_empty() && core.start < span.end && span.end <= core.end {
            out.end = core.end;
        }
    }
    out
}

/// Normalizes a set: same-label spans that overlap or touch are merged, and
/// cross-label conflicts keep the higher score, then the longer span, then
/// the earlier start. Output is sorted by start and overlap-free.
pub fn resolve_overlaps(set: &AnnotationSet) -> AnnotationSet {
    AnnotationSet {
        doc_id: set.doc_id.clone(),
        origin: set.origin,
        spans: resolve_spans(&set.spans),
    }
}

pub(crate) fn resolve_spans(spans: &[EntitySpan]) -> Vec<EntitySpan> {
    let mut by_label: BTreeMap<EntityLabel, Vec<EntitySpan>> = BTreeMap::new();
    for s in spans.iter().filter(|s| !s.is_empty()) {
        by_label.entry(s.label).or_default().push(s.clone());
    }

    let mut merged = Vec::new();
    for (_, mut group) in by_label {
        group.sort_by_key(|s| (s.start, s.end));
        let mut iter = group.into_iter();
        let mut cur = iter.next().expect("non-empty group");
        for s in iter {
            if s.start <= cur.end {
                cur.end = cur.end.max(s.end);
                cur.score = match (cur.score, s.score) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    _ => None,
                };
            } else {
                merged.push(std::mem::replace(&mut cur, s));
            }
        }
        merged.push(cur);
    }

    merged.sort_by(|a, b| {
        b.effective_score()
            .total_cmp(&a.effective_score())
            .then(b.len().cmp(&a.len()))
            .then(a.start.cmp(&b.start))
            .then(a.label.cmp(&b.label))
    });

    // accepted intervals are disjoint, so the one with the greatest start
    // below a candidate's end is the only one that can overlap it
    let mut accepted: BTreeMap<usize, EntitySpan> = BTreeMap::new();
    for s in merged {
        let clash = accepted
            .range(..s.end)
            .next_back()
            .is_some_and(|(_, prev)| prev.end > s.start);
        if !clash {
            accepted.insert(s.start, s);
        }
    }
    accepted.into_values().collect()
}
