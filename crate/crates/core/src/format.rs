//! Newline-delimited annotation files.
//!
//! One JSON object per line:
//! `{"doc_id": str, "text": str?, "origin": str, "spans": [{"start", "end", "label", "score"?}]}`.
//! Offsets count Unicode scalar values.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::label::EntityLabel;
use crate::span::{AnnotationSet, Document, EntitySpan, Source};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanRecord {
    pub start: usize,
    pub end: usize,
    pub label: EntityLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub doc_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    pub origin: Source,
    #[serde(default)]
    pub spans: Vec<SpanRecord>,
}

impl AnnotationRecord {
    pub fn from_set(set: &AnnotationSet, text: Option<&str>) -> Self {
        AnnotationRecord {
            doc_id: set.doc_id.clone(),
            text: text.map(str::to_string),
            origin: set.origin,
            spans: set
                .spans
                .iter()
                .map(|s| SpanRecord {
                    start: s.start,
                    end: s.end,
                    label: s.label,
                    score: s.score,
                })
                .collect(),
        }
    }

    pub fn to_set(&self) -> AnnotationSet {
        AnnotationSet {
            doc_id: self.doc_id.clone(),
            origin: self.origin,
            spans: self
                .spans
                .iter()
                .map(|s| EntitySpan {
                    start: s.start,
                    end: s.end,
                    label: s.label,
                    score: s.score,
                    source: self.origin,
                })
                .collect(),
        }
    }

    pub fn document(&self) -> Option<Document> {
        self.text.as_ref().map(|t| Document::new(self.doc_id.clone(), t.clone()))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Reads JSON lines of type `T`, skipping blank lines. Line numbers in errors are 1-based.
pub fn read_jsonl<T, R>(reader: R) -> Result<Vec<T>, FormatError>
where
    T: for<'de> Deserialize<'de>,
    R: BufRead,
{
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|source| FormatError::Json { line: i + 1, source })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize, W: Write>(mut writer: W, records: &[T]) -> Result<(), FormatError> {
    for r in records {
        serde_json::to_writer(&mut writer, r).map_err(std::io::Error::from)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_annotations<R: BufRead>(reader: R) -> Result<Vec<AnnotationRecord>, FormatError> {
    read_jsonl(reader)
}
