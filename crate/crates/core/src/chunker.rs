//! Fixed word-window chunking with overlap, and projection of chunk-local
//! detections back into document coordinates.
//!
//! Chunk `k` covers words `[k * stride, min(k * stride + max_words, W))`
//! with `stride = max_words - overlap_words`, so neighbouring windows share
//! exactly `overlap_words` words. Whitespace between two windows belongs to
//! the earlier one; the first window also owns any leading whitespace, so
//! the chunks always tile the whole document.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::span::{resolve_spans, AnnotationSet, Document, EntitySpan};
use crate::text::{char_len, CharText};
use crate::label::EntityLabel;

pub const DEFAULT_MAX_WORDS: usize = 4000;
pub const DEFAULT_OVERLAP_WORDS: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkParams {
    pub max_words: usize,
    pub overlap_words: usize,
}

impl Default for ChunkParams {
    fn default() -> Self {
        ChunkParams {
            max_words: DEFAULT_MAX_WORDS,
            overlap_words: DEFAULT_OVERLAP_WORDS,
        }
    }
}

impl ChunkParams {
    pub fn new(max_words: usize, overlap_words: usize) -> Result<Self, ChunkError> {
        let p = ChunkParams { max_words, overlap_words };
        p.validate()?;
        Ok(p)
    }

    pub fn stride(&self) -> usize {
        self.max_words.saturating_sub(self.overlap_words)
    }

    pub fn validate(&self) -> Result<(), ChunkError> {
        if self.max_words == 0 || self.max_words <= 2 * self.overlap_words {
            return Err(ChunkError::Parameters {
                max_words: self.max_words,
                overlap_words: self.overlap_words,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub doc_id: String,
    pub index: usize,
    #[serde(with = "range_pair")]
    pub word_range: Range<usize>,
    pub char_base: usize,
    pub text: String,
}

impl Chunk {
    pub fn id(&self) -> String {
        format!("{}#{}", self.doc_id, self.index)
    }

    pub fn char_len(&self) -> usize {
        char_len(&self.text)
    }

    /// Document character range covered by this chunk.
    pub fn char_range(&self) -> Range<usize> {
        self.char_base..self.char_base + self.char_len()
    }

    pub fn word_count(&self) -> usize {
        self.word_range.len()
    }

    pub fn map_entry(&self) -> ChunkMapEntry {
        ChunkMapEntry {
            chunk_id: self.id(),
            char_base: self.char_base,
            word_range: self.word_range.clone(),
        }
    }
}

/// Sidecar record linking a chunk id back to its document coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkMapEntry {
    pub chunk_id: String,
    pub char_base: usize,
    #[serde(with = "range_pair")]
    pub word_range: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChunkError {
    #[error("invalid chunk parameters: max_words {max_words} must exceed twice overlap_words {overlap_words}")]
    Parameters { max_words: usize, overlap_words: usize },
    #[error("span [{start}, {end}) lies outside chunk {chunk_id} of {len} characters")]
    Range {
        chunk_id: String,
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("chunks do not tile the document: gap before chunk {0}")]
    Gap(usize),
}

pub fn chunk_document(doc: &Document, params: ChunkParams) -> Result<Vec<Chunk>, ChunkError> {
    params.validate()?;
    let text = CharText::new(&doc.text);
    let words = text.words();
    let total = words.len();
    let stride = params.stride();

    let mut chunks = Vec::new();
    if total == 0 && !text.is_empty() {
        // whitespace only: one wordless chunk keeps the text reconstructible
        chunks.push(Chunk {
            doc_id: doc.id.clone(),
            index: 0,
            word_range: 0..0,
            char_base: 0,
            text: doc.text.clone(),
        });
    }
    let mut first = 0;
    while first < total {
        let last = (first + params.max_words).min(total);
        let char_base = if first == 0 { 0 } else { words[first].start };
        let char_end = if last == total { text.len() } else { words[last].start };
        chunks.push(Chunk {
            doc_id: doc.id.clone(),
            index: chunks.len(),
            word_range: first..last,
            char_base,
            text: text.slice(char_base..char_end).expect("word offsets in range").to_string(),
        });
        if last == total {
            break;
        }
        first += stride;
    }
    Ok(chunks)
}

/// Concatenates chunk texts, dropping the part of each chunk already
/// covered by its predecessor.
pub fn reconstruct_text(chunks: &[Chunk]) -> Result<String, ChunkError> {
    let mut out = String::new();
    let mut covered = 0usize;
    for (i, c) in chunks.iter().enumerate() {
        if c.char_base > covered {
            return Err(ChunkError::Gap(i));
        }
        let skip = covered - c.char_base;
        out.extend(c.text.chars().skip(skip));
        covered = covered.max(c.char_base + c.char_len());
    }
    Ok(out)
}

pub fn project_span_to_document(chunk: &Chunk, local: &EntitySpan) -> Result<EntitySpan, ChunkError> {
    let len = chunk.char_len();
    if local.start >= local.end || local.end > len {
        return Err(ChunkError::Range {
            chunk_id: chunk.id(),
            start: local.start,
            end: local.end,
            len,
        });
    }
    let mut out = local.clone();
    out.start += chunk.char_base;
    out.end += chunk.char_base;
    Ok(out)
}

/// A merged span that no single window contained in full; it was
/// assembled from partial detections and deserves a second look.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryWarning {
    pub start: usize,
    pub end: usize,
    pub label: EntityLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeOutcome {
    pub set: AnnotationSet,
    pub warnings: Vec<BoundaryWarning>,
}

pub fn merge_chunk_detections(
    doc: &Document,
    per_chunk: &[(Chunk, AnnotationSet)],
) -> Result<MergeOutcome, ChunkError> {
    let mut projected = Vec::new();
    let origin = per_chunk.first().map(|(_, s)| s.origin).unwrap_or_default();
    for (chunk, set) in per_chunk {
        for s in &set.spans {
            projected.push(project_span_to_document(chunk, s)?);
        }
    }
    let spans = resolve_spans(&projected);
    let ranges: Vec<Range<usize>> = per_chunk.iter().map(|(c, _)| c.char_range()).collect();
    let warnings = boundary_warnings(&spans, &ranges);
    Ok(MergeOutcome {
        set: AnnotationSet::new(doc.id.clone(), origin, spans),
        warnings,
    })
}

fn boundary_warnings(spans: &[EntitySpan], ranges: &[Range<usize>]) -> Vec<BoundaryWarning> {
    if ranges.len() < 2 {
        return Vec::new();
    }
    spans
        .iter()
        .filter(|s| !ranges.iter().any(|r| r.start <= s.start && s.end <= r.end))
        .map(|s| BoundaryWarning {
            start: s.start,
            end: s.end,
            label: s.label,
        })
        .collect()
}

/// Distributes document-level spans onto chunks, in chunk-local coordinates.
///
/// A span lands in every chunk that contains it whole. A span no chunk
/// contains goes to the first chunk holding its start, truncated at that
/// chunk's end, and is reported as a boundary warning.
pub fn chunk_annotations(chunks: &[Chunk], set: &AnnotationSet) -> (Vec<AnnotationSet>, Vec<BoundaryWarning>) {
    let mut out: Vec<AnnotationSet> = chunks
        .iter()
        .map(|c| AnnotationSet::empty(c.id(), set.origin))
        .collect();
    let mut warnings = Vec::new();
    let ranges: Vec<Range<usize>> = chunks.iter().map(Chunk::char_range).collect();
    for s in &set.spans {
        let mut placed = false;
        for (i, r) in ranges.iter().enumerate() {
            if r.start <= s.start && s.end <= r.end {
                out[i].spans.push(shift(s, r.start, s.end));
                placed = true;
            }
        }
        if placed {
            continue;
        }
        if let Some(i) = ranges.iter().position(|r| r.contains(&s.start)) {
            out[i].spans.push(shift(s, ranges[i].start, ranges[i].end));
            warnings.push(BoundaryWarning {
                start: s.start,
                end: s.end,
                label: s.label,
            });
        }
    }
    (out, warnings)
}

fn shift(s: &EntitySpan, base: usize, end: usize) -> EntitySpan {
    let mut local = s.clone();
    local.start -= base;
    local.end = end.min(s.end) - base;
    local
}

mod range_pair {
    use std::ops::Range;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(r: &Range<usize>, s: S) -> Result<S::Ok, S::Error> {
        [r.start, r.end].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Range<usize>, D::Error> {
        let [a, b] = <[usize; 2]>::deserialize(d)?;
        Ok(a..b)
    }
}
