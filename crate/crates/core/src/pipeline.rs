//! Document-level compositions: chunked detection, and the non-model
//! chunk → merge → lineage → rewrite path used for benchmarking.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chunker::{
    chunk_annotations, chunk_document, merge_chunk_detections, BoundaryWarning, ChunkError, ChunkMapEntry, ChunkParams,
};
use crate::detect::{detect, DetectError, DetectionRequest, Detector, DEFAULT_THRESHOLD};
use crate::label::EntityLabel;
use crate::lineage::{apply_replacements, PlaceholderSource, Rewrite, RewriteError};
use crate::span::{AnnotationSet, Document};

#[derive(Debug, Clone, PartialEq)]
pub struct DetectConfig {
    pub chunk: ChunkParams,
    pub labels: Vec<EntityLabel>,
    pub threshold: f64,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            chunk: ChunkParams::default(),
            labels: EntityLabel::active().collect(),
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub set: AnnotationSet,
    pub chunks: Vec<ChunkMapEntry>,
    pub warnings: Vec<BoundaryWarning>,
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Chunk(#[from] ChunkError),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
}

/// Chunks `doc`, runs `backend` on every chunk (in parallel unless the
/// backend is single-flight) and merges the results in document
/// coordinates.
pub fn detect_document(doc: &Document, backend: &dyn Detector, cfg: &DetectConfig) -> Result<Detection, PipelineError> {
    let chunks = chunk_document(doc, cfg.chunk)?;
    let run = |c: &crate::chunker::Chunk| {
        let req = DetectionRequest {
            text: c.text.clone(),
            labels: cfg.labels.clone(),
            threshold: cfg.threshold,
        };
        detect(&req, backend).map(|mut set| {
            set.doc_id = c.id();
            (c.clone(), set)
        })
    };
    let per_chunk: Vec<_> = if backend.single_flight() {
        chunks.iter().map(run).collect::<Result<_, _>>()?
    } else {
        chunks.par_iter().map(run).collect::<Result<_, _>>()?
    };
    let merged = merge_chunk_detections(doc, &per_chunk)?;
    Ok(Detection {
        set: merged.set,
        chunks: chunks.iter().map(|c| c.map_entry()).collect(),
        warnings: merged.warnings,
    })
}

/// Replays known spans through chunking and merging, then rewrites with
/// placeholders. No detector is involved.
pub fn non_model_pipeline(
    doc: &Document,
    spans: &AnnotationSet,
    params: ChunkParams,
    source: &mut dyn PlaceholderSource,
) -> Result<(Rewrite, Vec<BoundaryWarning>), PipelineError> {
    let chunks = chunk_document(doc, params)?;
    let (per_chunk, mut warnings) = chunk_annotations(&chunks, spans);
    let pairs: Vec<_> = chunks.into_iter().zip(per_chunk).collect();
    let merged = merge_chunk_detections(doc, &pairs)?;
    warnings.extend(merged.warnings);
    Ok((apply_replacements(doc, &merged.set, source)?, warnings))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocTiming {
    pub doc_id: String,
    pub words: usize,
    pub seconds: f64,
}

impl DocTiming {
    pub fn seconds_per_word(&self) -> Option<f64> {
        (self.words > 0).then(|| self.seconds / self.words as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    pub documents: usize,
    pub words: usize,
    pub total_seconds: f64,
    pub mean_seconds_per_word: Option<f64>,
    pub sd_seconds_per_word: Option<f64>,
}

/// Mean and sample standard deviation of per-document seconds per word.
pub fn summarize_timings(t: &[DocTiming]) -> TimingSummary {
    let spw: Vec<f64> = t.iter().filter_map(DocTiming::seconds_per_word).collect();
    let mean = (!spw.is_empty()).then(|| spw.iter().sum::<f64>() / spw.len() as f64);
    let sd = mean.filter(|_| spw.len() > 1).map(|m| {
        let var = spw.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (spw.len() - 1) as f64;
        var.sqrt()
    });
    TimingSummary {
        documents: t.len(),
        words: t.iter().map(|d| d.words).sum(),
        total_seconds: t.iter().map(|d| d.seconds).sum(),
        mean_seconds_per_word: mean,
        sd_seconds_per_word: sd,
    }
}

/// Runs `f` and returns its result with the elapsed wall time.
pub fn timed<R>(f: impl FnOnce() -> R) -> (R, Duration) {
    let start = Instant::now();
    let r = f();
    (r, start.elapsed())
}
