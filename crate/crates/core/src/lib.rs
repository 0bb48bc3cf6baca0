//! De-identification of clinical free text.
//!
//! Spans are half-open intervals over Unicode scalar values. The pipeline is
//! chunk → detect → merge → review → replace with lineage-preserving
//! placeholders; [`eval`] scores detections at character level and
//! [`pseudo`] produces format-preserving surrogates.

pub mod chunker;
pub mod detect;
pub mod eval;
pub mod format;
pub mod label;
pub mod lineage;
pub mod pipeline;
pub mod pseudo;
pub mod scalar;
pub mod span;
pub mod text;

pub use chunker::{chunk_document, merge_chunk_detections, project_span_to_document, Chunk, ChunkParams};
pub use label::EntityLabel;
pub use lineage::{apply_replacements, normalize_surface, LineageStore, Scope, SharedLineageStore};
pub use scalar::{Rational, Scalar};
pub use span::{
    resolve_overlaps, snap_span_to_word_boundaries, validate_annotation_set, AnnotationSet, Document, EntitySpan,
    Source, Violation,
};

pub type Metrics = eval::Metrics<f64>;
pub type MetricsF32 = eval::Metrics<f32>;
pub type ExactMetrics = eval::Metrics<Rational>;
pub type MacroSummary = eval::MacroSummary<f64>;
pub type ExactMacroSummary = eval::MacroSummary<Rational>;
pub type SolutionReport = eval::SolutionReport<f64>;
pub type ExactSolutionReport = eval::SolutionReport<Rational>;
