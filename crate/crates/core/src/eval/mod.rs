//! Character-level scoring.
//!
//! Every character of a document is classified as TP/FP/FN/TN by whether a
//! gold span and a predicted span cover it. Counts are integers; derived
//! metrics are computed in any [`Scalar`](crate::Scalar), so the same code
//! gives `f64` reports and exact [`Rational`](crate::Rational) checks.
//! AUROC for a single operating point is `(TPR + TNR) / 2`.

mod adjust;
mod confusion;
mod entity;
mod metrics;
mod report;

pub use adjust::{adjust_for_unsupported, refine_label_family, Adjusted};
pub use confusion::{char_confusion, char_confusion_masked, CharConfusion, LabelFilter};
pub use entity::{entity_miss_rate, entity_misses, sanitization_rate, EntityMiss, MissMode, Sanitization};
pub use metrics::{
    accuracy, auroc_binary, f1, fmt_opt, harmonic_mean, instance_metrics, macro_distribution, metrics, micro_metrics,
    percent, precision, quartile, quartiles, recall, specificity, MacroSummary, Metrics, Quartiles,
};
pub use report::{evaluate_solution, EvalInstance, EvalOptions, LabelRow, Report, SolutionReport, REPORT_VERSION};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("doc {doc_id}: span [{start}, {end}) outside text of length {len}")]
    Range {
        doc_id: String,
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("nothing to evaluate")]
    EmptyInput,
}
