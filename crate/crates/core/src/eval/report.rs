use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adjust::{adjust_for_unsupported, refine_label_family};
use super::confusion::{char_confusion_masked, CharConfusion, LabelFilter};
use super::entity::{entity_misses, sanitization_rate, EntityMiss, MissMode, Sanitization};
use super::metrics::{fmt_opt, instance_metrics, macro_distribution, metrics, MacroSummary, Metrics};
use super::EvalError;
use crate::detect::Scheme;
use crate::label::EntityLabel;
use crate::scalar::Scalar;
use crate::span::AnnotationSet;

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalInstance {
    pub doc_id: String,
    pub doc_len: usize,
    pub gold: AnnotationSet,
    pub pred: AnnotationSet,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalOptions {
    pub miss_mode: MissMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRow<T> {
    pub label: EntityLabel,
    pub supported: bool,
    pub confusion: CharConfusion,
    pub metrics: Metrics<T>,
    pub entities: EntityMiss,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport<T> {
    pub name: String,
    pub scheme: Scheme,
    pub instances: usize,
    pub overall: CharConfusion,
    pub micro: Metrics<T>,
    #[serde(rename = "macro")]
    pub macro_: MacroSummary<T>,
    pub labels: Vec<LabelRow<T>>,
    pub entities: EntityMiss,
    pub miss_mode: MissMode,
    pub sanitization: Sanitization,
}

impl<T: Scalar> SolutionReport<T> {
    pub fn to_f64(&self) -> SolutionReport<f64> {
        SolutionReport {
            name: self.name.clone(),
            scheme: self.scheme,
            instances: self.instances,
            overall: self.overall,
            micro: self.micro.to_f64(),
            macro_: self.macro_.to_f64(),
            labels: self
                .labels
                .iter()
                .map(|r| LabelRow {
                    label: r.label,
                    supported: r.supported,
                    confusion: r.confusion,
                    metrics: r.metrics.to_f64(),
                    entities: r.entities,
                })
                .collect(),
            entities: self.entities,
            miss_mode: self.miss_mode,
            sanitization: self.sanitization,
        }
    }

    pub fn supported(&self) -> BTreeSet<EntityLabel> {
        self.labels.iter().filter(|r| r.supported).map(|r| r.label).collect()
    }
}

struct InstanceResult {
    overall: CharConfusion,
    by_label: BTreeMap<EntityLabel, CharConfusion>,
    misses: BTreeMap<EntityLabel, EntityMiss>,
}

fn score_instance(
    inst: &EvalInstance,
    scheme: Scheme,
    supported: &BTreeSet<EntityLabel>,
    opts: EvalOptions,
) -> Result<InstanceResult, EvalError> {
    let pred = match scheme.label_map().as_ref().and_then(|m| m.label_family()) {
        Some((mapped, family)) => refine_label_family(&inst.gold, &inst.pred, mapped, family),
        None => inst.pred.clone(),
    };
    let adj = adjust_for_unsupported(&inst.gold, &pred, supported);
    let overall = char_confusion_masked(inst.doc_len, &adj.gold, &adj.pred, LabelFilter::Overall, &adj.excluded)?;
    let mut by_label = BTreeMap::new();
    for &l in supported {
        by_label.insert(
            l,
            char_confusion_masked(inst.doc_len, &adj.gold, &adj.pred, LabelFilter::Label(l), &adj.excluded)?,
        );
    }
    Ok(InstanceResult {
        overall,
        by_label,
        misses: entity_misses(&adj.gold, &adj.pred, opts.miss_mode),
    })
}

/// Scores one solution over a corpus. Instances are processed in parallel
/// and folded in doc_id order.
pub fn evaluate_solution<T: Scalar>(
    name: &str,
    scheme: Scheme,
    instances: &[EvalInstance],
    opts: EvalOptions,
) -> Result<SolutionReport<T>, EvalError> {
    if instances.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let supported = scheme.supported_labels();
    let mut order: Vec<&EvalInstance> = instances.iter().collect();
    order.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    let results: Vec<InstanceResult> = order
        .par_iter()
        .map(|inst| score_instance(inst, scheme, &supported, opts))
        .collect::<Result<_, _>>()?;

    let overall_cs: Vec<CharConfusion> = results.iter().map(|r| r.overall).collect();
    let overall: CharConfusion = overall_cs.iter().copied().sum();
    let per_instance: Vec<Metrics<T>> = overall_cs.iter().map(instance_metrics).collect();

    let mut entities = EntityMiss::default();
    let labels = EntityLabel::active()
        .map(|l| {
            let confusion: CharConfusion = results.iter().filter_map(|r| r.by_label.get(&l)).copied().sum();
            let mut miss = EntityMiss::default();
            for r in &results {
                if let Some(m) = r.misses.get(&l) {
                    miss += *m;
                }
            }
            entities += miss;
            LabelRow {
                label: l,
                supported: supported.contains(&l),
                confusion,
                metrics: metrics(&confusion),
                entities: miss,
            }
        })
        .collect();

    Ok(SolutionReport {
        name: name.to_string(),
        scheme,
        instances: results.len(),
        overall,
        micro: metrics(&overall),
        macro_: macro_distribution(&per_instance),
        labels,
        entities,
        miss_mode: opts.miss_mode,
        sanitization: sanitization_rate(&overall_cs),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub solutions: Vec<SolutionReport<f64>>,
}

impl Report {
    pub fn new<T: Scalar>(solutions: &[SolutionReport<T>]) -> Self {
        Report {
            version: REPORT_VERSION,
            solutions: solutions.iter().map(SolutionReport::to_f64).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Plain-text tables: per-label micro metrics per solution, macro
    /// summary, per-label entity misses, then the miss/sanitization summary.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let mut footnotes = BTreeSet::new();
        for s in &self.solutions {
            let _ = writeln!(out, "## {} (scheme: {}, instances: {})", s.name, s.scheme, s.instances);
            let _ = writeln!(out);
            let _ = writeln!(out, "Micro-average character-level performance");
            let _ = writeln!(
                out,
                "{:<22} {:>9} {:>9} {:>9} {:>9} {:>9}",
                "Entity", "Precision", "Recall", "F1", "AUROC", "Accuracy"
            );
            for r in &s.labels {
                if r.supported {
                    let m = &r.metrics;
                    let _ = writeln!(
                        out,
                        "{:<22} {:>9} {:>9} {:>9} {:>9} {:>9}",
                        r.label.as_str(),
                        fmt_opt(&m.precision, 3),
                        fmt_opt(&m.recall, 3),
                        fmt_opt(&m.f1, 3),
                        fmt_opt(&m.auroc, 3),
                        fmt_opt(&m.accuracy, 3)
                    );
                } else {
                    footnotes.insert(s.scheme);
                    let _ = writeln!(out, "{:<22} {:>9}", r.label.as_str(), "n/a*");
                }
            }
            let m = &s.micro;
            let _ = writeln!(
                out,
                "{:<22} {:>9} {:>9} {:>9} {:>9} {:>9}",
                "overall",
                fmt_opt(&m.precision, 3),
                fmt_opt(&m.recall, 3),
                fmt_opt(&m.f1, 3),
                fmt_opt(&m.auroc, 3),
                fmt_opt(&m.accuracy, 3)
            );
            let _ = writeln!(out);
            let _ = writeln!(out, "Macro-average, median (Q1, Q3) over instances");
            let q = |v: &Option<super::metrics::Quartiles<f64>>| v.as_ref().map_or("NA".to_string(), |q| q.render());
            let mm = &s.macro_;
            for (name, v) in [
                ("precision", &mm.precision),
                ("recall", &mm.recall),
                ("f1", &mm.f1),
                ("auroc", &mm.auroc),
                ("accuracy", &mm.accuracy),
            ] {
                let _ = writeln!(out, "{:<22} {}", name, q(v));
            }
            let _ = writeln!(out);
            let _ = writeln!(out, "Entities missed entirely ({})", miss_mode_name(s.miss_mode));
            let _ = writeln!(out, "{:<22} {:>8} {:>8} {:>9}", "Entity", "Total", "Missed", "Missed %");
            for r in s.labels.iter().filter(|r| r.supported) {
                let _ = writeln!(
                    out,
                    "{:<22} {:>8} {:>8} {:>9}",
                    r.label.as_str(),
                    r.entities.total,
                    r.entities.missed,
                    fmt_opt(&r.entities.percent::<f64>(), 2)
                );
            }
            let _ = writeln!(out);
        }

        let _ = writeln!(out, "## Summary");
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<16} {:>14} {:>8} {:>9} {:>10} {:>10} {:>12}",
            "Solution", "Total entities", "Missed", "Missed %", "Sanitized", "Instances", "Sanitized %"
        );
        for s in &self.solutions {
            let marker = if s.labels.iter().any(|r| !r.supported) { "*" } else { "" };
            let _ = writeln!(
                out,
                "{:<16} {:>14} {:>8} {:>9} {:>10} {:>10} {:>12}",
                s.name,
                format!("{}{}", s.entities.total, marker),
                s.entities.missed,
                fmt_opt(&s.entities.percent::<f64>(), 2),
                s.sanitization.sanitized,
                s.sanitization.total,
                fmt_opt(&s.sanitization.percent::<f64>(), 2)
            );
        }
        for scheme in footnotes {
            let unsupported: Vec<&str> = EntityLabel::active()
                .filter(|l| !scheme.supported_labels().contains(l))
                .map(EntityLabel::as_str)
                .collect();
            let _ = writeln!(
                out,
                "\n* {scheme}: adjusted for labels the solution does not support ({}); those gold spans are excluded",
                unsupported.join(", ")
            );
        }
        out
    }
}

fn miss_mode_name(m: MissMode) -> &'static str {
    match m {
        MissMode::AnyLabel => "no character covered by any prediction",
        MissMode::SameLabel => "no character covered by a same-label prediction",
    }
}
