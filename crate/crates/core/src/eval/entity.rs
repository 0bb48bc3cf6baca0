use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::confusion::{touches, union, CharConfusion};
use crate::label::EntityLabel;
use crate::scalar::Scalar;
use crate::span::AnnotationSet;

use super::metrics::percent;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissMode {
    /// Missed iff no predicted span of any label touches the entity.
    #[default]
    AnyLabel,
    /// Missed iff no predicted span of the entity's own label touches it.
    SameLabel,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMiss {
    pub total: u64,
    pub missed: u64,
}

impl EntityMiss {
    pub fn percent<T: Scalar>(&self) -> Option<T> {
        percent(self.missed, self.total)
    }
}

impl std::ops::AddAssign for EntityMiss {
    fn add_assign(&mut self, o: EntityMiss) {
        self.total += o.total;
        self.missed += o.missed;
    }
}

/// Per-label entity miss counts for one document. Gold spans are the
/// entities; a label absent from the map had no gold entities.
pub fn entity_misses(gold: &AnnotationSet, pred: &AnnotationSet, mode: MissMode) -> BTreeMap<EntityLabel, EntityMiss> {
    let any = union(pred.spans.iter().map(|s| s.start..s.end));
    let mut by_label: BTreeMap<EntityLabel, Vec<_>> = BTreeMap::new();
    if mode == MissMode::SameLabel {
        for s in &pred.spans {
            by_label.entry(s.label).or_default().push(s.start..s.end);
        }
    }
    let by_label: BTreeMap<EntityLabel, Vec<_>> = by_label.into_iter().map(|(l, v)| (l, union(v))).collect();

    let mut out: BTreeMap<EntityLabel, EntityMiss> = BTreeMap::new();
    for g in &gold.spans {
        let cover = match mode {
            MissMode::AnyLabel => &any[..],
            MissMode::SameLabel => by_label.get(&g.label).map(Vec::as_slice).unwrap_or(&[]),
        };
        let e = out.entry(g.label).or_default();
        e.total += 1;
        if !touches(cover, &(g.start..g.end)) {
            e.missed += 1;
        }
    }
    out
}

/// Entity miss counts across documents, over all labels.
pub fn entity_miss_rate<'a>(
    pairs: impl IntoIterator<Item = (&'a AnnotationSet, &'a AnnotationSet)>,
    mode: MissMode,
) -> EntityMiss {
    let mut total = EntityMiss::default();
    for (gold, pred) in pairs {
        for m in entity_misses(gold, pred, mode).into_values() {
            total += m;
        }
    }
    total
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sanitization {
    pub sanitized: u64,
    pub total: u64,
}

impl Sanitization {
    pub fn percent<T: Scalar>(&self) -> Option<T> {
        percent(self.sanitized, self.total)
    }
}

/// An instance is completely sanitized when none of its PII characters
/// escaped detection (`fn == 0`, overall mode).
pub fn sanitization_rate(confusions: &[CharConfusion]) -> Sanitization {
    Sanitization {
        sanitized: confusions.iter().filter(|c| c.fn_ == 0).count() as u64,
        total: confusions.len() as u64,
    }
}
