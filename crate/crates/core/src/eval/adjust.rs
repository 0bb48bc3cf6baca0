use std::collections::BTreeSet;
use std::ops::Range;

use crate::label::EntityLabel;
use crate::span::AnnotationSet;

use super::confusion::union;

#[derive(Debug, Clone, PartialEq)]
pub struct Adjusted {
    pub gold: AnnotationSet,
    pub pred: AnnotationSet,
    /// Characters of removed gold spans; left out of FP/TN accounting.
    pub excluded: Vec<Range<usize>>,
}

/// Restricts scoring to the labels a solution can produce: gold spans of
/// other labels are removed and their characters excluded, predictions of
/// other labels are dropped.
pub fn adjust_for_unsupported(gold: &AnnotationSet, pred: &AnnotationSet, supported: &BTreeSet<EntityLabel>) -> Adjusted {
    let (kept, removed): (Vec<_>, Vec<_>) = gold.spans.iter().cloned().partition(|s| supported.contains(&s.label));
    Adjusted {
        gold: AnnotationSet::new(gold.doc_id.clone(), gold.origin, kept),
        pred: AnnotationSet::new(
            pred.doc_id.clone(),
            pred.origin,
            pred.spans.iter().filter(|s| supported.contains(&s.label)).cloned().collect(),
        ),
        excluded: union(removed.iter().map(|s| s.start..s.end)),
    }
}

/// Re-labels predictions of a coarse external category (`mapped`) with the
/// family member of the gold span they overlap most, so that e.g. a
/// `LOCATION` hit on a gold state counts for `address state`.
pub fn refine_label_family(
    gold: &AnnotationSet,
    pred: &AnnotationSet,
    mapped: EntityLabel,
    family: &BTreeSet<EntityLabel>,
) -> AnnotationSet {
    let mut out = pred.clone();
    for p in out.spans.iter_mut().filter(|p| p.label == mapped) {
        let best = gold
            .spans
            .iter()
            .filter(|g| family.contains(&g.label))
            .map(|g| (p.end.min(g.end).saturating_sub(p.start.max(g.start)), g))
            .filter(|(ov, _)| *ov > 0)
            .max_by(|(a, ga), (b, gb)| a.cmp(b).then(gb.start.cmp(&ga.start)));
        if let Some((_, g)) = best {
            p.label = g.label;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::span::{EntitySpan, Source};
    use EntityLabel::*;

    #[test]
    fn only_language_gold_under_presidio_is_emptied() {
        let gold = AnnotationSet::new("d", Source::Gold, vec![EntitySpan::new(0, 7, Language), EntitySpan::new(10, 16, Language)]);
        let pred = AnnotationSet::new("d", Source::External, vec![EntitySpan::new(0, 7, Person)]);
        let supported = EntityLabel::active().filter(|l| *l != Language).collect();
        let a = adjust_for_unsupported(&gold, &pred, &supported);
        assert!(a.gold.is_empty());
        assert_eq!(a.pred, pred);
        assert_eq!(a.excluded, vec![0..7, 10..16]);
    }

    #[test]
    fn all_supported_is_identity() {
        let gold = AnnotationSet::new("d", Source::Gold, vec![EntitySpan::new(0, 7, Groups)]);
        let pred = AnnotationSet::new("d", Source::Model, vec![EntitySpan::new(3, 9, Dates)]);
        let a = adjust_for_unsupported(&gold, &pred, &EntityLabel::active().collect());
        assert_eq!((a.gold, a.pred), (gold, pred));
        assert!(a.excluded.is_empty());
    }

    #[test]
    fn family_refinement() {
        let gold = AnnotationSet::new(
            "d",
            Source::Gold,
            vec![EntitySpan::new(0, 9, AddressState), EntitySpan::new(20, 25, Address)],
        );
        let pred = AnnotationSet::new(
            "d",
            Source::External,
            vec![EntitySpan::new(0, 9, Address), EntitySpan::new(20, 25, Address), EntitySpan::new(30, 33, Address)],
        );
        let family = [Address, AddressState, AddressCountry].into_iter().collect();
        let r = refine_label_family(&gold, &pred, Address, &family);
        let labels: Vec<_> = r.spans.iter().map(|s| s.label).collect();
        assert_eq!(labels, vec![AddressState, Address, Address]);
    }
}
