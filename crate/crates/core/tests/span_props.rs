use deid_core::text::CharText;
use deid_core::{
    resolve_overlaps, snap_span_to_word_boundaries, validate_annotation_set, AnnotationSet, Document, EntityLabel,
    EntitySpan, Source,
};
use proptest::prelude::*;

fn label() -> impl Strategy<Value = EntityLabel> {
    prop::sample::select(EntityLabel::ACTIVE.to_vec())
}

fn spans(len: usize, max: usize) -> impl Strategy<Value = Vec<EntitySpan>> {
    prop::collection::vec(
        (0..len, 1..12usize, label(), prop::option::of(0.0..=1.0f64)).prop_map(move |(s, l, lab, sc)| {
            let mut sp = EntitySpan::new(s, (s + l).min(len), lab);
            sp.score = sc;
            sp
        }),
        0..max,
    )
}

fn text() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(vec!["Ravi", "Dr", "Blore,", "(Mysuru)", "03-9-22.", " ", "  ", "é", "x"]), 1..30)
        .prop_map(|v| v.join(" "))
}

proptest! {
    #[test]
    fn resolve_is_idempotent_and_same_label_disjoint(sp in spans(60, 12)) {
        let set = AnnotationSet::new("d", Source::Model, sp);
        let once = resolve_overlaps(&set);
        prop_assert_eq!(resolve_overlaps(&once), once.clone());
        for w in once.spans.windows(2) {
            prop_assert!(w[0].start <= w[1].start);
        }
        for (i, a) in once.spans.iter().enumerate() {
            for b in &once.spans[i + 1..] {
                // overlap-free across labels; same-label spans do not even touch
                prop_assert!(!a.overlaps(b));
                if a.label == b.label {
                    prop_assert!(a.end < b.start || b.end < a.start);
                }
            }
        }
    }

    #[test]
    fn resolve_covers_only_input_characters(sp in spans(60, 12)) {
        let set = AnnotationSet::new("d", Source::Model, sp.clone());
        let out = resolve_overlaps(&set);
        for s in &out.spans {
            for i in s.start..s.end {
                prop_assert!(sp.iter().any(|o| o.label == s.label && o.start <= i && i < o.end));
            }
        }
    }

    #[test]
    fn snapping_grows_within_touched_tokens(t in text(), a in 0..200usize, l in 1..10usize) {
        let chars = CharText::new(&t);
        prop_assume!(chars.len() > 1);
        let start = a % (chars.len() - 1);
        let end = (start + l).min(chars.len());
        let doc = Document::new("d", t.clone());
        let span = EntitySpan::new(start, end, EntityLabel::Person).with_score(0.4);
        let snapped = snap_span_to_word_boundaries(&doc, &span);
        prop_assert!(snapped.start <= span.start && span.end <= snapped.end);
        prop_assert_eq!((snapped.label, snapped.score, snapped.source), (span.label, span.score, span.source));
        // growth never passes whitespace
        for i in snapped.start..span.start {
            prop_assert!(!chars.char_at(i).is_whitespace());
        }
        for i in span.end..snapped.end {
            prop_assert!(!chars.char_at(i).is_whitespace());
        }
        prop_assert_eq!(snap_span_to_word_boundaries(&doc, &snapped), snapped);
    }
}

#[test]
fn documented_examples() {
    let d = Document::new("d", "Dr Krishna saw");
    let s = snap_span_to_word_boundaries(&d, &EntitySpan::new(3, 8, EntityLabel::Person));
    assert_eq!((s.start, s.end), (3, 10));

    let d = Document::new("d", "aadhar num: 111111111111.");
    let id = EntitySpan::new(12, 24, EntityLabel::IdentificationNumber);
    assert_eq!(snap_span_to_word_boundaries(&d, &id), id);

    let set = AnnotationSet::new(
        "d",
        Source::Model,
        vec![
            EntitySpan::new(0, 5, EntityLabel::Person).with_score(0.9),
            EntitySpan::new(3, 8, EntityLabel::Company).with_score(0.4),
        ],
    );
    assert_eq!(resolve_overlaps(&set).spans, vec![EntitySpan::new(0, 5, EntityLabel::Person).with_score(0.9)]);

    let d = Document::new("d", "0123456789");
    let v = validate_annotation_set(&d, &AnnotationSet::new("d", Source::Gold, vec![EntitySpan::new(8, 12, EntityLabel::Dates)]));
    assert_eq!(v[0].to_string(), "span 0: end beyond text");
}
