use deid_core::chunker::{chunk_annotations, reconstruct_text};
use deid_core::text::CharText;
use deid_core::{chunk_document, merge_chunk_detections, AnnotationSet, ChunkParams, Document, EntityLabel, EntitySpan, Source};
use proptest::prelude::*;

fn doc_with_words(words: &[String], lead: &str, seps: &[&str]) -> Document {
    let mut t = String::from(lead);
    for (i, w) in words.iter().enumerate() {
        t.push_str(w);
        t.push_str(seps[i % seps.len()]);
    }
    Document::new("d", t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn windows_tile_and_overlap(n in 0..400usize, max in 5..40usize, ov in 0..10usize, lead in 0..3usize) {
        prop_assume!(max > 2 * ov);
        let params = ChunkParams::new(max, ov).unwrap();
        let words: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
        let doc = doc_with_words(&words, &" \n"[..lead.min(2)], &[" ", "  ", "\n"]);
        let chunks = chunk_document(&doc, params).unwrap();
        prop_assert_eq!(reconstruct_text(&chunks).unwrap(), doc.text.clone());
        for c in &chunks {
            prop_assert!(c.word_count() <= max);
            let t = CharText::new(&doc.text);
            prop_assert_eq!(t.slice(c.char_range()), Some(c.text.as_str()));
        }
        for w in chunks.windows(2) {
            prop_assert_eq!(w[0].word_range.end - w[1].word_range.start, ov);
        }
        if n > 0 {
            prop_assert_eq!(chunks.last().unwrap().word_range.end, n);
        }
    }

    #[test]
    fn per_chunk_detections_merge_back(n in 1..300usize, picks in prop::collection::vec((0..300usize, 1..3usize), 0..12)) {
        let params = ChunkParams::new(20, 3).unwrap();
        let words: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
        let doc = doc_with_words(&words, "", &[" "]);
        let t = CharText::new(&doc.text);
        let ranges = t.words();
        let mut gold = Vec::new();
        let mut next_free = 0;
        for (w, len) in picks {
            let w = w % n;
            let last = (w + len - 1).min(n - 1);
            // leave a gap so distinct gold spans never touch
            if w < next_free {
                continue;
            }
            gold.push(EntitySpan::new(ranges[w].start, ranges[last].end, EntityLabel::Person));
            next_free = last + 2;
        }
        let set = AnnotationSet::new("d", Source::Model, gold.clone());
        let chunks = chunk_document(&doc, params).unwrap();
        let (per_chunk, _) = chunk_annotations(&chunks, &set);
        let pairs: Vec<_> = chunks.into_iter().zip(per_chunk).collect();
        let merged = merge_chunk_detections(&doc, &pairs).unwrap();
        prop_assert_eq!(merged.set.spans, gold);
    }
}

#[test]
fn whitespace_only_document_round_trips() {
    let doc = Document::new("d", "   \n ");
    let chunks = chunk_document(&doc, ChunkParams::default()).unwrap();
    assert_eq!(chunks.len(), 1);
    assert_eq!(reconstruct_text(&chunks).unwrap(), doc.text);
    assert!(chunk_document(&Document::new("d", ""), ChunkParams::default()).unwrap().is_empty());
}

#[test]
fn parameter_validation() {
    assert!(ChunkParams::new(50, 25).is_err());
    assert!(ChunkParams::new(0, 0).is_err());
    assert_eq!(ChunkParams::new(4000, 25).unwrap().stride(), 3975);
}
