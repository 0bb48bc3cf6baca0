use std::ops::{Add, AddAssign, Range};

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::label::EntityLabel;
use crate::span::AnnotationSet;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CharConfusion {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl CharConfusion {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        CharConfusion { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn gold_positive(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn pred_positive(&self) -> u64 {
        self.tp + self.fp
    }

    pub fn gold_negative(&self) -> u64 {
        self.fp + self.tn
    }
}

impl Add for CharConfusion {
    type Output = CharConfusion;

    fn add(self, o: CharConfusion) -> CharConfusion {
        CharConfusion::new(self.tp + o.tp, self.fp + o.fp, self.fn_ + o.fn_, self.tn + o.tn)
    }
}

impl AddAssign for CharConfusion {
    fn add_assign(&mut self, o: CharConfusion) {
        *self = *self + o;
    }
}

impl std::iter::Sum for CharConfusion {
    fn sum<I: Iterator<Item = CharConfusion>>(iter: I) -> Self {
        iter.fold(CharConfusion::default(), Add::add)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LabelFilter {
    /// Any gold span against any predicted span.
    Overall,
    Label(EntityLabel),
}

impl LabelFilter {
    pub fn admits(self, label: EntityLabel) -> bool {
        match self {
            LabelFilter::Overall => true,
            LabelFilter::Label(l) => l == label,
        }
    }
}

/// Sorted, disjoint, non-empty cover of the given intervals.
pub(crate) fn union(ranges: impl IntoIterator<Item = Range<usize>>) -> Vec<Range<usize>> {
    let mut v: Vec<Range<usize>> = ranges.into_iter().filter(|r| r.start < r.end).collect();
    v.sort_by_key(|r| (r.start, r.end));
    let mut out: Vec<Range<usize>> = Vec::with_capacity(v.len());
    for r in v {
        match out.last_mut() {
            Some(last) if r.start <= last.end => last.end = last.end.max(r.end),
            _ => out.push(r),
        }
    }
    out
}

/// Whether any interval of a sorted disjoint cover intersects `r`.
pub(crate) fn touches(cover: &[Range<usize>], r: &Range<usize>) -> bool {
    let i = cover.partition_point(|c| c.end <= r.start);
    cover.get(i).is_some_and(|c| c.start < r.end)
}

fn covered_ranges(
    set: &AnnotationSet,
    filter: LabelFilter,
    doc_len: usize,
) -> Result<Vec<Range<usize>>, EvalError> {
    let mut out = Vec::new();
    for s in set.spans.iter().filter(|s| filter.admits(s.label)) {
        if s.start > s.end || s.end > doc_len {
            return Err(EvalError::Range {
                doc_id: set.doc_id.clone(),
                start: s.start,
                end: s.end,
                len: doc_len,
            });
        }
        out.push(s.start..s.end);
    }
    Ok(union(out))
}

/// Per-character confusion of `pred` against `gold` over `[0, doc_len)`.
pub fn char_confusion(
    doc_len: usize,
    gold: &AnnotationSet,
    pred: &AnnotationSet,
    filter: LabelFilter,
) -> Result<CharConfusion, EvalError> {
    char_confusion_masked(doc_len, gold, pred, filter, &[])
}

/// As [`char_confusion`], but characters under `excluded` are not counted at
/// all unless a retained gold span covers them.
pub fn char_confusion_masked(
    doc_len: usize,
    gold: &AnnotationSet,
    pred: &AnnotationSet,
    filter: LabelFilter,
    excluded: &[Range<usize>],
) -> Result<CharConfusion, EvalError> {
    let g = covered_ranges(gold, filter, doc_len)?;
    let p = covered_ranges(pred, filter, doc_len)?;
    // exclusion never hides a character any retained gold span claims
    let all_gold = covered_ranges(gold, LabelFilter::Overall, doc_len)?;
    let x = union(excluded.iter().map(|r| r.start.min(doc_len)..r.end.min(doc_len)));

    let mut cuts: Vec<usize> = [0, doc_len]
        .into_iter()
        .chain([&g, &p, &x, &all_gold].into_iter().flat_map(|c| c.iter().flat_map(|r| [r.start, r.end])))
        .collect();
    cuts.sort_unstable();
    cuts.dedup();

    let mut cursors = [0usize; 4];
    let covers = [&g, &p, &x, &all_gold];
    let mut c = CharConfusion::default();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut inside = [false; 4];
        for k in 0..4 {
            let cover = covers[k];
            while cursors[k] < cover.len() && cover[cursors[k]].end <= a {
                cursors[k] += 1;
            }
            inside[k] = cursors[k] < cover.len() && cover[cursors[k]].start <= a;
        }
        let [in_g, in_p, in_x, in_any_gold] = inside;
        let n = (b - a) as u64;
        if in_x && !in_any_gold {
            continue;
        }
        match (in_g, in_p) {
            (true, true) => c.tp += n,
            (false, true) => c.fp += n,
            (true, false) => c.fn_ += n,
            (false, false) => c.tn += n,
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::span::{EntitySpan, Source};
    use EntityLabel::*;

    fn set(spans: Vec<EntitySpan>) -> AnnotationSet {
        AnnotationSet::new("d", Source::Gold, spans)
    }

    #[test]
    fn examples() {
        let gold = set(vec![EntitySpan::new(0, 5, Person)]);
        let pred = set(vec![EntitySpan::new(3, 8, Person)]);
        assert_eq!(char_confusion(20, &gold, &pred, LabelFilter::Overall).unwrap(), CharConfusion::new(2, 3, 3, 12));
        assert_eq!(char_confusion(20, &gold, &gold, LabelFilter::Overall).unwrap(), CharConfusion::new(5, 0, 0, 15));
        assert_eq!(
            char_confusion(20, &gold, &set(vec![]), LabelFilter::Label(Person)).unwrap(),
            CharConfusion::new(0, 0, 5, 15)
        );
    }

    #[test]
    fn label_filter_ignores_other_labels() {
        let gold = set(vec![EntitySpan::new(0, 5, Person)]);
        let pred = set(vec![EntitySpan::new(0, 5, Company)]);
        assert_eq!(char_confusion(10, &gold, &pred, LabelFilter::Label(Person)).unwrap(), CharConfusion::new(0, 0, 5, 5));
        assert_eq!(char_confusion(10, &gold, &pred, LabelFilter::Label(Company)).unwrap(), CharConfusion::new(0, 5, 0, 5));
        assert_eq!(char_confusion(10, &gold, &pred, LabelFilter::Overall).unwrap(), CharConfusion::new(5, 0, 0, 5));
    }

    #[test]
    fn exclusion_removes_characters() {
        let gold = set(vec![EntitySpan::new(0, 5, Person)]);
        let pred = set(vec![EntitySpan::new(6, 10, Language)]);
        let c = char_confusion_masked(12, &gold, &pred, LabelFilter::Overall, std::slice::from_ref(&(6..10))).unwrap();
        assert_eq!(c, CharConfusion::new(0, 0, 5, 3));
    }

    #[test]
    fn out_of_range_is_error() {
        let gold = set(vec![EntitySpan::new(8, 12, Dates)]);
        assert!(matches!(
            char_confusion(10, &gold, &set(vec![]), LabelFilter::Overall),
            Err(EvalError::Range { .. })
        ));
    }

    #[test]
    fn union_and_touches() {
        let u = union([5..7, 0..2, 1..3, 7..8, 9..9]);
        assert_eq!(u, vec![0..3, 5..8]);
        assert!(touches(&u, &(2..4)));
        assert!(!touches(&u, &(3..5)));
        assert!(touches(&u, &(7..20)));
    }
}
