use serde::{Deserialize, Serialize};

use super::store::PlaceholderSource;
use crate::span::{AnnotationSet, Document, EntitySpan};
use crate::text::CharText;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplacementEvent {
    pub doc_id: String,
    pub original: EntitySpan,
    pub surface: String,
    pub placeholder: String,
    pub new_start: usize,
    pub new_end: usize,
}

/// Sorted `(original, new)` character positions for every character outside
/// a replaced span.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OffsetMap(pub Vec<(usize, usize)>);

impl OffsetMap {
    pub fn get(&self, original: usize) -> Option<usize> {
        self.0
            .binary_search_by_key(&original, |&(o, _)| o)
            .ok()
            .map(|i| self.0[i].1)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rewrite {
    pub text: String,
    pub events: Vec<ReplacementEvent>,
    pub offset_map: OffsetMap,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RewriteError {
    #[error("spans {0} and {1} overlap")]
    Overlap(usize, usize),
    #[error("span {index} [{start}, {end}) is outside the text")]
    Range { index: usize, start: usize, end: usize },
    #[error("event {0} does not fit the text it is applied to")]
    EventMismatch(usize),
}

/// Replaces every span's surface with the placeholder handed out by `source`.
pub fn apply_replacements(
    doc: &Document,
    set: &AnnotationSet,
    source: &mut dyn PlaceholderSource,
) -> Result<Rewrite, RewriteError> {
    let text = CharText::new(&doc.text);
    let mut order: Vec<usize> = (0..set.spans.len()).collect();
    order.sort_by_key(|&i| (set.spans[i].start, set.spans[i].end));
    for w in order.windows(2) {
        if set.spans[w[1]].start < set.spans[w[0]].end {
            return Err(RewriteError::Overlap(w[0], w[1]));
        }
    }

    let mut out = String::with_capacity(doc.text.len());
    let mut events = Vec::with_capacity(order.len());
    let mut map = Vec::with_capacity(text.len());
    let mut cursor = 0;
    let mut new_len = 0;
    for &i in &order {
        let span = &set.spans[i];
        let Some(surface) = text.slice(span.start..span.end).filter(|_| span.start < span.end) else {
            return Err(RewriteError::Range {
                index: i,
                start: span.start,
                end: span.end,
            });
        };
        for (k, c) in text.slice(cursor..span.start).unwrap_or("").chars().enumerate() {
            map.push((cursor + k, new_len));
            out.push(c);
            new_len += 1;
        }
        let placeholder = source.assign(surface, span.label).placeholder;
        let plen = placeholder.chars().count();
        out.push_str(&placeholder);
        events.push(ReplacementEvent {
            doc_id: doc.id.clone(),
            original: span.clone(),
            surface: surface.to_string(),
            placeholder,
            new_start: new_len,
            new_end: new_len + plen,
        });
        new_len += plen;
        cursor = span.end;
    }
    for (k, c) in text.slice(cursor..text.len()).unwrap_or("").chars().enumerate() {
        map.push((cursor + k, new_len));
        out.push(c);
        new_len += 1;
    }
    Ok(Rewrite {
        text: out,
        events,
        offset_map: OffsetMap(map),
    })
}

/// Rebuilds the rewritten text from the original and its recorded events.
pub fn replay_events(original: &str, events: &[ReplacementEvent]) -> Result<String, RewriteError> {
    let text = CharText::new(original);
    let mut out = String::with_capacity(original.len());
    let mut cursor = 0;
    for (i, e) in events.iter().enumerate() {
        let surface = text
            .slice(e.original.start..e.original.end)
            .filter(|_| e.original.start >= cursor)
            .ok_or(RewriteError::EventMismatch(i))?;
        if surface != e.surface {
            return Err(RewriteError::EventMismatch(i));
        }
        out.push_str(text.slice(cursor..e.original.start).unwrap_or(""));
        if out.chars().count() != e.new_start {
            return Err(RewriteError::EventMismatch(i));
        }
        out.push_str(&e.placeholder);
        cursor = e.original.end;
    }
    out.push_str(text.slice(cursor..text.len()).unwrap_or(""));
    Ok(out)
}

/// Applying recorded events to already rewritten text leaves it unchanged;
/// fails if a placeholder is not where its event says.
pub fn reapply_events(rewritten: &str, events: &[ReplacementEvent]) -> Result<String, RewriteError> {
    let text = CharText::new(rewritten);
    for (i, e) in events.iter().enumerate() {
        if text.slice(e.new_start..e.new_end) != Some(e.placeholder.as_str()) {
            return Err(RewriteError::EventMismatch(i));
        }
    }
    Ok(rewritten.to_string())
}
