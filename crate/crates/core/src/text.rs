//! Character-offset helpers.
//!
//! Every offset exchanged by this crate counts Unicode scalar values, while
//! Rust strings are indexed by byte. [`CharText`] keeps the mapping between
//! the two so that slicing by character range stays O(1).

use std::ops::Range;

use unicode_general_category::{get_general_category, GeneralCategory};

#[derive(Debug, Clone)]
pub struct CharText<'a> {
    text: &'a str,
    // byte offset of every char, plus text.len() as a sentinel
    offsets: Vec<usize>,
}

impl<'a> CharText<'a> {
    pub fn new(text: &'a str) -> Self {
        let mut offsets: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        offsets.push(text.len());
        CharText { text, offsets }
    }

    pub fn as_str(&self) -> &'a str {
        self.text
    }

    /// Number of characters.
    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn byte_offset(&self, char_idx: usize) -> usize {
        self.offsets[char_idx]
    }

    /// Character index of a byte offset that falls on a char boundary.
    pub fn char_index(&self, byte: usize) -> usize {
        match self.offsets.binary_search(&byte) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        }
    }

    pub fn char_at(&self, idx: usize) -> char {
        self.text[self.offsets[idx]..]
            .chars()
            .next()
            .expect("char index in range")
    }

    /// Slice by character range; `None` when the range is out of bounds or reversed.
    pub fn slice(&self, range: Range<usize>) -> Option<&'a str> {
        if range.start > range.end || range.end > self.len() {
            return None;
        }
        Some(&self.text[self.offsets[range.start]..self.offsets[range.end]])
    }

    /// Whitespace-delimited tokens as character ranges.
    pub fn words(&self) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = None;
        for (i, c) in self.text.chars().enumerate() {
            match (c.is_whitespace(), start) {
                (false, None) => start = Some(i),
                (true, Some(s)) => {
                    out.push(s..i);
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push(s..self.len());
        }
        out
    }

    /// The whitespace-delimited token containing `idx`, if `idx` is not whitespace.
    pub fn token_at(&self, idx: usize) -> Option<Range<usize>> {
        if idx >= self.len() || self.char_at(idx).is_whitespace() {
            return None;
        }
        let mut start = idx;
        while start > 0 && !self.char_at(start - 1).is_whitespace() {
            start -= 1;
        }
        let mut end = idx + 1;
        while end < self.len() && !self.char_at(end).is_whitespace() {
            end += 1;
        }
        Some(start..end)
    }

    /// A token with leading and trailing punctuation/symbols removed.
    /// Returns an empty range at the token start when nothing but punctuation remains.
    pub fn word_core(&self, token: Range<usize>) -> Range<usize> {
        let mut start = token.start;
        let mut end = token.end;
        while start < end && is_punct_or_symbol(self.char_at(start)) {
            start += 1;
        }
        while end > start && is_punct_or_symbol(self.char_at(end - 1)) {
            end -= 1;
        }
        if start == end {
            token.start..token.start
        } else {
            start..end
        }
    }
}

/// Unicode general categories P* and S*.
pub fn is_punct_or_symbol(c: char) -> bool {
    use GeneralCategory::*;
    matches!(
        get_general_category(c),
        ConnectorPunctuation
            | DashPunctuation
            | OpenPunctuation
            | ClosePunctuation
            | InitialPunctuation
            | FinalPunctuation
            | OtherPunctuation
            | MathSymbol
            | CurrencySymbol
            | ModifierSymbol
            | OtherSymbol
    )
}

pub fn char_len(s: &str) -> usize {
    s.chars().count()
}
