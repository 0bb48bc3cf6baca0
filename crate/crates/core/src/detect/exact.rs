//! Tagging extracted strings back into text by exact, case-sensitive match,
//! and parsing of LLM extraction responses.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::label::EntityLabel;
use crate::span::{AnnotationSet, EntitySpan, Source};
use crate::text::CharText;

/// An extracted string that never occurs verbatim in the text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unmatched {
    pub label: EntityLabel,
    pub surface: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactMatchOutcome {
    pub set: AnnotationSet,
    pub unmatched: Vec<Unmatched>,
}

/// Tags every case-sensitive occurrence of every extracted string.
///
/// Occurrences are chosen left to right; at a shared start the longer
/// string wins, and an occurrence overlapping an already chosen one is
/// skipped.
pub fn tag_by_exact_match(text: &str, extraction: &BTreeMap<EntityLabel, Vec<String>>) -> ExactMatchOutcome {
    let chars = CharText::new(text);
    // (char start, char end, label)
    let mut candidates: Vec<(usize, usize, EntityLabel)> = Vec::new();
    let mut unmatched = Vec::new();

    for (&label, surfaces) in extraction {
        let mut seen: Vec<&str> = Vec::new();
        for surface in surfaces {
            if seen.contains(&surface.as_str()) {
                continue;
            }
            seen.push(surface);
            if surface.is_empty() {
                continue;
            }
            let len = surface.chars().count();
            let before = candidates.len();
            let mut from = 0;
            while let Some(off) = text[from..].find(surface.as_str()) {
                let b = from + off;
                let start = chars.char_index(b);
                candidates.push((start, start + len, label));
                // advance one character to also catch overlapping occurrences
                from = b + text[b..].chars().next().map_or(1, char::len_utf8);
            }
            if candidates.len() == before {
                unmatched.push(Unmatched {
                    label,
                    surface: surface.clone(),
                });
            }
        }
    }

    candidates.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));
    let mut spans = Vec::new();
    let mut covered = 0;
    for (start, end, label) in candidates {
        if start < covered {
            continue;
        }
        spans.push(EntitySpan::new(start, end, label).with_source(Source::External));
        covered = end;
    }

    ExactMatchOutcome {
        set: AnnotationSet::new("", Source::External, spans),
        unmatched,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LlmResponseError {
    #[error("no JSON object found in response")]
    NoObject,
    #[error("unknown entity key {0:?} in response")]
    UnknownKey(String),
    #[error("value for {0:?} is not a list of strings")]
    NotStrings(String),
}

/// Extracts the first well-formed JSON object from a response, tolerating
/// surrounding prose and code fences, and reads it with the extraction
/// response schema (`{"person": [...], "address state": [...], ...}`).
pub fn parse_llm_response(response: &str) -> Result<BTreeMap<EntityLabel, Vec<String>>, LlmResponseError> {
    let object = first_json_object(response).ok_or(LlmResponseError::NoObject)?;
    let mut out: BTreeMap<EntityLabel, Vec<String>> = BTreeMap::new();
    for (key, value) in object {
        let label: EntityLabel = key.parse().map_err(|_| LlmResponseError::UnknownKey(key.clone()))?;
        let items = match value {
            Value::Array(items) => items,
            Value::Null => Vec::new(),
            Value::String(s) => vec![Value::String(s)],
            _ => return Err(LlmResponseError::NotStrings(key)),
        };
        let list = out.entry(label).or_default();
        for item in items {
            match item {
                Value::String(s) => list.push(s),
                _ => return Err(LlmResponseError::NotStrings(key)),
            }
        }
    }
    Ok(out)
}

fn first_json_object(s: &str) -> Option<serde_json::Map<String, Value>> {
    for (i, _) in s.match_indices('{') {
        let mut stream = serde_json::Deserializer::from_str(&s[i..]).into_iter::<Value>();
        if let Some(Ok(Value::Object(map))) = stream.next() {
            return Some(map);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use EntityLabel::*;

    fn ex(pairs: &[(EntityLabel, &[&str])]) -> BTreeMap<EntityLabel, Vec<String>> {
        pairs
            .iter()
            .map(|(l, v)| (*l, v.iter().map(|s| s.to_string()).collect()))
            .collect()
    }

    #[test]
    fn single_hit() {
        let out = tag_by_exact_match("Rajiv, 22, m", &ex(&[(Person, &["Rajiv"])]));
        assert_eq!(out.set.spans, vec![EntitySpan::new(0, 5, Person).with_source(Source::External)]);
        assert!(out.unmatched.is_empty());
    }

    #[test]
    fn case_is_respected() {
        let out = tag_by_exact_match("returned to bangalore within", &ex(&[(Address, &["Bangalore"])]));
        assert!(out.set.spans.is_empty());
        assert_eq!(
            out.unmatched,
            vec![Unmatched {
                label: Address,
                surface: "Bangalore".into()
            }]
        );
    }

    #[test]
    fn longest_match_at_shared_start() {
        let text = "discussed with Dr Krishna. Krishna agreed";
        let out = tag_by_exact_match(text, &ex(&[(Person, &["Krishna", "Dr Krishna"])]));
        let spans: Vec<_> = out.set.spans.iter().map(|s| (s.start, s.end)).collect();
        assert_eq!(spans, vec![(15, 25), (27, 34)]);
    }

    #[test]
    fn overlapping_candidates_greedy_left_to_right() {
        let out = tag_by_exact_match("aaa", &ex(&[(Groups, &["aa"])]));
        assert_eq!(out.set.spans.len(), 1);
        assert_eq!((out.set.spans[0].start, out.set.spans[0].end), (0, 2));
    }

    #[test]
    fn parses_response_inside_prose() {
        let resp = "Sure! Here you go:\n```json\n{\"person\": [\"Rajiv\", \"Mrs Rathnamma\"], \"address state\": [], \"languages\": [\"kannada\"], \"dates\": null}\n```";
        let parsed = parse_llm_response(resp).unwrap();
        assert_eq!(parsed[&Person], vec!["Rajiv", "Mrs Rathnamma"]);
        assert_eq!(parsed[&Language], vec!["kannada"]);
        assert!(parsed[&AddressState].is_empty());
    }

    #[test]
    fn response_errors() {
        assert_eq!(parse_llm_response("nothing here"), Err(LlmResponseError::NoObject));
        assert_eq!(parse_llm_response("{bad {\"phone\": []}"), Err(LlmResponseError::UnknownKey("phone".into())));
        assert_eq!(
            parse_llm_response("{\"person\": [1]}"),
            Err(LlmResponseError::NotStrings("person".into()))
        );
    }
}
