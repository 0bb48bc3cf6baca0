//! Word-list and regex detector.
//!
//! A deterministic baseline and test double; it makes no claim of parity
//! with a trained model.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{detect, DetectError, DetectionRequest, Detector};
use crate::label::EntityLabel;
use crate::span::{AnnotationSet, EntitySpan, Source};
use crate::text::CharText;

const DEFAULT_CONFIG: &str = include_str!("../../resources/gazetteer.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternRule {
    pub label: EntityLabel,
    pub regex: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GazetteerConfig {
    #[serde(default)]
    pub lists: BTreeMap<EntityLabel, Vec<String>>,
    #[serde(default)]
    pub patterns: Vec<PatternRule>,
}

#[derive(Debug, thiserror::Error)]
pub enum GazetteerError {
    #[error("gazetteer list for {0} is empty")]
    EmptyList(EntityLabel),
    #[error("pattern {index} for {label} does not compile: {source}")]
    Pattern {
        index: usize,
        label: EntityLabel,
        #[source]
        source: regex::Error,
    },
    #[error("config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl GazetteerConfig {
    /// The bundled lists: Indian states (with abbreviations and misspellings),
    /// countries, languages, cities and localities, groups, facilities.
    pub fn builtin() -> Self {
        toml::from_str(DEFAULT_CONFIG).expect("bundled gazetteer config parses")
    }

    pub fn from_toml(s: &str) -> Result<Self, GazetteerError> {
        Ok(toml::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self, GazetteerError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone)]
struct Matcher {
    label: EntityLabel,
    regex: Regex,
    whole_word: bool,
}

#[derive(Debug, Clone)]
pub struct GazetteerDetector {
    matchers: Vec<Matcher>,
    labels: BTreeSet<EntityLabel>,
}

impl GazetteerDetector {
    pub fn new(cfg: &GazetteerConfig) -> Result<Self, GazetteerError> {
        let mut matchers = Vec::new();
        for (&label, terms) in &cfg.lists {
            let mut terms: Vec<&str> = terms.iter().map(|t| t.trim()).filter(|t| !t.is_empty()).collect();
            if terms.is_empty() {
                return Err(GazetteerError::EmptyList(label));
            }
            // leftmost-first alternation: longest entries must come first
            terms.sort_by(|a, b| b.chars().count().cmp(&a.chars().count()).then(a.cmp(b)));
            terms.dedup();
            let alternation = terms
                .iter()
                .map(|t| {
                    t.split_whitespace()
                        .map(regex::escape)
                        .collect::<Vec<_>>()
                        .join(r"\s+")
                })
                .collect::<Vec<_>>()
                .join("|");
            let regex = Regex::new(&format!("(?i)(?:{alternation})")).map_err(|source| GazetteerError::Pattern {
                index: 0,
                label,
                source,
            })?;
            matchers.push(Matcher {
                label,
                regex,
                whole_word: true,
            });
        }
        for (index, rule) in cfg.patterns.iter().enumerate() {
            let regex = Regex::new(&rule.regex).map_err(|source| GazetteerError::Pattern {
                index,
                label: rule.label,
                source,
            })?;
            matchers.push(Matcher {
                label: rule.label,
                regex,
                whole_word: false,
            });
        }
        let labels = matchers.iter().map(|m| m.label).collect();
        Ok(GazetteerDetector { matchers, labels })
    }

    pub fn builtin() -> Self {
        Self::new(&GazetteerConfig::builtin()).expect("bundled gazetteer config is valid")
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn find_all(m: &Matcher, text: &str, out: &mut Vec<(usize, usize)>) {
    let mut pos = 0;
    while pos <= text.len() {
        let Some(hit) = m.regex.find_at(text, pos) else { break };
        if hit.start() == hit.end() {
            pos = hit.end() + text[hit.end()..].chars().next().map_or(1, char::len_utf8);
            continue;
        }
        let ok = !m.whole_word
            || (!text[..hit.start()].chars().next_back().is_some_and(is_word_char)
                && !text[hit.end()..].chars().next().is_some_and(is_word_char));
        if ok {
            out.push((hit.start(), hit.end()));
            pos = hit.end();
        } else {
            pos = hit.start() + text[hit.start()..].chars().next().map_or(1, char::len_utf8);
        }
    }
}

impl Detector for GazetteerDetector {
    fn name(&self) -> &str {
        "gazetteer"
    }

    fn detect_raw(&self, req: &DetectionRequest) -> Result<Vec<EntitySpan>, DetectError> {
        let text = CharText::new(&req.text);
        let mut spans = Vec::new();
        let mut hits = Vec::new();
        for m in self.matchers.iter().filter(|m| req.labels.contains(&m.label)) {
            hits.clear();
            find_all(m, &req.text, &mut hits);
            spans.extend(hits.iter().map(|&(b0, b1)| {
                EntitySpan::new(text.char_index(b0), text.char_index(b1), m.label)
                    .with_score(1.0)
                    .with_source(Source::Model)
            }));
        }
        Ok(spans)
    }

    fn supported_labels(&self) -> BTreeSet<EntityLabel> {
        EntityLabel::active().collect()
    }
}

impl GazetteerDetector {
    /// Labels this configuration can actually produce.
    pub fn configured_labels(&self) -> &BTreeSet<EntityLabel> {
        &self.labels
    }
}

pub fn deterministic_detect(req: &DetectionRequest, cfg: &GazetteerConfig) -> Result<AnnotationSet, DetectError> {
    let detector = GazetteerDetector::new(cfg).map_err(|e| DetectError::Parameter(e.to_string()))?;
    detect(req, &detector)
}
