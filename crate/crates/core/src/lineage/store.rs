use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use super::distance::similarity;
use crate::label::EntityLabel;

pub const STORE_FORMAT_VERSION: u32 = 1;
pub const DEFAULT_FUZZY_THRESHOLD: f64 = 0.85;
pub const DEFAULT_TEMPLATE: &str = "{Label}_{ordinal}";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Document,
    Corpus,
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scope::Document => "document",
            Scope::Corpus => "corpus",
        })
    }
}

impl FromStr for Scope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "document" => Ok(Scope::Document),
            "corpus" => Ok(Scope::Corpus),
            other => Err(format!("unknown scope {other:?} (expected document or corpus)")),
        }
    }
}

/// Trims, collapses internal whitespace to single spaces and lowercases.
pub fn normalize_surface(s: &str) -> String {
    s.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Placeholder rendering. `{Label}` expands to the PascalCase label name
/// (`AddressState`), `{label}` to the wire name and `{ordinal}` to the number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlaceholderTemplate(String);

impl Default for PlaceholderTemplate {
    fn default() -> Self {
        PlaceholderTemplate(DEFAULT_TEMPLATE.to_string())
    }
}

impl PlaceholderTemplate {
    pub fn new(template: impl Into<String>) -> Self {
        PlaceholderTemplate(template.into())
    }

    pub fn render(&self, label: EntityLabel, ordinal: u32) -> String {
        self.0
            .replace("{Label}", label.placeholder_name())
            .replace("{label}", label.as_str())
            .replace("{ordinal}", &ordinal.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineageEntry {
    pub surface: String,
    pub label: EntityLabel,
    pub ordinal: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatchKind {
    Exact,
    Fuzzy { matched: String, similarity: f64 },
    New,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub placeholder: String,
    pub label: EntityLabel,
    pub ordinal: u32,
    pub kind: MatchKind,
}

/// Scoped mapping from (normalized surface, label) to a placeholder ordinal.
///
/// Ordinals are dense from 1 per label and never shared by two keys. A
/// surface with no exact key reuses the placeholder of the most similar
/// same-label key at or above `fuzzy_threshold` (earliest key on ties)
/// without being recorded itself.
#[derive(Debug, Clone)]
pub struct LineageStore {
    scope: Scope,
    fuzzy_threshold: f64,
    inherit_labels: BTreeSet<EntityLabel>,
    template: PlaceholderTemplate,
    entries: Vec<LineageEntry>,
    index: HashMap<(String, EntityLabel), usize>,
    counters: BTreeMap<EntityLabel, u32>,
}

impl PartialEq for LineageStore {
    fn eq(&self, other: &Self) -> bool {
        self.scope == other.scope
            && self.fuzzy_threshold == other.fuzzy_threshold
            && self.inherit_labels == other.inherit_labels
            && self.template == other.template
            && self.entries == other.entries
            && self.counters == other.counters
    }
}

impl LineageStore {
    pub fn new(scope: Scope) -> Self {
        LineageStore {
            scope,
            fuzzy_threshold: DEFAULT_FUZZY_THRESHOLD,
            inherit_labels: EntityLabel::active().collect(),
            template: PlaceholderTemplate::default(),
            entries: Vec::new(),
            index: HashMap::new(),
            counters: BTreeMap::new(),
        }
    }

    pub fn with_fuzzy_threshold(mut self, t: f64) -> Self {
        self.fuzzy_threshold = t;
        self
    }

    pub fn with_inherit_labels(mut self, labels: impl IntoIterator<Item = EntityLabel>) -> Self {
        self.inherit_labels = labels.into_iter().collect();
        self
    }

    pub fn with_template(mut self, template: PlaceholderTemplate) -> Self {
        self.template = template;
        self
    }

    pub fn scope(&self) -> Scope {
        self.scope
    }

    pub fn fuzzy_threshold(&self) -> f64 {
        self.fuzzy_threshold
    }

    pub fn inherit_labels(&self) -> &BTreeSet<EntityLabel> {
        &self.inherit_labels
    }

    pub fn template(&self) -> &PlaceholderTemplate {
        &self.template
    }

    pub fn entries(&self) -> &[LineageEntry] {
        &self.entries
    }

    pub fn counters(&self) -> &BTreeMap<EntityLabel, u32> {
        &self.counters
    }

    pub fn counter(&self, label: EntityLabel) -> u32 {
        self.counters.get(&label).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn render(&self, label: EntityLabel, ordinal: u32) -> String {
        self.template.render(label, ordinal)
    }

    /// Resolves a surface without recording anything.
    pub fn lookup(&self, surface: &str, label: EntityLabel) -> Option<Assignment> {
        let key = normalize_surface(surface);
        if let Some(&i) = self.index.get(&(key.clone(), label)) {
            let e = &self.entries[i];
            return Some(self.assignment(e.label, e.ordinal, MatchKind::Exact));
        }
        let mut best: Option<(f64, &LineageEntry)> = None;
        for e in self.entries.iter().filter(|e| e.label == label) {
            let sim = similarity(&key, &e.surface);
            if sim >= self.fuzzy_threshold && best.is_none_or(|(b, _)| sim > b) {
                best = Some((sim, e));
            }
        }
        best.map(|(sim, e)| {
            self.assignment(
                label,
                e.ordinal,
                MatchKind::Fuzzy {
                    matched: e.surface.clone(),
                    similarity: sim,
                },
            )
        })
    }

    pub fn get_or_assign(&mut self, surface: &str, label: EntityLabel) -> Assignment {
        if let Some(a) = self.lookup(surface, label) {
            return a;
        }
        let key = normalize_surface(surface);
        let counter = self.counters.entry(label).or_insert(0);
        *counter += 1;
        let ordinal = *counter;
        self.index.insert((key.clone(), label), self.entries.len());
        self.entries.push(LineageEntry {
            surface: key,
            label,
            ordinal,
        });
        self.assignment(label, ordinal, MatchKind::New)
    }

    /// Shorthand returning only the placeholder text.
    pub fn get_or_assign_placeholder(&mut self, surface: &str, label: EntityLabel) -> String {
        self.get_or_assign(surface, label).placeholder
    }

    fn assignment(&self, label: EntityLabel, ordinal: u32, kind: MatchKind) -> Assignment {
        Assignment {
            placeholder: self.render(label, ordinal),
            label,
            ordinal,
            kind,
        }
    }

    /// A document-scoped store seeded with this store's entries and counters
    /// for the inherited labels only.
    pub fn derive_document_store(&self) -> LineageStore {
        let mut out = LineageStore::new(Scope::Document)
            .with_fuzzy_threshold(self.fuzzy_threshold)
            .with_inherit_labels(self.inherit_labels.iter().copied())
            .with_template(self.template.clone());
        for e in self.entries.iter().filter(|e| self.inherit_labels.contains(&e.label)) {
            out.insert_entry(e.clone());
        }
        for (&l, &c) in self.counters.iter().filter(|(l, _)| self.inherit_labels.contains(l)) {
            out.counters.insert(l, c);
        }
        out
    }

    fn insert_entry(&mut self, e: LineageEntry) {
        self.index.insert((e.surface.clone(), e.label), self.entries.len());
        self.entries.push(e);
    }

    /// Replays an assignment recorded elsewhere (e.g. a journal). Entries
    /// already present are ignored; counters only move forward.
    pub fn apply_entry(&mut self, e: LineageEntry) -> Result<(), StoreFormatError> {
        if let Some(&i) = self.index.get(&(e.surface.clone(), e.label)) {
            if self.entries[i].ordinal != e.ordinal {
                return Err(StoreFormatError::Conflict(e.surface, e.label));
            }
            return Ok(());
        }
        let next = self.counter(e.label) + 1;
        if e.ordinal != next {
            return Err(StoreFormatError::NotDense(e.label));
        }
        self.counters.insert(e.label, next);
        self.insert_entry(e);
        Ok(())
    }

    pub fn export(&self) -> StoreRecord {
        StoreRecord {
            version: STORE_FORMAT_VERSION,
            scope: self.scope,
            fuzzy_threshold: self.fuzzy_threshold,
            inherit_labels: self.inherit_labels.iter().copied().collect(),
            template: Some(self.template.as_str().to_string()),
            counters: self.counters.clone(),
            entries: self.entries.clone(),
        }
    }

    pub fn import(record: StoreRecord) -> Result<Self, StoreFormatError> {
        if record.version != STORE_FORMAT_VERSION {
            return Err(StoreFormatError::Version(record.version));
        }
        if !(0.0..=1.0).contains(&record.fuzzy_threshold) {
            return Err(StoreFormatError::Threshold(record.fuzzy_threshold));
        }
        let mut store = LineageStore::new(record.scope)
            .with_fuzzy_threshold(record.fuzzy_threshold)
            .with_inherit_labels(record.inherit_labels);
        if let Some(t) = record.template {
            store.template = PlaceholderTemplate::new(t);
        }
        let mut seen: BTreeMap<EntityLabel, BTreeSet<u32>> = BTreeMap::new();
        for e in record.entries {
            if store.index.contains_key(&(e.surface.clone(), e.label)) {
                return Err(StoreFormatError::Conflict(e.surface, e.label));
            }
            if !seen.entry(e.label).or_default().insert(e.ordinal) {
                return Err(StoreFormatError::DuplicateOrdinal(e.label, e.ordinal));
            }
            store.insert_entry(e);
        }
        for (label, ordinals) in &seen {
            let counter = record.counters.get(label).copied().unwrap_or(0);
            if ordinals.len() as u32 != counter || ordinals.iter().copied().ne(1..=counter) {
                return Err(StoreFormatError::NotDense(*label));
            }
        }
        if let Some((&label, _)) = record.counters.iter().find(|(l, &c)| c > 0 && !seen.contains_key(l)) {
            return Err(StoreFormatError::NotDense(label));
        }
        store.counters = record.counters;
        Ok(store)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.export()).expect("store record serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, StoreFormatError> {
        let record: StoreRecord = serde_json::from_str(s).map_err(|e| StoreFormatError::Schema(e.to_string()))?;
        Self::import(record)
    }
}

/// Portable, versioned form of a [`LineageStore`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreRecord {
    pub version: u32,
    pub scope: Scope,
    pub fuzzy_threshold: f64,
    pub inherit_labels: Vec<EntityLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<String>,
    pub counters: BTreeMap<EntityLabel, u32>,
    pub entries: Vec<LineageEntry>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StoreFormatError {
    #[error("store record: {0}")]
    Schema(String),
    #[error("unsupported store version {0}")]
    Version(u32),
    #[error("fuzzy threshold {0} outside [0, 1]")]
    Threshold(f64),
    #[error("surface {0:?} ({1}) recorded twice with different ordinals")]
    Conflict(String, EntityLabel),
    #[error("ordinal {1} for {0} used twice")]
    DuplicateOrdinal(EntityLabel, u32),
    #[error("ordinals for {0} are not dense from 1 up to the counter")]
    NotDense(EntityLabel),
}

/// Anything that hands out placeholders for (surface, label) pairs.
pub trait PlaceholderSource {
    fn assign(&mut self, surface: &str, label: EntityLabel) -> Assignment;
}

impl PlaceholderSource for LineageStore {
    fn assign(&mut self, surface: &str, label: EntityLabel) -> Assignment {
        self.get_or_assign(surface, label)
    }
}

/// A store shared between threads; each get-or-assign runs under one lock,
/// so concurrent callers never mint two ordinals for one key.
#[derive(Debug, Clone)]
pub struct SharedLineageStore(Arc<Mutex<LineageStore>>);

impl SharedLineageStore {
    pub fn new(store: LineageStore) -> Self {
        SharedLineageStore(Arc::new(Mutex::new(store)))
    }

    pub fn get_or_assign(&self, surface: &str, label: EntityLabel) -> Assignment {
        self.0.lock().get_or_assign(surface, label)
    }

    pub fn snapshot(&self) -> LineageStore {
        self.0.lock().clone()
    }

    pub fn replace(&self, store: LineageStore) {
        *self.0.lock() = store;
    }

    pub fn with<R>(&self, f: impl FnOnce(&mut LineageStore) -> R) -> R {
        f(&mut self.0.lock())
    }
}

impl PlaceholderSource for &SharedLineageStore {
    fn assign(&mut self, surface: &str, label: EntityLabel) -> Assignment {
        self.get_or_assign(surface, label)
    }
}

/// Corpus-scope replacement for one document: inherited labels resolve
/// against the shared corpus store, the rest against a fresh per-document
/// store. Newly minted corpus entries are collected for journaling.
pub struct CorpusSession<'a> {
    corpus: &'a SharedLineageStore,
    local: LineageStore,
    inherit: BTreeSet<EntityLabel>,
    minted: Vec<LineageEntry>,
}

impl<'a> CorpusSession<'a> {
    pub fn new(corpus: &'a SharedLineageStore) -> Self {
        let (local, inherit) = corpus.with(|s| {
            (
                LineageStore::new(Scope::Document)
                    .with_fuzzy_threshold(s.fuzzy_threshold)
                    .with_template(s.template.clone()),
                s.inherit_labels.clone(),
            )
        });
        CorpusSession {
            corpus,
            local,
            inherit,
            minted: Vec::new(),
        }
    }

    pub fn minted(&self) -> &[LineageEntry] {
        &self.minted
    }

    pub fn into_minted(self) -> Vec<LineageEntry> {
        self.minted
    }
}

impl PlaceholderSource for CorpusSession<'_> {
    fn assign(&mut self, surface: &str, label: EntityLabel) -> Assignment {
        if !self.inherit.contains(&label) {
            return self.local.get_or_assign(surface, label);
        }
        let a = self.corpus.get_or_assign(surface, label);
        if a.kind == MatchKind::New {
            self.minted.push(LineageEntry {
                surface: normalize_surface(surface),
                label,
                ordinal: a.ordinal,
            });
        }
        a
    }
}
