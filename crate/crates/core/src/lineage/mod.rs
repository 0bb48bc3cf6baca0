//! Placeholder lineage: stable `Label_n` identities per document or corpus,
//! and the text rewrite that applies them.

mod distance;
mod rewrite;
mod store;

pub use distance::{damerau_levenshtein, similarity};
pub use rewrite::{apply_replacements, reapply_events, replay_events, OffsetMap, ReplacementEvent, Rewrite, RewriteError};
pub use store::{
    normalize_surface, Assignment, CorpusSession, LineageEntry, LineageStore, MatchKind, PlaceholderSource,
    PlaceholderTemplate, Scope, SharedLineageStore, StoreFormatError, StoreRecord, DEFAULT_FUZZY_THRESHOLD,
    DEFAULT_TEMPLATE, STORE_FORMAT_VERSION,
};
