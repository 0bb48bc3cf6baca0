//! Format-preserving surrogates for building shareable test sets.
//!
//! Each label has its own mode: random strings for initials, identifiers and
//! emails; fresh digits for dates; list-drawn names and places with the same
//! word count and case pattern otherwise. Languages and groups are kept.

mod generate;
mod profile;
mod resources;

pub use generate::{
    is_passthrough, project_case, pseudonymize_document, pseudonymize_span, pseudonymize_span_with, DateMode,
    PseudoError, PseudoOptions, PseudoSpan, Pseudonymized,
};
pub use profile::{case_class, char_class, format_profile, CaseClass, CharClass, FormatProfile, WordProfile, HONORIFICS};
pub use resources::{parse_list, ResourceError, Resources, RESOURCE_FILES};
