use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// The PII taxonomy. `EmailUrl` exists for completeness but is inactive:
/// detectors never emit it unless asked for it explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntityLabel {
    Person,
    Company,
    Language,
    Dates,
    AddressCountry,
    AddressState,
    Address,
    IdentificationNumber,
    Groups,
    EmailUrl,
}

impl EntityLabel {
    pub const ALL: [EntityLabel; 10] = [
        EntityLabel::Person,
        EntityLabel::Company,
        EntityLabel::Language,
        EntityLabel::Dates,
        EntityLabel::AddressCountry,
        EntityLabel::AddressState,
        EntityLabel::Address,
        EntityLabel::IdentificationNumber,
        EntityLabel::Groups,
        EntityLabel::EmailUrl,
    ];

    pub const ACTIVE: [EntityLabel; 9] = [
        EntityLabel::Person,
        EntityLabel::Company,
        EntityLabel::Language,
        EntityLabel::Dates,
        EntityLabel::AddressCountry,
        EntityLabel::AddressState,
        EntityLabel::Address,
        EntityLabel::IdentificationNumber,
        EntityLabel::Groups,
    ];

    pub fn is_active(self) -> bool {
        self != EntityLabel::EmailUrl
    }

    /// Canonical wire name: lowercase words separated by spaces.
    pub fn as_str(self) -> &'static str {
        match self {
            EntityLabel::Person => "person",
            EntityLabel::Company => "company",
            EntityLabel::Language => "language",
            EntityLabel::Dates => "dates",
            EntityLabel::AddressCountry => "address country",
            EntityLabel::AddressState => "address state",
            EntityLabel::Address => "address",
            EntityLabel::IdentificationNumber => "identification number",
            EntityLabel::Groups => "groups",
            EntityLabel::EmailUrl => "email URL",
        }
    }

    /// PascalCase form used when rendering placeholders, e.g. `AddressState`.
    pub fn placeholder_name(self) -> &'static str {
        match self {
            EntityLabel::Person => "Person",
            EntityLabel::Company => "Company",
            EntityLabel::Language => "Language",
            EntityLabel::Dates => "Dates",
            EntityLabel::AddressCountry => "AddressCountry",
            EntityLabel::AddressState => "AddressState",
            EntityLabel::Address => "Address",
            EntityLabel::IdentificationNumber => "IdentificationNumber",
            EntityLabel::Groups => "Groups",
            EntityLabel::EmailUrl => "EmailUrl",
        }
    }

    pub fn active() -> impl Iterator<Item = EntityLabel> {
        Self::ACTIVE.into_iter()
    }
}

impl fmt::Display for EntityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown entity label {0:?}")]
pub struct UnknownLabel(pub String);

impl FromStr for EntityLabel {
    type Err = UnknownLabel;

    /// Accepts the canonical names case-insensitively, with `_`/`-` in place
    /// of spaces, plus the plural `languages` used by extraction prompts.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .chars()
            .map(|c| if c == '_' || c == '-' { ' ' } else { c.to_ascii_lowercase() })
            .collect();
        let norm = norm.split_whitespace().collect::<Vec<_>>().join(" ");
        let label = match norm.as_str() {
            "person" => EntityLabel::Person,
            "company" => EntityLabel::Company,
            "language" | "languages" => EntityLabel::Language,
            "dates" | "date" => EntityLabel::Dates,
            "address country" => EntityLabel::AddressCountry,
            "address state" => EntityLabel::AddressState,
            "address" => EntityLabel::Address,
            "identification number" => EntityLabel::IdentificationNumber,
            "groups" | "group" => EntityLabel::Groups,
            "email url" | "emailurl" => EntityLabel::EmailUrl,
            _ => return Err(UnknownLabel(s.to_string())),
        };
        Ok(label)
    }
}

impl Serialize for EntityLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for EntityLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
