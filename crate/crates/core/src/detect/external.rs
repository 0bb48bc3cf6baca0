//! Category mappings from third-party NER/PII services onto the study labels.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::label::EntityLabel;
use EntityLabel::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    AzureNer,
    Presidio,
    Native,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::AzureNer => "azure_ner",
            Scheme::Presidio => "presidio",
            Scheme::Native => "native",
        }
    }

    pub fn label_map(self) -> Option<ExternalLabelMap> {
        match self {
            Scheme::AzureNer => Some(ExternalLabelMap::azure_ner()),
            Scheme::Presidio => Some(ExternalLabelMap::presidio()),
            Scheme::Native => None,
        }
    }

    /// Active labels the scheme can be scored on.
    pub fn supported_labels(self) -> BTreeSet<EntityLabel> {
        match self.label_map() {
            Some(m) => m.supported_labels(),
            None => EntityLabel::active().collect(),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "azure_ner" | "azure" => Ok(Scheme::AzureNer),
            "presidio" => Ok(Scheme::Presidio),
            "native" | "gliner" => Ok(Scheme::Native),
            other => Err(format!("unknown scheme {other:?} (expected azure_ner, presidio or native)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{scheme}: no mapping for category {category:?} / subcategory {subcategory:?}")]
pub struct MappingError {
    pub scheme: Scheme,
    pub category: String,
    pub subcategory: String,
}

// Subcategory `None` is the wildcard row ("All").
type Key = (String, Option<String>);

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalLabelMap {
    pub scheme: Scheme,
    entries: BTreeMap<Key, Option<EntityLabel>>,
    unsupported: BTreeSet<EntityLabel>,
    /// A coarse external category that stands for several study labels;
    /// a prediction is credited with whichever family member the gold says.
    family: Option<(EntityLabel, BTreeSet<EntityLabel>)>,
}

fn key(category: &str, subcategory: Option<&str>) -> Key {
    (category.trim().to_ascii_lowercase(), subcategory.map(|s| s.trim().to_ascii_lowercase()))
}

impl ExternalLabelMap {
    /// Azure Text Analytics NER categories. Categories with no study
    /// counterpart map to `None`; identification numbers, languages and
    /// groups have no Azure category at all.
    pub fn azure_ner() -> Self {
        let mut entries = BTreeMap::new();
        let rows: &[(&str, Option<&str>, Option<EntityLabel>)] = &[
            ("Address", None, Some(Address)),
            ("Location", Some("City"), Some(Address)),
            ("Location", Some("Structural"), Some(Address)),
            ("Location", Some("Geographical"), Some(Address)),
            ("Location", Some("Location"), Some(Address)),
            ("Location", Some(""), Some(Address)),
            ("Location", Some("State"), Some(AddressState)),
            ("Location", Some("CountryRegion"), Some(AddressCountry)),
            ("Location", Some("Continent"), Some(AddressCountry)),
            ("Location", Some("GPE"), Some(AddressCountry)),
            ("DateTime", Some("Date"), Some(Dates)),
            ("DateTime", Some("DateRange"), Some(Dates)),
            ("DateTime", Some("DateTime"), Some(Dates)),
            ("DateTime", Some("DateTimeRange"), Some(Dates)),
            ("Organization", None, Some(Company)),
            ("Person", None, Some(Person)),
            // outside the study taxonomy
            ("DateTime", Some("Time"), None),
            ("DateTime", Some("TimeRange"), None),
            ("DateTime", Some("Duration"), None),
            ("DateTime", Some("Set"), None),
            ("DateTime", Some(""), None),
            ("PersonType", None, None),
            ("Event", None, None),
            ("Product", None, None),
            ("Skill", None, None),
            ("PhoneNumber", None, None),
            ("Phone Number", None, None),
            ("Email", None, None),
            ("URL", None, None),
            ("IP", None, None),
            ("Quantity", None, None),
        ];
        for (c, s, l) in rows {
            entries.insert(key(c, *s), *l);
        }
        ExternalLabelMap {
            scheme: Scheme::AzureNer,
            entries,
            unsupported: [Groups, IdentificationNumber, Language].into_iter().collect(),
            family: None,
        }
    }

    /// Microsoft Presidio entity types. `LOCATION` covers address, state and
    /// country alike.
    pub fn presidio() -> Self {
        let mut entries = BTreeMap::new();
        let rows: &[(&str, Option<EntityLabel>)] = &[
            ("PERSON", Some(Person)),
            ("LOCATION", Some(Address)),
            ("DATE_TIME", Some(Dates)),
            ("NRP", Some(Groups)),
            ("ORGANIZATION", Some(Company)),
            ("US_DRIVER_LICENSE", Some(IdentificationNumber)),
            ("US_PASSPORT", Some(IdentificationNumber)),
            ("CREDIT_CARD_NUMBER", Some(IdentificationNumber)),
            ("IBAN_CODE", Some(IdentificationNumber)),
            ("PHONE_NUMBER", Some(IdentificationNumber)),
            ("MEDICAL_LICENSE", Some(IdentificationNumber)),
            ("IN_PAN", Some(IdentificationNumber)),
            ("IN_AADHAAR", Some(IdentificationNumber)),
            ("IN_VOTER", Some(IdentificationNumber)),
            ("IN_VEHICLE_REGISTRATION", Some(IdentificationNumber)),
            // outside the study taxonomy
            ("EMAIL_ADDRESS", None),
            ("URL", None),
            ("IP_ADDRESS", None),
            ("CRYPTO", None),
        ];
        for (c, l) in rows {
            entries.insert(key(c, None), *l);
        }
        ExternalLabelMap {
            scheme: Scheme::Presidio,
            entries,
            unsupported: [Language].into_iter().collect(),
            family: Some((Address, [Address, AddressState, AddressCountry].into_iter().collect())),
        }
    }

    pub fn lookup(&self, category: &str, subcategory: &str) -> Result<Option<EntityLabel>, MappingError> {
        let exact = key(category, Some(subcategory));
        let wildcard = key(category, None);
        self.entries
            .get(&exact)
            .or_else(|| self.entries.get(&wildcard))
            .copied()
            .ok_or_else(|| MappingError {
                scheme: self.scheme,
                category: category.to_string(),
                subcategory: subcategory.to_string(),
            })
    }

    pub fn unsupported(&self) -> &BTreeSet<EntityLabel> {
        &self.unsupported
    }

    pub fn supported_labels(&self) -> BTreeSet<EntityLabel> {
        EntityLabel::active().filter(|l| !self.unsupported.contains(l)).collect()
    }

    /// `(mapped label, labels it may stand for)` for coarse categories.
    pub fn label_family(&self) -> Option<(EntityLabel, &BTreeSet<EntityLabel>)> {
        self.family.as_ref().map(|(l, f)| (*l, f))
    }

    /// Every published row as `(category, subcategory or "" for All, label)`.
    pub fn rows(&self) -> impl Iterator<Item = (&str, &str, Option<EntityLabel>)> {
        self.entries
            .iter()
            .map(|((c, s), l)| (c.as_str(), s.as_deref().unwrap_or(""), *l))
    }
}

pub fn map_external_label(
    scheme: &ExternalLabelMap,
    category: &str,
    subcategory: &str,
) -> Result<Option<EntityLabel>, MappingError> {
    scheme.lookup(category, subcategory)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn azure_rows() {
        let m = ExternalLabelMap::azure_ner();
        let cases: &[(&str, &str, Option<EntityLabel>)] = &[
            ("Address", "", Some(Address)),
            ("Address", "Street", Some(Address)),
            ("Location", "City", Some(Address)),
            ("Location", "Structural", Some(Address)),
            ("Location", "Geographical", Some(Address)),
            ("Location", "Location", Some(Address)),
            ("Location", "State", Some(AddressState)),
            ("Location", "CountryRegion", Some(AddressCountry)),
            ("Location", "Continent", Some(AddressCountry)),
            ("Location", "GPE", Some(AddressCountry)),
            ("DateTime", "Date", Some(Dates)),
            ("DateTime", "DateRange", Some(Dates)),
            ("DateTime", "DateTime", Some(Dates)),
            ("DateTime", "DateTimeRange", Some(Dates)),
            ("Organization", "", Some(Company)),
            ("Organization", "Medical", Some(Company)),
            ("Person", "", Some(Person)),
            ("PhoneNumber", "", None),
            ("DateTime", "Duration", None),
            ("Quantity", "Age", None),
        ];
        for (c, s, want) in cases {
            assert_eq!(map_external_label(&m, c, s).unwrap(), *want, "{c}/{s}");
        }
        assert!(map_external_label(&m, "Location", "Moon").is_err());
        assert!(map_external_label(&m, "Weather", "").is_err());
    }

    #[test]
    fn no_azure_category_yields_study_labels_for_id_language_groups() {
        let m = ExternalLabelMap::azure_ner();
        let mapped: BTreeSet<EntityLabel> = m.rows().filter_map(|(_, _, l)| l).collect();
        for l in [IdentificationNumber, Language, Groups] {
            assert!(!mapped.contains(&l));
        }
    }

    #[test]
    fn presidio_rows() {
        let m = ExternalLabelMap::presidio();
        let cases: &[(&str, Option<EntityLabel>)] = &[
            ("PERSON", Some(Person)),
            ("LOCATION", Some(Address)),
            ("DATE_TIME", Some(Dates)),
            ("NRP", Some(Groups)),
            ("ORGANIZATION", Some(Company)),
            ("US_DRIVER_LICENSE", Some(IdentificationNumber)),
            ("US_PASSPORT", Some(IdentificationNumber)),
            ("CREDIT_CARD_NUMBER", Some(IdentificationNumber)),
            ("IBAN_CODE", Some(IdentificationNumber)),
            ("PHONE_NUMBER", Some(IdentificationNumber)),
            ("MEDICAL_LICENSE", Some(IdentificationNumber)),
            ("IN_PAN", Some(IdentificationNumber)),
            ("IN_AADHAAR", Some(IdentificationNumber)),
            ("IN_VOTER", Some(IdentificationNumber)),
            ("IN_VEHICLE_REGISTRATION", Some(IdentificationNumber)),
            ("EMAIL_ADDRESS", None),
        ];
        for (c, want) in cases {
            assert_eq!(map_external_label(&m, c, "").unwrap(), *want, "{c}");
        }
        assert_eq!(map_external_label(&m, "NRP", "—").unwrap(), Some(Groups));
        let err = map_external_label(&m, "AU_TFN", "").unwrap_err();
        assert!(err.to_string().contains("AU_TFN"));
        let (coarse, family) = m.label_family().unwrap();
        assert_eq!(coarse, Address);
        assert_eq!(family.len(), 3);
    }

    #[test]
    fn supported_label_counts() {
        let azure = Scheme::AzureNer.supported_labels();
        assert_eq!(azure.len(), 6);
        assert!(!azure.contains(&Groups) && !azure.contains(&IdentificationNumber) && !azure.contains(&Language));
        let presidio = Scheme::Presidio.supported_labels();
        assert_eq!(presidio.len(), 8);
        assert!(!presidio.contains(&Language));
        assert_eq!(Scheme::Native.supported_labels().len(), 9);
    }

    #[test]
    fn scheme_names() {
        for s in [Scheme::AzureNer, Scheme::Presidio, Scheme::Native] {
            assert_eq!(s.as_str().parse::<Scheme>().unwrap(), s);
        }
        assert!("google".parse::<Scheme>().is_err());
    }
}
