use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// Surrogate word lists. Each list is a UTF-8 file with one entry per line;
/// blank lines and lines starting with `#` are ignored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resources {
    pub names: Vec<String>,
    pub states: Vec<String>,
    pub state_abbreviations: Vec<String>,
    pub countries: Vec<String>,
    pub country_abbreviations: Vec<String>,
    pub cities: Vec<String>,
    pub facilities: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ResourceError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}: list is empty")]
    Empty(String),
}

pub const RESOURCE_FILES: [&str; 7] = [
    "names.txt",
    "states.txt",
    "state_abbreviations.txt",
    "countries.txt",
    "country_abbreviations.txt",
    "cities.txt",
    "facilities.txt",
];

pub fn parse_list(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

impl Resources {
    pub fn builtin() -> Self {
        Resources {
            names: parse_list(include_str!("../../resources/names.txt")),
            states: parse_list(include_str!("../../resources/states.txt")),
            state_abbreviations: parse_list(include_str!("../../resources/state_abbreviations.txt")),
            countries: parse_list(include_str!("../../resources/countries.txt")),
            country_abbreviations: parse_list(include_str!("../../resources/country_abbreviations.txt")),
            cities: parse_list(include_str!("../../resources/cities.txt")),
            facilities: parse_list(include_str!("../../resources/facilities.txt")),
        }
    }

    /// Built-in lists, replaced by any of [`RESOURCE_FILES`] found in `dir`.
    pub fn from_dir(dir: &Path) -> Result<Self, ResourceError> {
        let mut res = Self::builtin();
        for name in RESOURCE_FILES {
            let path = dir.join(name);
            if !path.exists() {
                continue;
            }
            let text = fs::read_to_string(&path).map_err(|source| ResourceError::Io {
                path: path.clone(),
                source,
            })?;
            let list = parse_list(&text);
            if list.is_empty() {
                return Err(ResourceError::Empty(path.display().to_string()));
            }
            *res.list_mut(name) = list;
        }
        Ok(res)
    }

    fn list_mut(&mut self, file: &str) -> &mut Vec<String> {
        match file {
            "names.txt" => &mut self.names,
            "states.txt" => &mut self.states,
            "state_abbreviations.txt" => &mut self.state_abbreviations,
            "countries.txt" => &mut self.countries,
            "country_abbreviations.txt" => &mut self.country_abbreviations,
            "cities.txt" => &mut self.cities,
            _ => &mut self.facilities,
        }
    }
}

impl Default for Resources {
    fn default() -> Self {
        Self::builtin()
    }
}
