use serde::{Deserialize, Serialize};

use crate::label::EntityLabel;

pub const HONORIFICS: [&str; 4] = ["Dr", "Mr", "Mrs", "Ms"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseClass {
    Lower,
    Upper,
    Title,
    Mixed,
    /// No letters at all.
    Uncased,
}

pub fn case_class(word: &str) -> CaseClass {
    let letters: Vec<char> = word.chars().filter(|c| c.is_alphabetic()).collect();
    let Some(first) = letters.first() else {
        return CaseClass::Uncased;
    };
    let rest = &letters[1..];
    if letters.iter().all(|c| !c.is_uppercase()) {
        CaseClass::Lower
    } else if letters.iter().all(|c| !c.is_lowercase()) {
        CaseClass::Upper
    } else if first.is_uppercase() && rest.iter().all(|c| !c.is_uppercase()) {
        CaseClass::Title
    } else {
        CaseClass::Mixed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CharClass {
    Upper,
    Lower,
    Digit,
    /// Any other letter (no case).
    Alpha,
    Other,
}

pub fn char_class(c: char) -> CharClass {
    if c.is_ascii_digit() {
        CharClass::Digit
    } else if c.is_uppercase() {
        CharClass::Upper
    } else if c.is_lowercase() {
        CharClass::Lower
    } else if c.is_alphabetic() {
        CharClass::Alpha
    } else {
        CharClass::Other
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordProfile {
    pub text: String,
    pub len: usize,
    pub case: CaseClass,
    pub classes: Vec<CharClass>,
    /// `(position, char)` of every non-alphanumeric character.
    pub separators: Vec<(usize, char)>,
}

impl WordProfile {
    pub fn new(word: &str) -> Self {
        let classes: Vec<CharClass> = word.chars().map(char_class).collect();
        WordProfile {
            text: word.to_string(),
            len: classes.len(),
            case: case_class(word),
            separators: word
                .chars()
                .enumerate()
                .filter(|(_, c)| char_class(*c) == CharClass::Other)
                .collect(),
            classes,
        }
    }

    /// Lengths of maximal digit runs, e.g. `[2, 1, 2]` for `03-9-22`.
    pub fn digit_groups(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut run = 0;
        for c in &self.classes {
            if *c == CharClass::Digit {
                run += 1;
            } else if run > 0 {
                out.push(run);
                run = 0;
            }
        }
        if run > 0 {
            out.push(run);
        }
        out
    }

    pub fn is_numeric(&self) -> bool {
        self.classes.iter().all(|c| matches!(c, CharClass::Digit | CharClass::Other))
            && self.classes.contains(&CharClass::Digit)
    }

    pub fn has_digit(&self) -> bool {
        self.classes.contains(&CharClass::Digit)
    }

    /// Two to four capitals and nothing else, e.g. `SNM`.
    pub fn is_initials(&self) -> bool {
        (2..=4).contains(&self.len) && self.classes.iter().all(|c| *c == CharClass::Upper)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormatProfile {
    pub leading: String,
    pub trailing: String,
    pub honorific: Option<String>,
    pub words: Vec<WordProfile>,
    /// Whitespace between consecutive tokens (honorific included).
    pub gaps: Vec<String>,
}

impl FormatProfile {
    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    /// Reassembles a surface from replacement words, keeping every piece of
    /// whitespace and the honorific verbatim.
    pub fn render<S: AsRef<str>>(&self, words: &[S]) -> String {
        assert_eq!(words.len(), self.words.len(), "one replacement per word");
        let tokens = self.honorific.iter().map(String::as_str).chain(words.iter().map(AsRef::as_ref));
        let mut out = self.leading.clone();
        for (i, t) in tokens.enumerate() {
            if i > 0 {
                out.push_str(&self.gaps[i - 1]);
            }
            out.push_str(t);
        }
        out.push_str(&self.trailing);
        out
    }

    /// Identity fill: the profile's own words.
    pub fn reconstruct(&self) -> String {
        let words: Vec<&str> = self.words.iter().map(|w| w.text.as_str()).collect();
        self.render(&words)
    }
}

fn is_honorific(token: &str) -> bool {
    let t = token.strip_suffix('.').unwrap_or(token);
    HONORIFICS.iter().any(|h| h.eq_ignore_ascii_case(t))
}

pub fn format_profile(surface: &str, label: EntityLabel) -> FormatProfile {
    let trimmed = surface.trim_start();
    let leading = surface[..surface.len() - trimmed.len()].to_string();
    let core = trimmed.trim_end();
    let trailing = trimmed[core.len()..].to_string();

    let mut tokens = Vec::new();
    let mut gaps = Vec::new();
    let mut rest = core;
    while !rest.is_empty() {
        let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
        tokens.push(&rest[..end]);
        rest = &rest[end..];
        let next = rest.find(|c: char| !c.is_whitespace()).unwrap_or(rest.len());
        if next > 0 && next < rest.len() {
            gaps.push(rest[..next].to_string());
        }
        rest = &rest[next..];
    }

    let honorific = (label == EntityLabel::Person && tokens.len() > 1 && is_honorific(tokens[0])).then(|| tokens.remove(0).to_string());
    FormatProfile {
        leading,
        trailing,
        honorific,
        words: tokens.into_iter().map(WordProfile::new).collect(),
        gaps,
    }
}
