use std::sync::LazyLock;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::profile::{case_class, format_profile, CaseClass, FormatProfile, WordProfile};
use super::resources::Resources;
use crate::label::EntityLabel;
use crate::lineage::{normalize_surface, similarity};
use crate::span::{AnnotationSet, Document, EntitySpan};
use crate::text::{is_punct_or_symbol, CharText};

use EntityLabel::*;

const MAX_ATTEMPTS: usize = 64;
// nearest list entry at or above this similarity marks a misspelling
const MISSPELT_SIMILARITY: f64 = 0.7;

const MONTHS: [&str; 12] = [
    "January", "February", "March", "April", "May", "June", "July", "August", "September", "October", "November",
    "December",
];

static ORDINAL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(?i)(\d+)(st|nd|rd|th)$").unwrap());
static DMY: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(\d{1,2})([-/.])(\d{1,2})([-/.])(\d{2}|\d{4})$").unwrap());

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DateMode {
    /// Fresh digits in the same groups; calendar validity not enforced.
    #[default]
    Pattern,
    /// Day/month/year shapes get a real calendar date.
    StrictCalendar,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PseudoOptions {
    pub date_mode: DateMode,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PseudoError {
    #[error("cannot pseudonymize {surface:?} ({label}): {constraint}")]
    Exhausted {
        surface: String,
        label: EntityLabel,
        constraint: String,
    },
    #[error("spans {0} and {1} overlap")]
    Overlap(usize, usize),
    #[error("span {index} [{start}, {end}) is outside the text")]
    Range { index: usize, start: usize, end: usize },
}

/// Labels whose surfaces are kept as is.
pub fn is_passthrough(label: EntityLabel) -> bool {
    matches!(label, Language | Groups)
}

pub fn pseudonymize_span(surface: &str, label: EntityLabel, seed: u64, res: &Resources) -> Result<String, PseudoError> {
    pseudonymize_span_with(surface, label, seed, res, PseudoOptions::default())
}

pub fn pseudonymize_span_with(
    surface: &str,
    label: EntityLabel,
    seed: u64,
    res: &Resources,
    opts: PseudoOptions,
) -> Result<String, PseudoError> {
    if is_passthrough(label) {
        return Ok(surface.to_string());
    }
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        res,
        label,
        surface,
        opts,
    };
    if surface.trim().is_empty() {
        return Err(g.exhausted("surface is blank"));
    }
    let profile = format_profile(surface, label);
    for _ in 0..MAX_ATTEMPTS {
        let words = g.words(&profile)?;
        let out = profile.render(&words);
        if out != surface {
            return Ok(out);
        }
    }
    Err(g.exhausted("every attempt reproduced the original"))
}

struct Gen<'a> {
    rng: ChaCha8Rng,
    res: &'a Resources,
    label: EntityLabel,
    surface: &'a str,
    opts: PseudoOptions,
}

/// `(leading punctuation, core, trailing punctuation)`.
fn split_edges(word: &str) -> (&str, &str, &str) {
    let core = word.trim_start_matches(is_punct_or_symbol);
    let pre = &word[..word.len() - core.len()];
    let trimmed = core.trim_end_matches(is_punct_or_symbol);
    (pre, trimmed, &core[trimmed.len()..])
}

/// Re-cases `candidate` after `template`; `None` if the template's case
/// class cannot be reproduced.
pub fn project_case(template: &str, candidate: &str) -> Option<String> {
    let class = case_class(template);
    let out = match class {
        CaseClass::Uncased => return Some(candidate.to_string()),
        CaseClass::Lower => candidate.to_lowercase(),
        CaseClass::Upper => candidate.to_uppercase(),
        CaseClass::Title => {
            let mut seen = false;
            candidate
                .chars()
                .map(|c| {
                    if !c.is_alphabetic() {
                        return c.to_string();
                    }
                    let first = !seen;
                    seen = true;
                    if first {
                        c.to_uppercase().to_string()
                    } else {
                        c.to_lowercase().to_string()
                    }
                })
                .collect()
        }
        CaseClass::Mixed => {
            let mask: Vec<bool> = template.chars().filter(|c| c.is_alphabetic()).map(char::is_uppercase).collect();
            let mut i = 0;
            candidate
                .chars()
                .map(|c| {
                    if !c.is_alphabetic() {
                        return c.to_string();
                    }
                    let upper = mask[i.min(mask.len() - 1)];
                    i += 1;
                    if upper {
                        c.to_uppercase().to_string()
                    } else {
                        c.to_lowercase().to_string()
                    }
                })
                .collect()
        }
    };
    (case_class(&out) == class).then_some(out)
}

fn ordinal_suffix(n: u64) -> &'static str {
    match (n % 100, n % 10) {
        (11..=13, _) => "th",
        (_, 1) => "st",
        (_, 2) => "nd",
        (_, 3) => "rd",
        _ => "th",
    }
}

fn month_index(word: &str) -> Option<(usize, bool)> {
    let w = word.to_lowercase();
    MONTHS.iter().enumerate().find_map(|(i, m)| {
        let m = m.to_lowercase();
        if w == m {
            Some((i, false))
        } else if w == m[..3] {
            Some((i, true))
        } else {
            None
        }
    })
}

impl Gen<'_> {
    fn exhausted(&self, constraint: impl Into<String>) -> PseudoError {
        PseudoError::Exhausted {
            surface: self.surface.to_string(),
            label: self.label,
            constraint: constraint.into(),
        }
    }

    fn words(&mut self, p: &FormatProfile) -> Result<Vec<String>, PseudoError> {
        match self.label {
            Person => p.words.iter().map(|w| self.person_word(w)).collect(),
            AddressState => {
                let (list, abbr) = (&self.res.states, &self.res.state_abbreviations);
                self.place(p, list, abbr, "state")
            }
            AddressCountry => {
                let (list, abbr) = (&self.res.countries, &self.res.country_abbreviations);
                self.place(p, list, abbr, "country")
            }
            Address => self.address(p),
            Company => self.company(p),
            Dates => self.date(p),
            IdentificationNumber | EmailUrl => p.words.iter().map(|w| self.random_distinct(&w.text)).collect(),
            Language | Groups => Ok(p.words.iter().map(|w| w.text.clone()).collect()),
        }
    }

    fn random_like(&mut self, s: &str, letters: bool) -> String {
        s.chars()
            .map(|c| {
                if c.is_ascii_digit() {
                    char::from(self.rng.random_range(b'0'..=b'9'))
                } else if letters && c.is_uppercase() {
                    char::from(self.rng.random_range(b'A'..=b'Z'))
                } else if letters && c.is_lowercase() {
                    char::from(self.rng.random_range(b'a'..=b'z'))
                } else {
                    c
                }
            })
            .collect()
    }

    /// Same classes character by character, different string.
    fn random_distinct(&mut self, s: &str) -> Result<String, PseudoError> {
        if !s.chars().any(|c| c.is_ascii_digit() || c.is_uppercase() || c.is_lowercase()) {
            return Ok(s.to_string());
        }
        for _ in 0..MAX_ATTEMPTS {
            let out = self.random_like(s, true);
            if out != s {
                return Ok(out);
            }
        }
        Err(self.exhausted(format!("no random string differs from {s:?}")))
    }

    /// A shuffled entry from `list` with `n` words, differing from all of
    /// `avoid` (normalized), re-cased word by word after `template`.
    fn pick(&mut self, list: &[String], template: &[&str], avoid: &[String]) -> Option<Vec<String>> {
        let n = template.len();
        let mut cands: Vec<&String> = list
            .iter()
            .filter(|e| e.split_whitespace().count() == n && !avoid.contains(&normalize_surface(e)))
            .collect();
        cands.shuffle(&mut self.rng);
        cands.into_iter().find_map(|c| {
            c.split_whitespace()
                .zip(template)
                .map(|(cw, tw)| {
                    let (pre, core, suf) = split_edges(tw);
                    project_case(core, cw).map(|x| format!("{pre}{x}{suf}"))
                })
                .collect()
        })
    }

    fn person_word(&mut self, w: &WordProfile) -> Result<String, PseudoError> {
        let (pre, core, suf) = split_edges(&w.text);
        if core.is_empty() {
            return Ok(w.text.clone());
        }
        let cp = WordProfile::new(core);
        let new = if cp.is_initials() || (cp.len == 1 && cp.case == CaseClass::Upper) || cp.has_digit() {
            self.random_distinct(core)?
        } else {
            let names = &self.res.names;
            self.pick(names, &[core], &[normalize_surface(core)])
                .map(|mut v| v.remove(0))
                .ok_or_else(|| self.exhausted(format!("no name can take the case pattern of {core:?}")))?
        };
        Ok(format!("{pre}{new}{suf}"))
    }

    fn place(
        &mut self,
        p: &FormatProfile,
        list: &[String],
        abbrevs: &[String],
        what: &str,
    ) -> Result<Vec<String>, PseudoError> {
        let words: Vec<&str> = p.words.iter().map(|w| w.text.as_str()).collect();
        let norm = normalize_surface(&words.join(" "));
        let known = list.iter().any(|e| normalize_surface(e) == norm);

        if !known && words.len() == 1 {
            let (pre, core, suf) = split_edges(words[0]);
            let upper_short = case_class(core) == CaseClass::Upper && core.chars().count() <= 3;
            let listed = abbrevs.iter().any(|a| a.eq_ignore_ascii_case(core));
            if !core.is_empty() && core.chars().all(char::is_alphabetic) && (listed || upper_short) {
                let len = core.chars().count();
                let mut cands: Vec<&String> = abbrevs
                    .iter()
                    .filter(|a| a.chars().count() == len && !a.eq_ignore_ascii_case(core))
                    .collect();
                cands.shuffle(&mut self.rng);
                return cands
                    .into_iter()
                    .find_map(|a| project_case(core, a))
                    .map(|a| vec![format!("{pre}{a}{suf}")])
                    .ok_or_else(|| self.exhausted(format!("no {what} abbreviation of length {len}")));
            }
        }

        let nearest = (!known)
            .then(|| {
                list.iter()
                    .map(|e| (similarity(&normalize_surface(e), &norm), normalize_surface(e)))
                    .max_by(|a, b| a.0.total_cmp(&b.0))
                    .filter(|(s, _)| *s >= MISSPELT_SIMILARITY)
            })
            .flatten();
        let mut avoid = vec![norm];
        if let Some((_, n)) = &nearest {
            avoid.push(n.clone());
        }
        let mut out = self
            .pick(list, &words, &avoid)
            .ok_or_else(|| self.exhausted(format!("no other {what} with {} word(s)", words.len())))?;
        if nearest.is_some() {
            self.misspell(&mut out, 1);
        }
        Ok(out)
    }

    /// Swaps one adjacent same-case letter pair in each of `count` distinct
    /// words.
    fn misspell(&mut self, words: &mut [String], count: usize) {
        let mut order: Vec<usize> = (0..words.len()).collect();
        order.shuffle(&mut self.rng);
        let mut done = 0;
        for i in order {
            if done == count {
                break;
            }
            let chars: Vec<char> = words[i].chars().collect();
            let spots: Vec<usize> = (0..chars.len().saturating_sub(1))
                .filter(|&k| {
                    let (a, b) = (chars[k], chars[k + 1]);
                    a != b && a.is_alphabetic() && b.is_alphabetic() && a.is_uppercase() == b.is_uppercase()
                })
                .collect();
            if spots.is_empty() {
                continue;
            }
            let k = spots[self.rng.random_range(0..spots.len())];
            let mut chars = chars;
            chars.swap(k, k + 1);
            words[i] = chars.into_iter().collect();
            done += 1;
        }
    }

    fn address(&mut self, p: &FormatProfile) -> Result<Vec<String>, PseudoError> {
        let words: Vec<&str> = p.words.iter().map(|w| w.text.as_str()).collect();
        if !p.words.iter().any(WordProfile::has_digit) {
            let avoid = [normalize_surface(&words.join(" "))];
            let cities = &self.res.cities;
            if let Some(out) = self.pick(cities, &words, &avoid) {
                return Ok(out);
            }
        }
        // no whole-name match: word by word
        words.iter().map(|w| self.place_word(w)).collect()
    }

    fn place_word(&mut self, w: &str) -> Result<String, PseudoError> {
        let (pre, core, suf) = split_edges(w);
        if core.is_empty() {
            return Ok(w.to_string());
        }
        if !core.chars().any(char::is_numeric) {
            let cities = &self.res.cities;
            if let Some(mut v) = self.pick(cities, &[core], &[normalize_surface(core)]) {
                return Ok(format!("{pre}{}{suf}", v.remove(0)));
            }
        }
        Ok(format!("{pre}{}{suf}", self.random_distinct(core)?))
    }

    fn company(&mut self, p: &FormatProfile) -> Result<Vec<String>, PseudoError> {
        let words: Vec<&str> = p.words.iter().map(|w| w.text.as_str()).collect();
        let features = |ws: &[&str]| {
            let cores: Vec<&str> = ws.iter().map(|w| split_edges(w).1).collect();
            let abbrev = cores
                .iter()
                .any(|c| case_class(c) == CaseClass::Upper && (2..=6).contains(&c.chars().count()));
            let hospital = cores.iter().any(|c| c.eq_ignore_ascii_case("hospital"));
            (abbrev, hospital)
        };
        let want = features(&words);
        let vocab: Vec<String> = self
            .res
            .facilities
            .iter()
            .flat_map(|f| f.split_whitespace().map(str::to_lowercase))
            .collect();
        let misspelt = words
            .iter()
            .map(|w| split_edges(w).1.to_lowercase())
            .filter(|c| {
                c.chars().count() >= 4
                    && !vocab.contains(c)
                    && vocab
                        .iter()
                        .any(|v| v.chars().count() >= 4 && similarity(v, c) >= MISSPELT_SIMILARITY)
            })
            .count();

        let avoid = normalize_surface(&words.join(" "));
        let mut ranked: Vec<(u8, &String)> = self
            .res
            .facilities
            .iter()
            .filter(|f| f.split_whitespace().count() == words.len() && normalize_surface(f) != avoid)
            .map(|f| {
                let fw: Vec<&str> = f.split_whitespace().collect();
                let have = features(&fw);
                (u8::from(have.0 == want.0) + u8::from(have.1 == want.1), f)
            })
            .collect();
        ranked.shuffle(&mut self.rng);
        ranked.sort_by_key(|r| std::cmp::Reverse(r.0));
        let found = ranked.into_iter().find_map(|(_, f)| {
            f.split_whitespace()
                .zip(&words)
                .map(|(cw, tw)| {
                    let (pre, core, suf) = split_edges(tw);
                    project_case(core, cw).map(|x| format!("{pre}{x}{suf}"))
                })
                .collect::<Option<Vec<String>>>()
        });
        let mut out = match found {
            Some(v) => v,
            None => {
                let mut v = Vec::with_capacity(words.len());
                for w in &words {
                    v.push(self.vocab_word(w, &vocab)?);
                }
                v
            }
        };
        self.misspell(&mut out, misspelt);
        Ok(out)
    }

    fn vocab_word(&mut self, w: &str, vocab: &[String]) -> Result<String, PseudoError> {
        let (pre, core, suf) = split_edges(w);
        if core.is_empty() {
            return Ok(w.to_string());
        }
        if !core.chars().any(char::is_numeric) {
            if let Some(mut v) = self.pick(vocab, &[core], &[normalize_surface(core)]) {
                return Ok(format!("{pre}{}{suf}", v.remove(0)));
            }
        }
        Ok(format!("{pre}{}{suf}", self.random_distinct(core)?))
    }

    fn date(&mut self, p: &FormatProfile) -> Result<Vec<String>, PseudoError> {
        let mut changed = false;
        let mut out = Vec::with_capacity(p.words.len());
        for w in &p.words {
            let (pre, core, suf) = split_edges(&w.text);
            let new = if let Some(c) = ORDINAL.captures(core) {
                changed = true;
                let digits = self.random_like(&c[1], false);
                let n: u64 = digits.parse().unwrap_or(0);
                let suffix = project_case(&c[2], ordinal_suffix(n)).unwrap_or_else(|| c[2].to_string());
                format!("{digits}{suffix}")
            } else if core.chars().any(|c| c.is_ascii_digit()) {
                changed = true;
                match (self.opts.date_mode, DMY.captures(core)) {
                    (DateMode::StrictCalendar, Some(c)) => self.calendar_date(&c),
                    _ => self.random_like(core, false),
                }
            } else if let Some((m, abbr)) = month_index(core) {
                changed = true;
                self.month(core, m, abbr)
            } else {
                core.to_string()
            };
            out.push(format!("{pre}{new}{suf}"));
        }
        if !changed {
            return Err(self.exhausted("no digits or month names to replace"));
        }
        Ok(out)
    }

    fn month(&mut self, core: &str, m: usize, abbr: bool) -> String {
        let render = |i: usize| if abbr { MONTHS[i][..3].to_string() } else { MONTHS[i].to_string() };
        let len = core.chars().count();
        let others: Vec<usize> = (0..12).filter(|&i| i != m).collect();
        let same_len: Vec<usize> = others.iter().copied().filter(|&i| render(i).len() == len).collect();
        let pool = if same_len.is_empty() { others } else { same_len };
        let i = pool[self.rng.random_range(0..pool.len())];
        project_case(core, &render(i)).unwrap_or_else(|| render(i))
    }

    fn calendar_date(&mut self, c: &regex::Captures<'_>) -> String {
        let (dl, ml, yl) = (c[1].len(), c[3].len(), c[5].len());
        loop {
            let year: i32 = if yl == 4 { self.rng.random_range(1950..=2049) } else { self.rng.random_range(0..=99) };
            let month: u32 = if ml == 1 { self.rng.random_range(1..=9) } else { self.rng.random_range(1..=12) };
            let day: u32 = if dl == 1 { self.rng.random_range(1..=9) } else { self.rng.random_range(1..=31) };
            let full_year = if yl == 4 { year } else { 2000 + year };
            if NaiveDate::from_ymd_opt(full_year, month, day).is_none() {
                continue;
            }
            return format!(
                "{day:0dl$}{}{month:0ml$}{}{year:0yl$}",
                &c[2],
                &c[4],
                dl = dl,
                ml = ml,
                yl = yl
            );
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoSpan {
    pub original: EntitySpan,
    pub surface: String,
    pub replacement: String,
    pub new_start: usize,
    pub new_end: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pseudonymized {
    pub text: String,
    pub spans: Vec<PseudoSpan>,
}

impl Pseudonymized {
    /// The spans at their positions in the rewritten text.
    pub fn annotation_set(&self, doc_id: &str, origin: crate::span::Source) -> AnnotationSet {
        AnnotationSet::new(
            doc_id,
            origin,
            self.spans
                .iter()
                .map(|s| EntitySpan {
                    start: s.new_start,
                    end: s.new_end,
                    ..s.original.clone()
                })
                .collect(),
        )
    }
}

/// Rewrites every span with a surrogate. Span `i` (in start order) uses
/// seed `seed ^ i`, so results do not depend on scheduling.
pub fn pseudonymize_document(
    doc: &Document,
    set: &AnnotationSet,
    seed: u64,
    res: &Resources,
    opts: PseudoOptions,
) -> Result<Pseudonymized, PseudoError> {
    let text = CharText::new(&doc.text);
    let mut spans = set.spans.clone();
    spans.sort_by_key(|s| (s.start, s.end));
    for (i, w) in spans.windows(2).enumerate() {
        if w[1].start < w[0].end {
            return Err(PseudoError::Overlap(i, i + 1));
        }
    }
    let surfaces: Vec<&str> = spans
        .iter()
        .enumerate()
        .map(|(index, s)| {
            text.slice(s.start..s.end).filter(|_| s.start < s.end).ok_or(PseudoError::Range {
                index,
                start: s.start,
                end: s.end,
            })
        })
        .collect::<Result<_, _>>()?;
    let replacements: Vec<String> = spans
        .par_iter()
        .zip(surfaces.par_iter())
        .enumerate()
        .map(|(i, (s, surface))| pseudonymize_span_with(surface, s.label, seed ^ i as u64, res, opts))
        .collect::<Result<_, _>>()?;

    let mut out = String::with_capacity(doc.text.len());
    let mut cursor = 0;
    let mut new_len = 0;
    let mut result = Vec::with_capacity(spans.len());
    for ((s, surface), replacement) in spans.into_iter().zip(surfaces).zip(replacements) {
        let gap = text.slice(cursor..s.start).unwrap_or("");
        out.push_str(gap);
        new_len += gap.chars().count();
        let rlen = replacement.chars().count();
        out.push_str(&replacement);
        cursor = s.end;
        result.push(PseudoSpan {
            surface: surface.to_string(),
            new_start: new_len,
            new_end: new_len + rlen,
            original: s,
            replacement,
        });
        new_len += rlen;
    }
    out.push_str(text.slice(cursor..text.len()).unwrap_or(""));
    Ok(Pseudonymized { text: out, spans: result })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::span::Source;

    fn res() -> Resources {
        Resources::builtin()
    }

    #[test]
    fn initials_become_random_capitals() {
        for seed in 0..50 {
            let out = pseudonymize_span("SNM", Person, seed, &res()).unwrap();
            assert_eq!(out.len(), 3);
            assert!(out.chars().all(|c| c.is_ascii_uppercase()));
            assert_ne!(out, "SNM");
        }
    }

    #[test]
    fn honorific_kept_name_replaced() {
        let out = pseudonymize_span("Mrs Rathnamma", Person, 7, &res()).unwrap();
        let (h, name) = out.split_once(' ').unwrap();
        assert_eq!(h, "Mrs");
        assert_eq!(case_class(name), CaseClass::Title);
        assert_ne!(name, "Rathnamma");
        let lower = pseudonymize_span("ravi kumar", Person, 7, &res()).unwrap();
        assert_eq!(lower, lower.to_lowercase());
        assert_eq!(lower.split_whitespace().count(), 2);
    }

    #[test]
    fn date_pattern() {
        let out = pseudonymize_span("03-9-22", Dates, 1, &res()).unwrap();
        assert_eq!(out.len(), 7);
        assert_eq!((&out[2..3], &out[4..5]), ("-", "-"));
        assert!(out.chars().filter(|c| *c != '-').all(|c| c.is_ascii_digit()));
        let ord = pseudonymize_span("23rd November 2023", Dates, 5, &res()).unwrap();
        let parts: Vec<&str> = ord.split(' ').collect();
        assert_eq!(parts.len(), 3);
        assert!(MONTHS.contains(&parts[1]) && parts[1] != "November");
        assert_eq!(parts[1].len(), 8);
        let n: u64 = parts[0][..2].parse().unwrap();
        assert_eq!(&parts[0][2..], ordinal_suffix(n));
    }

    #[test]
    fn strict_calendar_dates_are_valid() {
        let opts = PseudoOptions {
            date_mode: DateMode::StrictCalendar,
        };
        for seed in 0..200 {
            let out = pseudonymize_span_with("31/12/2023", Dates, seed, &res(), opts).unwrap();
            let d = NaiveDate::parse_from_str(&out, "%d/%m/%Y");
            assert!(d.is_ok(), "{out}");
        }
    }

    #[test]
    fn state_modes() {
        let two = pseudonymize_span("Tamil Nadu", AddressState, 3, &res()).unwrap();
        assert_eq!(two.split_whitespace().count(), 2);
        assert!(res().states.contains(&two));
        let abbr = pseudonymize_span("KA", AddressState, 3, &res()).unwrap();
        assert_eq!(abbr.len(), 2);
        assert!(res().state_abbreviations.contains(&abbr) && abbr != "KA");
        let caps = pseudonymize_span("KARNATAKA", AddressState, 3, &res()).unwrap();
        assert_eq!(caps, caps.to_uppercase());
        let missp = pseudonymize_span("Karnatka", AddressState, 3, &res()).unwrap();
        assert!(!res().states.contains(&missp), "{missp}");
    }

    #[test]
    fn ids_keep_mask() {
        let out = pseudonymize_span("KA-05-AB-1234", IdentificationNumber, 9, &res()).unwrap();
        assert_eq!(out.len(), 13);
        for (a, b) in out.chars().zip("KA-05-AB-1234".chars()) {
            assert_eq!(char_class_of(a), char_class_of(b));
        }
    }

    fn char_class_of(c: char) -> u8 {
        if c.is_ascii_digit() {
            0
        } else if c.is_uppercase() {
            1
        } else if c.is_lowercase() {
            2
        } else {
            3
        }
    }

    #[test]
    fn company_prefers_similar_composition() {
        let out = pseudonymize_span("BTM hospital", Company, 2, &res()).unwrap();
        let w: Vec<&str> = out.split_whitespace().collect();
        assert_eq!(w.len(), 2);
        assert_eq!(w[1], "hospital");
        assert_eq!(case_class(w[0]), CaseClass::Upper);
    }

    #[test]
    fn passthrough_and_errors() {
        assert_eq!(pseudonymize_span("kannada", Language, 1, &res()).unwrap(), "kannada");
        assert_eq!(pseudonymize_span("Hindu", Groups, 1, &res()).unwrap(), "Hindu");
        assert!(matches!(
            pseudonymize_span("next week", Dates, 1, &res()),
            Err(PseudoError::Exhausted { .. })
        ));
        let err = pseudonymize_span("Dadra and Nagar Haveli and Daman and Diu", AddressState, 1, &res()).unwrap_err();
        assert!(err.to_string().contains("8 word(s)"), "{err}");
    }

    #[test]
    fn deterministic_per_seed() {
        let a = pseudonymize_span("Bengaluru", Address, 42, &res()).unwrap();
        let b = pseudonymize_span("Bengaluru", Address, 42, &res()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn document_offsets() {
        let doc = Document::new("d", "Rajiv, from Blore, on 03-9-22.");
        let set = AnnotationSet::new(
            "d",
            Source::Gold,
            vec![EntitySpan::new(22, 29, Dates), EntitySpan::new(0, 5, Person), EntitySpan::new(12, 17, Address)],
        );
        let p = pseudonymize_document(&doc, &set, 11, &res(), PseudoOptions::default()).unwrap();
        let t = CharText::new(&p.text);
        for s in &p.spans {
            assert_eq!(t.slice(s.new_start..s.new_end), Some(s.replacement.as_str()));
        }
        assert!(p.text.ends_with('.'));
        let again = pseudonymize_document(&doc, &set, 11, &res(), PseudoOptions::default()).unwrap();
        assert_eq!(again, p);
    }
}
