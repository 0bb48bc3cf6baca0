#![allow(dead_code)]

use deid_core::pseudo::Resources;
use deid_core::EntityLabel;
use rand::seq::IndexedRandom;
use rand::Rng;

use EntityLabel::*;

pub const REPLACED: [EntityLabel; 8] = [Person, Company, Dates, AddressCountry, AddressState, Address, IdentificationNumber, EmailUrl];

fn title(rng: &mut impl Rng, len: usize) -> String {
    let mut s = String::new();
    s.push(char::from(rng.random_range(b'A'..=b'Z')));
    for _ in 1..len {
        s.push(char::from(rng.random_range(b'a'..=b'z')));
    }
    s
}

fn upper(rng: &mut impl Rng, len: usize) -> String {
    (0..len).map(|_| char::from(rng.random_range(b'A'..=b'Z'))).collect()
}

fn digits(rng: &mut impl Rng, len: usize) -> String {
    (0..len).map(|_| char::from(rng.random_range(b'0'..=b'9'))).collect()
}

fn recase(rng: &mut impl Rng, s: &str) -> String {
    match rng.random_range(0..4) {
        0 => s.to_lowercase(),
        1 => s.to_uppercase(),
        _ => s.to_string(),
    }
}

/// One adjacent swap of two different lowercase letters, if possible.
fn typo(rng: &mut impl Rng, s: &str) -> String {
    let mut c: Vec<char> = s.chars().collect();
    let spots: Vec<usize> = (0..c.len().saturating_sub(1))
        .filter(|&k| c[k] != c[k + 1] && c[k].is_lowercase() && c[k + 1].is_lowercase())
        .collect();
    if let Some(&k) = spots.choose(rng) {
        c.swap(k, k + 1);
    }
    c.into_iter().collect()
}

fn edge(rng: &mut impl Rng, s: String) -> String {
    match rng.random_range(0..6) {
        0 => format!("{s},"),
        1 => format!("({s})"),
        _ => s,
    }
}

fn pick(rng: &mut impl Rng, list: &[String]) -> String {
    list.choose(rng).unwrap().clone()
}

/// A plausible surface for `label`, drawn the way annotated clinical notes
/// spell these entities.
pub fn surface(rng: &mut impl Rng, label: EntityLabel, res: &Resources) -> String {
    match label {
        Person => {
            let mut words = Vec::new();
            if rng.random_bool(0.3) {
                words.push((*["Dr", "Mr", "Mrs", "Ms", "Dr."].choose(rng).unwrap()).to_string());
            }
            for _ in 0..rng.random_range(1..=3) {
                let len = rng.random_range(3..=10);
                let w = match rng.random_range(0..6) {
                    0 => title(rng, len).to_lowercase(),
                    1 => {
                        let n = rng.random_range(5..=9);
                        upper(rng, n)
                    }
                    2 => {
                        let n = rng.random_range(2..=4);
                        upper(rng, n)
                    }
                    3 => format!("{}.", upper(rng, 1)),
                    _ => title(rng, len),
                };
                words.push(w);
            }
            let n = words.len();
            words[n - 1] = edge(rng, words[n - 1].clone());
            words.join(" ")
        }
        AddressState | AddressCountry => {
            let (list, abbr) = if label == AddressState {
                (&res.states, &res.state_abbreviations)
            } else {
                (&res.countries, &res.country_abbreviations)
            };
            match rng.random_range(0..4) {
                0 => pick(rng, abbr),
                1 => {
                    let s = pick(rng, list);
                    typo(rng, &s)
                }
                _ => {
                    let s = pick(rng, list);
                    recase(rng, &s)
                }
            }
        }
        Address => match rng.random_range(0..5) {
            0 => {
                let s = pick(rng, &res.cities);
                recase(rng, &s)
            }
            1 => format!("#{}, {}th Cross, {}", digits(rng, 2), rng.random_range(1..10), pick(rng, &res.cities)),
            2 => format!("No. {} {}", digits(rng, 3), pick(rng, &res.cities)),
            3 => format!("Flat {}{}", digits(rng, 2), upper(rng, 1)),
            _ => format!("{} Layout", title(rng, 6)),
        },
        Company => match rng.random_range(0..5) {
            0 => {
                let s = pick(rng, &res.facilities);
                recase(rng, &s)
            }
            1 => {
                let f = pick(rng, &res.facilities);
                f.split(' ').map(|w| if rng.random_bool(0.5) { typo(rng, w) } else { w.to_string() }).collect::<Vec<_>>().join(" ")
            }
            2 => {
                let n = rng.random_range(2..=6);
                upper(rng, n)
            }
            3 => {
                let n = rng.random_range(4..=9);
                format!("{} Hospital", title(rng, n))
            }
            _ => format!("{} {} Clinic", title(rng, 5), title(rng, 4)),
        },
        Dates => {
            let month = *["January", "March", "June", "September", "Dec", "Feb", "aug"].choose(rng).unwrap();
            match rng.random_range(0..7) {
                0 => format!("{}-{}-{}", digits(rng, 2), digits(rng, 1), digits(rng, 2)),
                1 => format!("{}/{}/{}", digits(rng, 2), digits(rng, 2), digits(rng, 4)),
                2 => format!("{}th {} {}", digits(rng, 2), month, digits(rng, 4)),
                3 => format!("{month} {}", digits(rng, 4)),
                4 => month.to_string(),
                5 => digits(rng, 4),
                _ => format!("{}.{}.{}", rng.random_range(1..10), rng.random_range(1..10), digits(rng, 2)),
            }
        }
        IdentificationNumber => match rng.random_range(0..4) {
            0 => digits(rng, 12),
            1 => format!("{}-{}-{}-{}", upper(rng, 2), digits(rng, 2), upper(rng, 2), digits(rng, 4)),
            2 => format!("{} {} {}", digits(rng, 4), digits(rng, 4), digits(rng, 4)),
            _ => format!("{}{}{}", upper(rng, 5), digits(rng, 4), upper(rng, 1)),
        },
        EmailUrl => match rng.random_range(0..2) {
            0 => format!("{}.{}{}@example.com", title(rng, 5).to_lowercase(), upper(rng, 1).to_lowercase(), digits(rng, 2)),
            _ => format!("www.{}.org/{}", title(rng, 7).to_lowercase(), digits(rng, 3)),
        },
        Language | Groups => title(rng, 6),
    }
}

fn case_of(word: &str) -> &'static str {
    let letters: Vec<char> = word.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.is_empty() {
        "none"
    } else if letters.iter().all(|c| c.is_lowercase()) {
        "lower"
    } else if letters.iter().all(|c| c.is_uppercase()) {
        "upper"
    } else if letters[0].is_uppercase() && letters[1..].iter().all(|c| c.is_lowercase()) {
        "title"
    } else {
        "mixed"
    }
}

/// Whitespace runs, including empty leading and trailing ones.
fn gaps(s: &str) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut in_ws = true;
    for c in s.chars() {
        if c.is_whitespace() {
            if !in_ws {
                out.push(String::new());
                in_ws = true;
            }
            out.last_mut().unwrap().push(c);
        } else {
            in_ws = false;
        }
    }
    out
}

fn edges(word: &str) -> (String, String) {
    let p = |c: &char| !c.is_alphanumeric();
    let lead: String = word.chars().take_while(p).collect();
    let trail: String = word.chars().rev().take_while(p).collect();
    (lead, trail)
}

/// Same length, same digit positions, same non-alphanumeric characters.
fn same_shape(a: &str, b: &str) -> bool {
    a.chars().count() == b.chars().count()
        && a.chars().zip(b.chars()).all(|(x, y)| {
            if x.is_ascii_digit() {
                y.is_ascii_digit()
            } else if x.is_uppercase() {
                y.is_uppercase()
            } else if x.is_lowercase() {
                y.is_lowercase()
            } else {
                x == y
            }
        })
}

fn is_initials(w: &str) -> bool {
    let core: String = w.chars().filter(|c| c.is_alphanumeric()).collect();
    let n = core.chars().count();
    (1..=4).contains(&n) && core.chars().all(|c| c.is_uppercase())
}

/// Checks `out` against `orig` for `label`; the error names the first
/// broken property.
pub fn check_format(label: EntityLabel, orig: &str, out: &str) -> Result<(), String> {
    if matches!(label, Language | Groups) {
        return if orig == out { Ok(()) } else { Err("passthrough label changed".into()) };
    }
    if orig == out {
        return Err("replacement equals original".into());
    }
    if gaps(orig) != gaps(out) {
        return Err("whitespace layout or word count differs".into());
    }
    for (i, (a, b)) in orig.split_whitespace().zip(out.split_whitespace()).enumerate() {
        if edges(a) != edges(b) {
            return Err(format!("word {i}: edge punctuation differs"));
        }
        if case_of(a) != case_of(b) {
            return Err(format!("word {i}: case {} became {}", case_of(a), case_of(b)));
        }
        let has_digit = a.chars().any(|c| c.is_ascii_digit());
        let fixed_len = match label {
            IdentificationNumber | EmailUrl => true,
            Person => has_digit || (is_initials(a) && !["Dr", "Mr", "Mrs", "Ms", "Dr."].contains(&a)),
            Dates | Address => has_digit,
            _ => false,
        };
        if fixed_len && !same_shape(a, b) {
            return Err(format!("word {i}: {a:?} -> {b:?} changes length or character classes"));
        }
        if label == Person && ["Dr", "Mr", "Mrs", "Ms", "Dr."].contains(&a) && i == 0 && a != b {
            return Err("honorific changed".into());
        }
    }
    Ok(())
}
