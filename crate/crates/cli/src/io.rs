use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// A parsed line and where it came from.
#[derive(Debug, Clone)]
pub struct Located<T> {
    pub line: usize,
    pub value: T,
}

/// Reads a JSON-lines file, collecting every bad line rather than stopping
/// at the first. `-` reads stdin.
pub fn read_lines<T: DeserializeOwned>(path: &Path) -> anyhow::Result<Result<Vec<Located<T>>, Vec<String>>> {
    let reader: Box<dyn BufRead> = if path == Path::new("-") {
        Box::new(BufReader::new(io::stdin()))
    } else {
        Box::new(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
    };
    let mut ok = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(value) => ok.push(Located { line: i + 1, value }),
            Err(e) => errors.push(format!("{}:{}: {e}", path.display(), i + 1)),
        }
    }
    Ok(if errors.is_empty() { Ok(ok) } else { Err(errors) })
}

/// Like [`read_lines`] but fails on the first batch of errors.
pub fn read_all<T: DeserializeOwned>(path: &Path) -> anyhow::Result<Vec<Located<T>>> {
    match read_lines(path)? {
        Ok(v) => Ok(v),
        Err(errors) => bail!("{}", errors.join("\n")),
    }
}

/// Sorts by key and rejects duplicates.
pub fn sort_unique<T>(path: &Path, mut items: Vec<Located<T>>, key: impl Fn(&T) -> &str) -> anyhow::Result<Vec<Located<T>>> {
    items.sort_by(|a, b| key(&a.value).cmp(key(&b.value)));
    let mut seen = BTreeSet::new();
    for it in &items {
        if !seen.insert(key(&it.value)) {
            bail!("{}:{}: duplicate doc_id {:?}", path.display(), it.line, key(&it.value));
        }
    }
    Ok(items)
}

pub fn create_out(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        None => Box::new(BufWriter::new(io::stdout().lock())),
        Some(p) if p == Path::new("-") => Box::new(BufWriter::new(io::stdout().lock())),
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
    })
}

pub fn write_lines<T: Serialize>(path: Option<&Path>, records: &[T]) -> anyhow::Result<()> {
    let out = create_out(path)?;
    deid_core::format::write_jsonl(out, records).context("writing output")
}
