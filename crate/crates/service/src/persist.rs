//! Single-directory persistence.
//!
//! ```text
//! <root>/documents/<id>.json        one record per document
//! <root>/corpora/<id>/store.json    lineage snapshot
//! <root>/corpora/<id>/journal.jsonl entries minted since the snapshot
//! ```
//!
//! Every whole-file write goes to a temporary file that is synced and
//! renamed over the target. Journal appends are synced before the
//! document that uses them is written.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use deid_core::lineage::{LineageEntry, LineageStore};

use crate::state::DocumentRecord;

#[derive(Debug, thiserror::Error)]
pub enum PersistError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl PersistError {
    fn io(path: &Path, source: io::Error) -> Self {
        PersistError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn format(path: &Path, message: impl ToString) -> Self {
        PersistError::Format {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }
}

/// Ids double as file names, so they are restricted to a safe alphabet.
pub fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 128
        && !id.starts_with('.')
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PersistError> {
    let tmp = path.with_extension("tmp");
    let mut f = File::create(&tmp).map_err(|e| PersistError::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| PersistError::io(&tmp, e))?;
    f.sync_all().map_err(|e| PersistError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| PersistError::io(path, e))?;
    if let Some(dir) = path.parent() {
        // best effort: not every platform can sync a directory
        let _ = File::open(dir).and_then(|d| d.sync_all());
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct DataDir {
    root: PathBuf,
}

impl DataDir {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, PersistError> {
        let root = root.into();
        for sub in ["documents", "corpora"] {
            let p = root.join(sub);
            fs::create_dir_all(&p).map_err(|e| PersistError::io(&p, e))?;
        }
        Ok(DataDir { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn doc_path(&self, id: &str) -> PathBuf {
        self.root.join("documents").join(format!("{id}.json"))
    }

    fn corpus_dir(&self, id: &str) -> PathBuf {
        self.root.join("corpora").join(id)
    }

    pub fn write_document(&self, rec: &DocumentRecord) -> Result<(), PersistError> {
        let path = self.doc_path(&rec.doc_id);
        let bytes = serde_json::to_vec_pretty(rec).map_err(|e| PersistError::format(&path, e))?;
        write_atomic(&path, &bytes)
    }

    pub fn load_documents(&self) -> Result<Vec<DocumentRecord>, PersistError> {
        let dir = self.root.join("documents");
        let mut out = Vec::new();
        for entry in fs::read_dir(&dir).map_err(|e| PersistError::io(&dir, e))? {
            let path = entry.map_err(|e| PersistError::io(&dir, e))?.path();
            if path.extension().is_none_or(|x| x != "json") {
                continue;
            }
            let bytes = fs::read(&path).map_err(|e| PersistError::io(&path, e))?;
            out.push(serde_json::from_slice(&bytes).map_err(|e| PersistError::format(&path, e))?);
        }
        out.sort_by(|a: &DocumentRecord, b| a.doc_id.cmp(&b.doc_id));
        Ok(out)
    }

    pub fn corpus_exists(&self, id: &str) -> bool {
        self.corpus_dir(id).is_dir()
    }

    /// Snapshot plus journal, compacted into a fresh snapshot. A torn final
    /// journal line (crash mid-append) is dropped; anything else malformed
    /// is an error.
    pub fn load_corpus(&self, id: &str, fresh: impl FnOnce() -> LineageStore) -> Result<LineageStore, PersistError> {
        let dir = self.corpus_dir(id);
        fs::create_dir_all(&dir).map_err(|e| PersistError::io(&dir, e))?;
        let snap = dir.join("store.json");
        let mut store = match fs::read_to_string(&snap) {
            Ok(s) => LineageStore::from_json(&s).map_err(|e| PersistError::format(&snap, e))?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => fresh(),
            Err(e) => return Err(PersistError::io(&snap, e)),
        };
        let journal = dir.join("journal.jsonl");
        match File::open(&journal) {
            Ok(f) => {
                let lines: Vec<String> = BufReader::new(f)
                    .lines()
                    .collect::<Result<_, _>>()
                    .map_err(|e| PersistError::io(&journal, e))?;
                let n = lines.len();
                for (i, line) in lines.iter().enumerate() {
                    if line.trim().is_empty() {
                        continue;
                    }
                    let entry: LineageEntry = match serde_json::from_str(line) {
                        Ok(e) => e,
                        Err(_) if i + 1 == n => break,
                        Err(e) => return Err(PersistError::format(&journal, format!("line {}: {e}", i + 1))),
                    };
                    store.apply_entry(entry).map_err(|e| PersistError::format(&journal, format!("line {}: {e}", i + 1)))?;
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(PersistError::io(&journal, e)),
        }
        self.write_snapshot(id, &store)?;
        Ok(store)
    }

    pub fn append_journal(&self, id: &str, entries: &[LineageEntry]) -> Result<(), PersistError> {
        if entries.is_empty() {
            return Ok(());
        }
        let path = self.corpus_dir(id).join("journal.jsonl");
        let mut buf = Vec::new();
        for e in entries {
            serde_json::to_writer(&mut buf, e).map_err(|err| PersistError::format(&path, err))?;
            buf.push(b'\n');
        }
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| PersistError::io(&path, e))?;
        f.write_all(&buf).map_err(|e| PersistError::io(&path, e))?;
        f.sync_all().map_err(|e| PersistError::io(&path, e))
    }

    /// Replaces the snapshot and empties the journal it now contains.
    pub fn write_snapshot(&self, id: &str, store: &LineageStore) -> Result<(), PersistError> {
        let dir = self.corpus_dir(id);
        fs::create_dir_all(&dir).map_err(|e| PersistError::io(&dir, e))?;
        write_atomic(&dir.join("store.json"), store.to_json().as_bytes())?;
        let journal = dir.join("journal.jsonl");
        File::create(&journal)
            .and_then(|f| f.sync_all())
            .map_err(|e| PersistError::io(&journal, e))
    }
}
