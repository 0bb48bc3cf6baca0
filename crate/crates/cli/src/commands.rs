//! One function per subcommand. Each is a thin composition of library
//! operations; all batch output is ordered by doc_id.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{anyhow, bail, Context};
use deid_core::chunker::{chunk_annotations, ChunkMapEntry};
use deid_core::detect::{Detector, GazetteerConfig, GazetteerDetector, ModelServerClient, Scheme};
use deid_core::eval::{evaluate_solution, EvalInstance, EvalOptions, MissMode, Report};
use deid_core::format::AnnotationRecord;
use deid_core::lineage::{apply_replacements, CorpusSession, LineageStore, OffsetMap, ReplacementEvent};
use deid_core::pipeline::{detect_document, non_model_pipeline, summarize_timings, timed, DetectConfig, DocTiming, TimingSummary};
use deid_core::pseudo::{pseudonymize_document, DateMode, PseudoOptions, Resources};
use deid_core::text::CharText;
use deid_core::{
    chunk_document, resolve_overlaps, validate_annotation_set, ChunkParams, Document, Scope, SharedLineageStore,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::FileConfig;
use crate::io::{read_all, read_lines, sort_unique, write_lines, Located};

/// Effective settings after file, environment and flags are merged.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    pub file: FileConfig,
    pub jobs: Option<usize>,
}

impl Settings {
    pub fn pool(&self) -> anyhow::Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs.or(self.file.jobs).unwrap_or(0))
            .build()
            .context("starting worker pool")
    }

    pub fn chunk_params(&self) -> anyhow::Result<ChunkParams> {
        let d = ChunkParams::default();
        ChunkParams::new(
            self.file.max_words.unwrap_or(d.max_words),
            self.file.overlap_words.unwrap_or(d.overlap_words),
        )
        .map_err(|e| anyhow!("{e}"))
    }

    pub fn detect_config(&self) -> anyhow::Result<DetectConfig> {
        let mut c = DetectConfig {
            chunk: self.chunk_params()?,
            ..DetectConfig::default()
        };
        if let Some(t) = self.file.threshold {
            c.threshold = t;
        }
        Ok(c)
    }

    pub fn fuzzy_threshold(&self) -> f64 {
        self.file.fuzzy_threshold.unwrap_or(deid_core::lineage::DEFAULT_FUZZY_THRESHOLD)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// The model server when a URL is configured, otherwise the gazetteer.
    Auto,
    Model,
    Gazetteer,
}

pub fn detector(s: &Settings, backend: Backend) -> anyhow::Result<Arc<dyn Detector>> {
    let timeout = Duration::from_secs(s.file.model_timeout_secs.unwrap_or(60));
    match (backend, &s.file.model_url) {
        (Backend::Model, None) => bail!("no model server configured (set model_url or {})", crate::config::ENV_MODEL_URL),
        (Backend::Model | Backend::Auto, Some(url)) => Ok(Arc::new(ModelServerClient::new(url.clone(), timeout))),
        (Backend::Gazetteer | Backend::Auto, _) => {
            let cfg = match &s.file.gazetteer {
                Some(p) => GazetteerConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
                None => GazetteerConfig::builtin(),
            };
            Ok(Arc::new(GazetteerDetector::new(&cfg)?))
        }
    }
}

#[derive(Debug, Deserialize)]
struct TextRecord {
    doc_id: String,
    text: String,
}

fn documents(path: &Path) -> anyhow::Result<Vec<Located<TextRecord>>> {
    sort_unique(path, read_all(path)?, |r: &TextRecord| &r.doc_id)
}

/// Annotation records that carry their text.
fn annotated(path: &Path) -> anyhow::Result<Vec<(Document, AnnotationRecord)>> {
    let recs = sort_unique(path, read_all::<AnnotationRecord>(path)?, |r| &r.doc_id)?;
    let mut out = Vec::with_capacity(recs.len());
    let mut problems = Vec::new();
    for r in recs {
        let Some(doc) = r.value.document() else {
            problems.push(format!("{}:{}: record has no text", path.display(), r.line));
            continue;
        };
        for v in validate_annotation_set(&doc, &r.value.to_set()) {
            problems.push(format!("{}:{}: {v}", path.display(), r.line));
        }
        out.push((doc, r.value));
    }
    if !problems.is_empty() {
        bail!("{}", problems.join("\n"));
    }
    Ok(out)
}

// ---- chunk ----

pub fn chunk(s: &Settings, input: &Path, out: Option<&Path>, map_out: &Path) -> anyhow::Result<()> {
    let params = s.chunk_params()?;
    let docs = annotated(input)?;
    let mut records = Vec::new();
    let mut map: Vec<ChunkMapEntry> = Vec::new();
    for (doc, rec) in &docs {
        let chunks = chunk_document(doc, params)?;
        let (sets, warnings) = chunk_annotations(&chunks, &rec.to_set());
        for w in warnings {
            eprintln!("warning: {}: {w:?}", doc.id);
        }
        for (c, set) in chunks.iter().zip(&sets) {
            records.push(AnnotationRecord::from_set(set, Some(&c.text)));
            map.push(c.map_entry());
        }
    }
    write_lines(out, &records)?;
    write_lines(Some(map_out), &map)
}

// ---- detect ----

pub fn detect(s: &Settings, backend: Backend, input: &Path, out: Option<&Path>) -> anyhow::Result<()> {
    let det = detector(s, backend)?;
    let cfg = s.detect_config()?;
    let docs = documents(input)?;
    let results: Vec<anyhow::Result<AnnotationRecord>> = s.pool()?.install(|| {
        docs.par_iter()
            .map(|r| {
                let doc = Document::new(r.value.doc_id.clone(), r.value.text.clone());
                let d = detect_document(&doc, det.as_ref(), &cfg).with_context(|| format!("doc {}", doc.id))?;
                for w in &d.warnings {
                    eprintln!("warning: {}: {w:?}", doc.id);
                }
                Ok(AnnotationRecord::from_set(&d.set, Some(&doc.text)))
            })
            .collect()
    });
    let records = results.into_iter().collect::<anyhow::Result<Vec<_>>>()?;
    write_lines(out, &records)
}

// ---- anonymize ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnonymizedRecord {
    pub doc_id: String,
    pub scope: Scope,
    pub text: String,
    pub events: Vec<ReplacementEvent>,
    pub offset_map: OffsetMap,
}

pub struct AnonymizeArgs<'a> {
    pub input: &'a Path,
    pub out: Option<&'a Path>,
    pub scope: Scope,
    pub store: Option<&'a Path>,
    pub store_out: Option<&'a Path>,
}

fn load_store(path: &Path) -> anyhow::Result<LineageStore> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    LineageStore::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn anonymize(s: &Settings, a: AnonymizeArgs) -> anyhow::Result<()> {
    let docs = annotated(a.input)?;
    let base = match a.store {
        Some(p) => Some(load_store(p)?),
        None => None,
    };
    let records: Vec<AnonymizedRecord> = match a.scope {
        Scope::Document => {
            let fresh = || match &base {
                Some(b) => b.derive_document_store(),
                None => LineageStore::new(Scope::Document).with_fuzzy_threshold(s.fuzzy_threshold()),
            };
            let rs: Vec<anyhow::Result<AnonymizedRecord>> = s.pool()?.install(|| {
                docs.par_iter()
                    .map(|(doc, rec)| {
                        let mut store = fresh();
                        let rw = apply_replacements(doc, &resolve_overlaps(&rec.to_set()), &mut store)?;
                        Ok(AnonymizedRecord {
                            doc_id: doc.id.clone(),
                            scope: Scope::Document,
                            text: rw.text,
                            events: rw.events,
                            offset_map: rw.offset_map,
                        })
                    })
                    .collect()
            });
            rs.into_iter().collect::<anyhow::Result<_>>()?
        }
        Scope::Corpus => {
            let store = match base {
                Some(b) if b.scope() != Scope::Corpus => bail!("{}: not a corpus-scope store", a.store.unwrap().display()),
                Some(b) => b,
                None => LineageStore::new(Scope::Corpus).with_fuzzy_threshold(s.fuzzy_threshold()),
            };
            let shared = SharedLineageStore::new(store);
            // ordinals follow doc_id order, so this stays sequential
            let mut out = Vec::with_capacity(docs.len());
            for (doc, rec) in &docs {
                let mut session = CorpusSession::new(&shared);
                let rw = apply_replacements(doc, &resolve_overlaps(&rec.to_set()), &mut session)?;
                out.push(AnonymizedRecord {
                    doc_id: doc.id.clone(),
                    scope: Scope::Corpus,
                    text: rw.text,
                    events: rw.events,
                    offset_map: rw.offset_map,
                });
            }
            match a.store_out.or(a.store) {
                Some(p) => std::fs::write(p, shared.snapshot().to_json()).with_context(|| format!("writing {}", p.display()))?,
                None => eprintln!("note: corpus store not saved (pass --store-out to keep it)"),
            }
            out
        }
    };
    write_lines(a.out, &records)
}

// ---- pseudonymize ----

pub fn pseudonymize(
    s: &Settings,
    input: &Path,
    out: Option<&Path>,
    seed: u64,
    resources: Option<&Path>,
    date_mode: DateMode,
) -> anyhow::Result<()> {
    let res = match resources.or(s.file.resources.as_deref()) {
        Some(dir) => Resources::from_dir(dir).with_context(|| format!("loading resources from {}", dir.display()))?,
        None => Resources::builtin(),
    };
    let docs = annotated(input)?;
    let opts = PseudoOptions { date_mode };
    let rs: Vec<anyhow::Result<AnnotationRecord>> = s.pool()?.install(|| {
        docs.par_iter()
            .map(|(doc, rec)| {
                let p = pseudonymize_document(doc, &rec.to_set(), seed, &res, opts).with_context(|| format!("doc {}", doc.id))?;
                Ok(AnnotationRecord::from_set(&p.annotation_set(&doc.id, rec.origin), Some(&p.text)))
            })
            .collect()
    });
    let records = rs.into_iter().collect::<anyhow::Result<Vec<_>>>()?;
    write_lines(out, &records)
}

// ---- eval ----

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Json,
}

pub struct EvalArgs<'a> {
    pub gold: &'a Path,
    pub preds: &'a [PathBuf],
    pub schemes: &'a [Scheme],
    pub names: &'a [String],
    pub miss_mode: MissMode,
    pub out_dir: Option<&'a Path>,
    pub format: ReportFormat,
}

/// Schema problems, reported as `file:line: message`.
#[derive(Debug)]
pub struct SchemaErrors(pub Vec<String>);

impl std::fmt::Display for SchemaErrors {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0.join("\n"))
    }
}

impl std::error::Error for SchemaErrors {}

fn gold_documents(path: &Path, errors: &mut Vec<String>) -> anyhow::Result<BTreeMap<String, (Document, AnnotationRecord)>> {
    let mut out = BTreeMap::new();
    let recs = match read_lines::<AnnotationRecord>(path)? {
        Ok(r) => r,
        Err(e) => {
            errors.extend(e);
            return Ok(out);
        }
    };
    for r in recs {
        let at = format!("{}:{}", path.display(), r.line);
        let Some(doc) = r.value.document() else {
            errors.push(format!("{at}: gold record has no text; offsets cannot be validated"));
            continue;
        };
        for v in validate_annotation_set(&doc, &r.value.to_set()) {
            errors.push(format!("{at}: {v}"));
        }
        if out.insert(doc.id.clone(), (doc, r.value)).is_some() {
            errors.push(format!("{at}: duplicate doc_id"));
        }
    }
    Ok(out)
}

fn solution_instances(
    path: &Path,
    gold: &BTreeMap<String, (Document, AnnotationRecord)>,
    errors: &mut Vec<String>,
) -> anyhow::Result<Vec<EvalInstance>> {
    let recs = match read_lines::<AnnotationRecord>(path)? {
        Ok(r) => r,
        Err(e) => {
            errors.extend(e);
            return Ok(Vec::new());
        }
    };
    let mut preds = BTreeMap::new();
    for r in recs {
        let at = format!("{}:{}", path.display(), r.line);
        let Some((doc, _)) = gold.get(&r.value.doc_id) else {
            errors.push(format!("{at}: doc_id {:?} is not in the gold file", r.value.doc_id));
            continue;
        };
        if let Some(t) = &r.value.text {
            if *t != doc.text {
                errors.push(format!("{at}: text differs from the gold text"));
                continue;
            }
        }
        for v in validate_annotation_set(doc, &r.value.to_set()) {
            errors.push(format!("{at}: {v}"));
        }
        if preds.insert(r.value.doc_id.clone(), r.value).is_some() {
            errors.push(format!("{at}: duplicate doc_id"));
        }
    }
    // a gold document with no prediction line predicted nothing
    Ok(gold
        .iter()
        .map(|(id, (doc, g))| {
            let pred = preds
                .get(id)
                .map(|p| p.to_set())
                .unwrap_or_else(|| deid_core::AnnotationSet::empty(id.clone(), deid_core::Source::Model));
            EvalInstance {
                doc_id: id.clone(),
                doc_len: CharText::new(&doc.text).len(),
                gold: g.to_set(),
                pred,
            }
        })
        .collect())
}

/// Builds the report; schema problems come back as [`SchemaErrors`].
pub fn eval_report(s: &Settings, a: &EvalArgs) -> anyhow::Result<Report> {
    if a.schemes.len() > 1 && a.schemes.len() != a.preds.len() {
        bail!("give one --scheme for all predictions or one per --pred");
    }
    if !a.names.is_empty() && a.names.len() != a.preds.len() {
        bail!("give one --name per --pred");
    }
    let mut errors = Vec::new();
    let gold = gold_documents(a.gold, &mut errors)?;
    let mut solutions = Vec::new();
    for p in a.preds {
        solutions.push(solution_instances(p, &gold, &mut errors)?);
    }
    if !errors.is_empty() {
        return Err(SchemaErrors(errors).into());
    }
    let opts = EvalOptions { miss_mode: a.miss_mode };
    let reports = s.pool()?.install(|| {
        solutions
            .iter()
            .enumerate()
            .filter(|(_, inst)| !inst.is_empty())
            .map(|(i, inst)| {
                let scheme = a.schemes.get(i).or(a.schemes.first()).copied().unwrap_or(Scheme::Native);
                let name = a.names.get(i).cloned().unwrap_or_else(|| solution_name(&a.preds[i]));
                evaluate_solution::<f64>(&name, scheme, inst, opts)
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(Report::new(&reports))
}

fn solution_name(p: &Path) -> String {
    p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned())
}

pub fn eval(s: &Settings, a: &EvalArgs) -> anyhow::Result<()> {
    let report = eval_report(s, a)?;
    let json = report.to_json() + "\n";
    let table = report.render_table();
    match a.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            std::fs::write(dir.join("report.json"), &json)?;
            std::fs::write(dir.join("report.txt"), &table)?;
        }
        None => match a.format {
            ReportFormat::Table => print!("{table}"),
            ReportFormat::Json => print!("{json}"),
        },
    }
    Ok(())
}

// ---- bench ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub non_model: TimingSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_to_end: Option<TimingSummary>,
    pub documents: Vec<DocTiming>,
}

pub fn bench_report(s: &Settings, input: &Path, with_model: bool) -> anyhow::Result<BenchReport> {
    let params = s.chunk_params()?;
    let docs = annotated(input)?;
    let words = |d: &Document| CharText::new(&d.text).words().len();
    let pool = s.pool()?;
    let timings: Vec<anyhow::Result<DocTiming>> = pool.install(|| {
        docs.par_iter()
            .map(|(doc, rec)| {
                let mut store = LineageStore::new(Scope::Document).with_fuzzy_threshold(s.fuzzy_threshold());
                let (r, t) = timed(|| non_model_pipeline(doc, &rec.to_set(), params, &mut store));
                r.with_context(|| format!("doc {}", doc.id))?;
                Ok(DocTiming {
                    doc_id: doc.id.clone(),
                    words: words(doc),
                    seconds: t.as_secs_f64(),
                })
            })
            .collect()
    });
    let timings = timings.into_iter().collect::<anyhow::Result<Vec<_>>>()?;

    let end_to_end = if with_model {
        let det = detector(s, Backend::Model)?;
        let cfg = s.detect_config()?;
        let mut e2e = Vec::with_capacity(docs.len());
        // documents run one at a time so each timing covers a whole request cycle
        for (doc, _) in &docs {
            let (r, t) = timed(|| -> anyhow::Result<()> {
                let d = detect_document(doc, det.as_ref(), &cfg)?;
                let mut store = LineageStore::new(Scope::Document);
                apply_replacements(doc, &resolve_overlaps(&d.set), &mut store)?;
                Ok(())
            });
            r.with_context(|| format!("doc {}", doc.id))?;
            e2e.push(DocTiming {
                doc_id: doc.id.clone(),
                words: words(doc),
                seconds: t.as_secs_f64(),
            });
        }
        Some(summarize_timings(&e2e))
    } else {
        None
    };
    Ok(BenchReport {
        non_model: summarize_timings(&timings),
        end_to_end,
        documents: timings,
    })
}

pub fn bench(s: &Settings, input: &Path, out: Option<&Path>, with_model: bool) -> anyhow::Result<()> {
    let r = bench_report(s, input, with_model)?;
    let mut w = crate::io::create_out(out)?;
    serde_json::to_writer_pretty(&mut w, &r)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

// ---- serve ----

pub struct ServeArgs {
    pub data_dir: Option<PathBuf>,
    pub bind: Option<String>,
    pub token: Option<String>,
    pub purge_originals: bool,
    pub backend: Backend,
}

pub fn serve(s: &Settings, a: ServeArgs) -> anyhow::Result<()> {
    let data_dir = a
        .data_dir
        .or_else(|| s.file.data_dir.clone())
        .ok_or_else(|| anyhow!("no data directory (pass --data-dir or set {})", crate::config::ENV_DATA_DIR))?;
    let mut cfg = deid_service::ServiceConfig::new(data_dir);
    if let Some(b) = a.bind.or_else(|| s.file.serve.bind.clone()) {
        cfg.bind = b.parse().with_context(|| format!("bad bind address {b:?}"))?;
    }
    cfg.token = a.token.or_else(|| s.file.serve.token.clone());
    cfg.purge_originals = a.purge_originals || s.file.serve.purge_originals.unwrap_or(false);
    if let Some(m) = s.file.serve.max_chars {
        cfg.max_chars = m;
    }
    cfg.detect = s.detect_config()?;
    cfg.fuzzy_threshold = s.fuzzy_threshold();
    let det = detector(s, a.backend)?;
    eprintln!("detector: {}", det.name());
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(deid_service::serve(cfg, det))?;
    Ok(())
}
