use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use axum::extract::{DefaultBodyLimit, Path, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::Response;
use axum::routing::{get, post, put};
use axum::{Json, Router};
use chrono::Utc;
use deid_core::chunker::{BoundaryWarning, ChunkMapEntry};
use deid_core::detect::Detector;
use deid_core::lineage::{
    apply_replacements, CorpusSession, LineageStore, OffsetMap, ReplacementEvent, StoreRecord,
};
use deid_core::pipeline::detect_document;
use deid_core::{Document, EntitySpan, Scope, SharedLineageStore};
use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

use crate::config::ServiceConfig;
use crate::error::ApiError;
use crate::persist::{valid_id, DataDir, PersistError};
use crate::state::{Anonymized, Decision, DocumentRecord, ReviewRequest, Status};

pub const API_VERSION: &str = "v1";

struct Corpus {
    store: SharedLineageStore,
    /// Serializes minting and journaling for this corpus.
    io: tokio::sync::Mutex<()>,
}

struct Inner {
    config: ServiceConfig,
    detector: Arc<dyn Detector>,
    data: DataDir,
    docs: RwLock<HashMap<String, Arc<tokio::sync::Mutex<DocumentRecord>>>>,
    corpora: Mutex<HashMap<String, Arc<Corpus>>>,
}

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    /// Opens the data directory and loads every document and corpus store.
    pub fn open(config: ServiceConfig, detector: Arc<dyn Detector>) -> Result<Self, PersistError> {
        let data = DataDir::open(&config.data_dir)?;
        let docs = data
            .load_documents()?
            .into_iter()
            .map(|d| (d.doc_id.clone(), Arc::new(tokio::sync::Mutex::new(d))))
            .collect();
        Ok(AppState(Arc::new(Inner {
            config,
            detector,
            data,
            docs: RwLock::new(docs),
            corpora: Mutex::new(HashMap::new()),
        })))
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.0.config
    }

    fn doc(&self, id: &str) -> Result<Arc<tokio::sync::Mutex<DocumentRecord>>, ApiError> {
        self.0
            .docs
            .read()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(format!("document {id:?}")))
    }

    fn corpus(&self, id: &str, create: bool) -> Result<Arc<Corpus>, ApiError> {
        let mut map = self.0.corpora.lock();
        if let Some(c) = map.get(id) {
            return Ok(c.clone());
        }
        if !create && !self.0.data.corpus_exists(id) {
            return Err(ApiError::NotFound(format!("corpus {id:?}")));
        }
        let t = self.0.config.fuzzy_threshold;
        let store = self.0.data.load_corpus(id, || LineageStore::new(Scope::Corpus).with_fuzzy_threshold(t))?;
        let c = Arc::new(Corpus {
            store: SharedLineageStore::new(store),
            io: tokio::sync::Mutex::new(()),
        });
        map.insert(id.to_string(), c.clone());
        Ok(c)
    }

    /// Replays every anonymized document's events against its original
    /// text; returns the ids that do not reproduce the stored output.
    pub async fn verify_replay(&self) -> Vec<String> {
        let docs: Vec<_> = self.0.docs.read().values().cloned().collect();
        let mut bad = Vec::new();
        for d in docs {
            let d = d.lock().await;
            if let (Some(text), Some(a)) = (&d.text, &d.anonymized) {
                match deid_core::lineage::replay_events(text, &a.events) {
                    Ok(t) if t == a.text => {}
                    _ => bad.push(d.doc_id.clone()),
                }
            }
        }
        bad.sort();
        bad
    }
}

pub fn router(state: AppState) -> Router {
    let limit = state.config().max_chars.saturating_mul(4) + 64 * 1024;
    let v1 = Router::new()
        .route("/documents", post(create_document))
        .route("/documents/{id}", get(get_document))
        .route("/documents/{id}/detections", get(get_detections))
        .route("/documents/{id}/review", put(put_review))
        .route("/documents/{id}/anonymize", post(anonymize))
        .route("/corpora/{id}/lineage", get(get_lineage).put(put_lineage))
        .route_layer(middleware::from_fn_with_state(state.clone(), require_token));
    Router::new()
        .route("/healthz", get(healthz))
        .nest("/v1", v1)
        .layer(DefaultBodyLimit::max(limit))
        .with_state(state)
}

fn same_token(a: &str, b: &str) -> bool {
    a.len() == b.len() && a.bytes().zip(b.bytes()).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

async fn require_token(State(state): State<AppState>, req: Request, next: Next) -> Result<Response, ApiError> {
    if let Some(token) = &state.config().token {
        let given = req
            .headers()
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "));
        if !given.is_some_and(|g| same_token(g, token)) {
            return Err(ApiError::Unauthorized);
        }
    }
    Ok(next.run(req).await)
}

// ---- views ----

#[derive(Debug, Serialize, Deserialize)]
pub struct SpanView {
    pub id: u32,
    #[serde(flatten)]
    pub span: EntitySpan,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision: Option<Decision>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AnonymizedView {
    pub scope: Scope,
    pub text: String,
    pub events: Vec<ReplacementEvent>,
    pub offset_map: OffsetMap,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DocumentView {
    pub doc_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_id: Option<String>,
    pub status: Status,
    pub version: u64,
    pub char_len: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    pub detections: Vec<SpanView>,
    pub added: Vec<EntitySpan>,
    pub final_spans: Vec<EntitySpan>,
    pub chunks: Vec<ChunkMapEntry>,
    pub warnings: Vec<BoundaryWarning>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anonymized: Option<AnonymizedView>,
}

fn span_views(d: &DocumentRecord) -> Vec<SpanView> {
    d.model_spans
        .iter()
        .map(|m| SpanView {
            id: m.id,
            surface: d.surface(&m.span),
            decision: d.decisions.get(&m.id).cloned(),
            span: m.span.clone(),
        })
        .collect()
}

fn view(d: &DocumentRecord) -> DocumentView {
    DocumentView {
        doc_id: d.doc_id.clone(),
        corpus_id: d.corpus_id.clone(),
        status: d.status,
        version: d.version,
        char_len: d.char_len,
        text: d.text.clone(),
        detections: span_views(d),
        added: d.added.clone(),
        final_spans: d.final_spans().spans,
        chunks: d.chunks.clone(),
        warnings: d.warnings.clone(),
        anonymized: d.anonymized.as_ref().map(|a| AnonymizedView {
            scope: a.scope,
            text: a.text.clone(),
            events: a.events.clone(),
            offset_map: a.offset_map.clone(),
        }),
    }
}

// ---- handlers ----

async fn healthz(State(state): State<AppState>) -> Json<serde_json::Value> {
    Json(serde_json::json!({
        "status": "ok",
        "api": API_VERSION,
        "detector": state.0.detector.name(),
        "documents": state.0.docs.read().len(),
    }))
}

#[derive(Debug, Deserialize)]
pub struct CreateDocument {
    pub text: String,
    #[serde(default)]
    pub doc_id: Option<String>,
    #[serde(default)]
    pub corpus_id: Option<String>,
}

async fn create_document(
    State(state): State<AppState>,
    Json(req): Json<CreateDocument>,
) -> Result<(StatusCode, Json<DocumentView>), ApiError> {
    let cfg = state.config();
    if req.text.trim().is_empty() {
        return Err(ApiError::validation("text must not be empty"));
    }
    let n = req.text.chars().count();
    if n > cfg.max_chars {
        return Err(ApiError::validation(format!("text has {n} characters; the limit is {}", cfg.max_chars)));
    }
    let doc_id = req.doc_id.unwrap_or_else(|| uuid::Uuid::new_v4().to_string());
    for id in std::iter::once(&doc_id).chain(req.corpus_id.as_ref()) {
        if !valid_id(id) {
            return Err(ApiError::validation(format!("invalid id {id:?}: use 1-128 of [A-Za-z0-9._-]")));
        }
    }
    if state.0.docs.read().contains_key(&doc_id) {
        return Err(ApiError::Conflict(format!("document {doc_id:?} already exists")));
    }
    if let Some(c) = &req.corpus_id {
        state.corpus(c, true)?;
    }

    let doc = Document::new(doc_id.clone(), req.text);
    let detector = state.0.detector.clone();
    let dcfg = cfg.detect.clone();
    let (doc, detected) = tokio::task::spawn_blocking(move || {
        let r = detect_document(&doc, detector.as_ref(), &dcfg);
        (doc, r)
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))?;
    let detected = detected.map_err(|e| ApiError::from_pipeline(e, cfg.retry_after_secs))?;

    let mut rec = DocumentRecord::new(doc_id.clone(), req.corpus_id, doc.text, &detected.set);
    rec.chunks = detected.chunks;
    rec.warnings = detected.warnings;
    let mut docs = state.0.docs.write();
    if docs.contains_key(&doc_id) {
        return Err(ApiError::Conflict(format!("document {doc_id:?} already exists")));
    }
    state.0.data.write_document(&rec)?;
    let v = view(&rec);
    docs.insert(doc_id, Arc::new(tokio::sync::Mutex::new(rec)));
    Ok((StatusCode::CREATED, Json(v)))
}

async fn get_document(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<DocumentView>, ApiError> {
    let d = state.doc(&id)?;
    let d = d.lock().await;
    Ok(Json(view(&d)))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DetectionsView {
    pub doc_id: String,
    pub status: Status,
    pub version: u64,
    pub spans: Vec<SpanView>,
    pub warnings: Vec<BoundaryWarning>,
}

async fn get_detections(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<DetectionsView>, ApiError> {
    let d = state.doc(&id)?;
    let d = d.lock().await;
    Ok(Json(DetectionsView {
        doc_id: d.doc_id.clone(),
        status: d.status,
        version: d.version,
        spans: span_views(&d),
        warnings: d.warnings.clone(),
    }))
}

async fn put_review(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<ReviewRequest>,
) -> Result<Json<DocumentView>, ApiError> {
    let d = state.doc(&id)?;
    let mut d = d.lock().await;
    let mut next = d.clone();
    if next.apply_review(&req)? {
        state.0.data.write_document(&next)?;
        *d = next;
    }
    Ok(Json(view(&d)))
}

#[derive(Debug, Deserialize)]
pub struct AnonymizeParams {
    #[serde(default = "default_scope")]
    pub scope: Scope,
    /// Compute the rewrite without recording it or minting placeholders.
    #[serde(default)]
    pub preview: bool,
}

fn default_scope() -> Scope {
    Scope::Document
}

async fn anonymize(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(p): Query<AnonymizeParams>,
) -> Result<Json<AnonymizedView>, ApiError> {
    let d = state.doc(&id)?;
    let mut d = d.lock().await;
    match d.status {
        Status::Anonymized => return Err(ApiError::Conflict(format!("document {id:?} is already anonymized"))),
        Status::Pending if !p.preview => return Err(ApiError::Conflict(format!("document {id:?} has not been reviewed"))),
        _ => {}
    }
    let doc = d.document().ok_or_else(|| ApiError::Conflict("original text has been purged".into()))?;
    let spans = d.final_spans();
    let corpus = match (&d.corpus_id, p.scope) {
        (Some(c), _) => Some((c.clone(), state.corpus(c, true)?)),
        (None, Scope::Corpus) => return Err(ApiError::validation("corpus scope needs a document with a corpus_id")),
        (None, Scope::Document) => None,
    };

    let rewrite = match (p.scope, &corpus) {
        (Scope::Document, _) => {
            let mut store = match &corpus {
                Some((_, c)) => c.store.with(|s| s.derive_document_store()),
                None => LineageStore::new(Scope::Document).with_fuzzy_threshold(state.config().fuzzy_threshold),
            };
            apply_replacements(&doc, &spans, &mut store).map_err(|e| ApiError::Internal(e.to_string()))?
        }
        (Scope::Corpus, Some((cid, c))) => {
            let _io = c.io.lock().await;
            let before = c.store.snapshot();
            let mut session = CorpusSession::new(&c.store);
            let rw = apply_replacements(&doc, &spans, &mut session);
            let minted = session.into_minted();
            let rw = match rw {
                Ok(rw) => rw,
                Err(e) => {
                    c.store.replace(before);
                    return Err(ApiError::Internal(e.to_string()));
                }
            };
            if p.preview {
                c.store.replace(before);
            } else if let Err(e) = state.0.data.append_journal(cid, &minted) {
                c.store.replace(before);
                return Err(e.into());
            }
            rw
        }
        (Scope::Corpus, None) => unreachable!("checked above"),
    };

    let out = AnonymizedView {
        scope: p.scope,
        text: rewrite.text,
        events: rewrite.events,
        offset_map: rewrite.offset_map,
    };
    if p.preview {
        return Ok(Json(out));
    }
    let mut next = d.clone();
    next.mark_anonymized(
        Anonymized {
            scope: out.scope,
            text: out.text.clone(),
            events: out.events.clone(),
            offset_map: out.offset_map.clone(),
            at: Utc::now(),
        },
        state.config().purge_originals,
    );
    state.0.data.write_document(&next)?;
    *d = next;
    Ok(Json(out))
}

async fn get_lineage(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<StoreRecord>, ApiError> {
    if !valid_id(&id) {
        return Err(ApiError::NotFound(format!("corpus {id:?}")));
    }
    let c = state.corpus(&id, false)?;
    let rec = c.store.with(|s| s.export());
    Ok(Json(rec))
}

/// Replaces a corpus store. Counters may only move forward, so
/// placeholders already issued can never be re-minted for other surfaces.
async fn put_lineage(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(rec): Json<StoreRecord>,
) -> Result<Json<StoreRecord>, ApiError> {
    if !valid_id(&id) {
        return Err(ApiError::validation(format!("invalid corpus id {id:?}")));
    }
    let store = LineageStore::import(rec).map_err(|e| ApiError::validation(e.to_string()))?;
    if store.scope() != Scope::Corpus {
        return Err(ApiError::validation("a corpus store must have corpus scope"));
    }
    let c = state.corpus(&id, true)?;
    let _io = c.io.lock().await;
    let current = c.store.snapshot();
    let regressed: BTreeMap<_, _> = current
        .counters()
        .iter()
        .filter(|(l, n)| store.counter(**l) < **n)
        .map(|(l, n)| (l.to_string(), (*n, store.counter(*l))))
        .collect();
    if !regressed.is_empty() {
        let list: Vec<String> = regressed.iter().map(|(l, (a, b))| format!("{l}: {a} -> {b}")).collect();
        return Err(ApiError::Conflict(format!("counters would regress ({})", list.join(", "))));
    }
    state.0.data.write_snapshot(&id, &store)?;
    let out = store.export();
    c.store.replace(store);
    Ok(Json(out))
}
