use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn deid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deid"))
        .args(args)
        .env_remove("LOGICAL_MODEL_URL")
        .env_remove("LOGICAL_DATA_DIR")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = deid(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

/// Compares against `tests/golden/<name>`; `UPDATE_GOLDEN=1` rewrites it.
fn golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "output differs from {}", path.display());
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn eval_report_formats_are_pinned() {
    let gold = fixture("gold.jsonl");
    let pred = fixture("pred.jsonl");
    let table = ok(&["eval", "--gold", s(&gold), "--pred", s(&pred), "--name", "partial"]);
    golden("eval_table.txt", &table);
    let json = ok(&["eval", "--gold", s(&gold), "--pred", s(&pred), "--name", "partial", "--format", "json"]);
    golden("eval_report.json", &json);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["solutions"][0]["instances"], 3);

    let dir = tempfile::tempdir().unwrap();
    ok(&["eval", "--gold", s(&gold), "--pred", s(&pred), "--name", "partial", "--out-dir", s(dir.path())]);
    assert_eq!(std::fs::read_to_string(dir.path().join("report.txt")).unwrap(), table);
    assert_eq!(std::fs::read_to_string(dir.path().join("report.json")).unwrap(), json);
}

#[test]
fn perfect_predictions_score_one() {
    let gold = fixture("gold.jsonl");
    let out = ok(&["eval", "--gold", s(&gold), "--pred", s(&gold), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let sol = &v["solutions"][0];
    for m in ["precision", "recall", "f1", "auroc", "accuracy"] {
        assert_eq!(sol["micro"][m], 1.0, "{m}");
    }
    assert_eq!(sol["entities"]["missed"], 0);
    let table = ok(&["eval", "--gold", s(&gold), "--pred", s(&gold)]);
    assert!(table.lines().last().unwrap().trim_end().ends_with("100.00"), "{table}");
    let strict = ok(&["eval", "--gold", s(&gold), "--pred", s(&gold), "--miss-mode", "same-label"]);
    assert!(strict.contains("Entities missed entirely"));
}

/// 376 notes, 1151 entities; 25 entities missed across 20 notes.
fn miss_fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let mut gold = String::new();
    let mut pred = String::new();
    for d in 0..376 {
        let n = if d == 375 { 26 } else { 3 };
        let missed = match d {
            0..5 => 2,
            5..20 => 1,
            _ => 0,
        };
        let mut text = String::new();
        let mut gs = Vec::new();
        let mut ps = Vec::new();
        for k in 0..n {
            text.push_str("seen ");
            let start = text.chars().count();
            text.push_str("Ravi");
            let span = serde_json::json!({"start": start, "end": start + 4, "label": "person"});
            gs.push(span.clone());
            if k >= missed {
                ps.push(span);
            }
            text.push_str(" today. ");
        }
        let id = format!("d{d:03}");
        let g = serde_json::json!({"doc_id": id, "text": text, "origin": "gold", "spans": gs});
        let p = serde_json::json!({"doc_id": id, "origin": "model", "spans": ps});
        writeln!(gold, "{g}").unwrap();
        writeln!(pred, "{p}").unwrap();
    }
    let (g, p) = (dir.join("gold.jsonl"), dir.join("pred.jsonl"));
    std::fs::write(&g, gold).unwrap();
    std::fs::write(&p, pred).unwrap();
    (g, p)
}

#[test]
fn miss_and_sanitization_percentages() {
    let dir = tempfile::tempdir().unwrap();
    let (g, p) = miss_fixture(dir.path());
    let table = ok(&["eval", "--gold", s(&g), "--pred", s(&p), "--name", "model"]);
    let summary = table.lines().last().unwrap();
    let cols: Vec<&str> = summary.split_whitespace().collect();
    assert_eq!(cols, ["model", "1151", "25", "2.17", "356", "376", "94.68"], "{table}");
}

#[test]
fn azure_scheme_marks_unsupported_labels() {
    let gold = fixture("gold.jsonl");
    let pred = fixture("pred.jsonl");
    let table = ok(&["eval", "--gold", s(&gold), "--pred", s(&pred), "--scheme", "azure_ner"]);
    let na = table.lines().filter(|l| l.contains("n/a*")).count();
    assert_eq!(na, 3, "{table}");
    let json = ok(&["eval", "--gold", s(&gold), "--pred", s(&pred), "--scheme", "azure_ner", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let supported = v["solutions"][0]["labels"].as_array().unwrap().iter().filter(|r| r["supported"] == true).count();
    assert_eq!(supported, 6);
    golden("eval_azure_table.txt", &table);
}

#[test]
fn schema_errors_exit_nonzero_with_locations() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(
        &bad,
        "{\"doc_id\":\"n1\",\"origin\":\"model\",\"spans\":[{\"start\":5,\"end\":500,\"label\":\"person\"}]}\n\nnot json\n{\"doc_id\":\"zz\",\"origin\":\"model\"}\n",
    )
    .unwrap();
    let o = deid(&["eval", "--gold", s(&fixture("gold.jsonl")), "--pred", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.jsonl:3:"), "{err}");

    std::fs::write(&bad, "{\"doc_id\":\"n1\",\"origin\":\"model\",\"spans\":[{\"start\":5,\"end\":500,\"label\":\"person\"}]}\n{\"doc_id\":\"zz\",\"origin\":\"model\"}\n").unwrap();
    let o = deid(&["eval", "--gold", s(&fixture("gold.jsonl")), "--pred", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.jsonl:1:") && err.contains("bad.jsonl:2:"), "{err}");

    // gold without text cannot be validated
    let nogold = dir.path().join("gold.jsonl");
    std::fs::write(&nogold, "{\"doc_id\":\"n1\",\"origin\":\"gold\",\"spans\":[]}\n").unwrap();
    let o = deid(&["eval", "--gold", s(&nogold), "--pred", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_inputs_give_empty_reports() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    let json = ok(&["eval", "--gold", s(&empty), "--pred", s(&empty), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["solutions"], serde_json::json!([]));
    let bench = ok(&["bench", s(&empty)]);
    let v: serde_json::Value = serde_json::from_str(&bench).unwrap();
    assert_eq!(v["non_model"]["documents"], 0);
    assert!(v["non_model"]["mean_seconds_per_word"].is_null());
}

#[test]
fn chunk_output_and_map_are_pinned() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("map.jsonl");
    let out = ok(&["--max-words", "6", "--overlap-words", "2", "chunk", s(&fixture("gold.jsonl")), "--map", s(&map)]);
    golden("chunks.jsonl", &out);
    golden("chunk_map.jsonl", &std::fs::read_to_string(&map).unwrap());
    assert!(out.lines().all(|l| l.contains("#")));
}

#[test]
fn detect_with_gazetteer_is_pinned_and_order_stable() {
    let texts = fixture("texts.jsonl");
    let one = ok(&["--jobs", "1", "detect", "--backend", "gazetteer", s(&texts)]);
    let four = ok(&["--jobs", "4", "detect", "--backend", "gazetteer", s(&texts)]);
    assert_eq!(one, four);
    golden("detect_gazetteer.jsonl", &one);
}

#[test]
fn model_url_comes_from_the_environment() {
    let texts = fixture("texts.jsonl");
    let o = Command::new(env!("CARGO_BIN_EXE_deid"))
        .args(["detect", s(&texts)])
        .env("LOGICAL_MODEL_URL", "http://127.0.0.1:9/detect")
        .output()
        .unwrap();
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("127.0.0.1:9"), "{err}");

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("deid.toml");
    std::fs::write(&cfg, "model_url = \"http://127.0.0.1:9/from-file\"\n").unwrap();
    let o = deid(&["--config", s(&cfg), "detect", "--backend", "model", s(&texts)]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("from-file"));
    let o = deid(&["detect", "--backend", "model", s(&texts)]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("no model server configured"));
}

#[test]
fn corpus_anonymization_continues_from_a_saved_store() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store.json");
    let gold = fixture("gold.jsonl");
    let first = ok(&["anonymize", "--scope", "corpus", s(&gold), "--store-out", s(&store)]);
    golden("anonymize_corpus.jsonl", &first);
    let texts: Vec<String> = first
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["text"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(texts[1], "Dr Person_3 at Company_1 reviewed MRN IdentificationNumber_1. Contact: EmailUrl_1");

    // a second pass over the same notes reuses every placeholder
    let again = ok(&["anonymize", "--scope", "corpus", s(&gold), "--store", s(&store)]);
    assert_eq!(again, first);

    // document scope derived from the store shares it without growing it
    let before = std::fs::read_to_string(&store).unwrap();
    let doc = ok(&["anonymize", "--scope", "document", s(&gold), "--store", s(&store)]);
    assert_eq!(doc.replace("\"scope\":\"document\"", "\"scope\":\"corpus\""), first);
    assert_eq!(std::fs::read_to_string(&store).unwrap(), before);
}

#[test]
fn pseudonymize_requires_a_seed_and_is_reproducible() {
    let gold = fixture("gold.jsonl");
    let o = deid(&["pseudonymize", s(&gold)]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("--seed"));

    let a = ok(&["--jobs", "1", "pseudonymize", "--seed", "7", s(&gold)]);
    let b = ok(&["--jobs", "3", "pseudonymize", "--seed", "7", s(&gold)]);
    assert_eq!(a, b);
    assert_ne!(a, ok(&["pseudonymize", "--seed", "8", s(&gold)]));
    golden("pseudonymize_seed7.jsonl", &a);

    // rewritten spans point at the replacements; untouched labels keep their text
    for line in a.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let text: Vec<char> = v["text"].as_str().unwrap().chars().collect();
        for sp in v["spans"].as_array().unwrap() {
            let (st, en) = (sp["start"].as_u64().unwrap() as usize, sp["end"].as_u64().unwrap() as usize);
            let surface: String = text[st..en].iter().collect();
            match sp["label"].as_str().unwrap() {
                "language" => assert_eq!(surface, "Kannada"),
                "groups" => assert_eq!(surface, "Muslim"),
                _ => assert!(!surface.trim().is_empty()),
            }
        }
    }
}

#[test]
fn pseudonymize_reads_a_resource_directory() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("names.txt"), "Zorawar\nYamini\n").unwrap();
    let out = ok(&["pseudonymize", "--seed", "1", "--resources", s(dir.path()), s(&fixture("gold.jsonl"))]);
    let n2: serde_json::Value = serde_json::from_str(out.lines().nth(1).unwrap()).unwrap();
    let t = n2["text"].as_str().unwrap();
    assert!(t.starts_with("Dr Zorawar ") || t.starts_with("Dr Yamini "), "{t}");
}

#[test]
fn bench_reports_every_document() {
    let out = ok(&["bench", s(&fixture("gold.jsonl"))]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["non_model"]["documents"], 3);
    assert_eq!(v["non_model"]["words"], 34);
    let ids: Vec<&str> = v["documents"].as_array().unwrap().iter().map(|d| d["doc_id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["n1", "n2", "n3"]);
    assert!(v.get("end_to_end").is_none());
}

#[test]
fn serve_refuses_public_bind_without_token() {
    let dir = tempfile::tempdir().unwrap();
    let o = deid(&["serve", "--data-dir", s(dir.path()), "--bind", "0.0.0.0:0", "--backend", "gazetteer"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("without an API token"));
    let o = deid(&["serve", "--backend", "gazetteer"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("LOGICAL_DATA_DIR"));
}
