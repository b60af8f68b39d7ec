use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const CORPUS: &str = r#"{"id": "fox", "text": "the quick brown fox jumps over the lazy dog near the river bank", "meta": {"author": "Ann Writer", "title": "River Fox"}}
{"id": "cat", "text": "a small grey cat sleeps on the warm kitchen floor all afternoon"}
{"id": "bird", "text": "bright birds sing loudly in the tall green trees every morning"}
"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_remixtrace"));
    c.env_remove("REMIXTRACE_THREADS").env_remove("RUST_LOG");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Setup {
    dir: TempDir,
    index: PathBuf,
}

impl Setup {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        let corpus = dir.path().join("corpus.jsonl");
        fs::write(&corpus, CORPUS).unwrap();
        let index = dir.path().join("index");
        let out = run(&["index", "build", "--corpus", p(&corpus), "--out", p(&index)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let manifest: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(manifest["doc_count"], 3);
        Setup { dir, index }
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let path = self.dir.path().join(name);
        fs::write(&path, text).unwrap();
        path
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn reports(dir: &Path, ext: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == ext))
        .collect();
    v.sort();
    v
}

#[test]
fn analyze_writes_report() {
    let s = Setup::new();
    let input = s.write("essay.txt", "I saw the quick brown fox jumps over the lazy dog yesterday");
    let out_dir = s.path("out");
    let out = run(&["analyze", "--index", p(&s.index), "--out", p(&out_dir), p(&input)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let files = reports(&out_dir, "json");
    assert_eq!(files.len(), 1);
    let name = files[0].file_name().unwrap().to_str().unwrap();
    assert!(name.starts_with("essay-") && name.len() == "essay-".len() + 12 + ".json".len(), "{name}");
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&files[0]).unwrap()).unwrap();
    for key in ["id", "l_uniqueness", "creativity_index", "spans", "config", "oracle_stats"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    assert_eq!(report["spans"][0]["kind"], "exact");
    assert_eq!(report["spans"][0]["source_docs"][0], "fox");
    assert!(!out_dir.join("errors.jsonl").exists());
    assert!(out_dir.join("run.log").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let s = Setup::new();
    let input = s.write("q.jsonl", "{\"id\": \"a\", \"text\": \"the lazy dog near the river bank sleeps\"}\n{\"id\": \"b\", \"text\": \"cat sleeps on the warm kitchen floor\"}\n");
    let (a, b) = (s.path("a"), s.path("b"));
    for dir in [&a, &b] {
        let out = run(&["analyze", "--index", p(&s.index), "--out", p(dir), "--format", "both", p(&input)]);
        assert!(out.status.success());
    }
    let (ra, rb) = (reports(&a, "json"), reports(&b, "json"));
    assert_eq!(ra.len(), 2);
    for (x, y) in ra.iter().zip(&rb) {
        assert_eq!(x.file_name(), y.file_name());
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
    }
    let html = fs::read_to_string(&reports(&a, "html")[0]).unwrap();
    assert!(html.contains("<mark class=\"exact\""));
}

#[test]
fn semantic_without_embeddings_exits_2_without_output() {
    let s = Setup::new();
    let input = s.write("x.txt", "some words here and there today");
    let out_dir = s.path("out");
    let out = run(&["analyze", "--index", p(&s.index), "--out", p(&out_dir), "--semantic", p(&input)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.exists());
}

#[test]
fn missing_index_exits_2() {
    let s = Setup::new();
    let input = s.write("x.txt", "some words here and there today");
    let out_dir = s.path("out");
    let out = run(&["analyze", "--index", p(&s.path("nope")), "--out", p(&out_dir), p(&input)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.exists());
}

#[test]
fn failed_input_gets_error_record() {
    let s = Setup::new();
    let good = s.write("good.txt", "bright birds sing loudly in the tall green trees");
    let missing = s.path("missing.txt");
    let out_dir = s.path("out");
    let out = run(&["analyze", "--index", p(&s.index), "--out", p(&out_dir), p(&good), p(&missing)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(reports(&out_dir, "json").len(), 1);
    let errors = fs::read_to_string(out_dir.join("errors.jsonl")).unwrap();
    assert_eq!(errors.lines().count(), 1);
    let rec: serde_json::Value = serde_json::from_str(errors.lines().next().unwrap()).unwrap();
    assert!(rec["input"].as_str().unwrap().ends_with("missing.txt"));
}

#[test]
fn config_file_precedence() {
    let s = Setup::new();
    let input = s.write("x.txt", "the quick brown fox jumps over the lazy dog");
    let config = s.write("run.conf", "# analysis\nl-min = 4\nl-max = 6\ntop-k = 7\n");
    let out_dir = s.path("out");
    let out = run(&[
        "analyze", "--config", p(&config), "--index", p(&s.index), "--out", p(&out_dir), "--l-max", "9", p(&input),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(&reports(&out_dir, "json")[0]).unwrap()).unwrap();
    assert_eq!(report["config"]["l_min"], 4);
    assert_eq!(report["config"]["l_max"], 9);
    assert_eq!(report["config"]["top_k"], 7);
    assert_eq!(report["l_uniqueness"].as_object().unwrap().len(), 6);

    let bad = s.write("bad.conf", "colour = red\n");
    let out = run(&["analyze", "--config", p(&bad), "--index", p(&s.index), "--out", p(&out_dir), p(&input)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thread_override() {
    let out = bin().env("REMIXTRACE_THREADS", "2").args(["dump-stopwords"]).output().unwrap();
    assert!(out.status.success());
    let out = bin().env("REMIXTRACE_THREADS", "many").args(["dump-stopwords"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dedup_emits_verdict_lines() {
    let s = Setup::new();
    let input = s.write("copy.txt", "the quick brown fox jumps over the lazy dog near the river bank");
    let out = run(&["dedup", "--index", p(&s.index), "--alpha", "0.9", "--beta", "0.3", p(&input)]);
    assert!(out.status.success());
    let lines: Vec<serde_json::Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let fox = lines.iter().find(|v| v["doc_id"] == "fox").unwrap();
    assert_eq!(fox["decision"], "exclude");
    assert_eq!(fox["query_id"], "copy");

    let other = s.write("other.txt", "a story about nothing in particular by Ann Writer");
    let out = run(&["dedup", "--index", p(&s.index), "--author", "Nobody Here", p(&other)]);
    assert!(out.status.success());
    let bad = run(&["dedup", "--index", p(&s.index), "--alpha", "0.2", "--beta", "0.5", p(&other)]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn analyze_with_dedup_restores_uniqueness() {
    let s = Setup::new();
    let input = s.write("copy.txt", "the quick brown fox jumps over the lazy dog near the river bank");
    let (plain, deduped) = (s.path("plain"), s.path("dedup"));
    assert!(run(&["analyze", "--index", p(&s.index), "--out", p(&plain), p(&input)]).status.success());
    assert!(run(&["analyze", "--index", p(&s.index), "--out", p(&deduped), "--dedup", p(&input)]).status.success());
    let ci = |d: &Path| -> f64 {
        let v: serde_json::Value = serde_json::from_slice(&fs::read(&reports(d, "json")[0]).unwrap()).unwrap();
        v["creativity_index"].as_f64().unwrap()
    };
    assert_eq!(ci(&plain), 0.0);
    assert!(ci(&deduped) > 0.0);
}

#[test]
fn coverage_output_shape() {
    let s = Setup::new();
    let input = s.write(
        "mix.txt",
        "the quick brown fox jumps over and a small grey cat sleeps on the warm kitchen floor",
    );
    let out = run(&["coverage", "--index", p(&s.index), "--top-n", "2", "--theta", "0.5", p(&input)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["selected"], serde_json::json!(["cat", "fox"]));
    assert_eq!(v["residual_uniqueness_by_k"].as_array().unwrap().len(), 3);
    assert_eq!(v["min_docs_for_theta"], 1);
}

#[test]
fn detect_from_report_dirs_and_jsonl() {
    let s = Setup::new();
    let human = s.write("human.jsonl", "{\"creativity_index\": 5.0}\n{\"creativity_index\": 6.5}\n{\"creativity_index\": 7.0}\n");
    let machine_dir = s.path("machine");
    fs::create_dir(&machine_dir).unwrap();
    for (i, ci) in [1.0, 2.0, 6.5].iter().enumerate() {
        fs::write(machine_dir.join(format!("m{i}.json")), format!("{{\"creativity_index\": {ci}}}")).unwrap();
    }
    let out = run(&["detect", "--human", p(&human), "--machine", p(&machine_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // 5 beats 2, 6.5 beats 2 and ties 1, 7 beats 3: 7.5 of 9 pairs
    assert_eq!(v["u"], 7.5);
    assert!((v["auroc"].as_f64().unwrap() - 7.5 / 9.0).abs() < 1e-12);
    assert_eq!((v["n_human"].as_u64(), v["n_machine"].as_u64()), (Some(3), Some(3)));
    assert!(v["p"].as_f64().unwrap() > 0.0);

    let out = run(&["detect", "--human", p(&s.path("absent")), "--machine", p(&machine_dir)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dump_stopwords_lists_builtin_and_override() {
    let out = run(&["dump-stopwords"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let words: Vec<&str> = text.lines().collect();
    assert!(words.len() > 100 && words.contains(&"the"));
    let mut sorted = words.clone();
    sorted.sort();
    assert_eq!(words, sorted);

    let dir = TempDir::new().unwrap();
    let list = dir.path().join("stop.txt");
    fs::write(&list, "the\na\nan\nit\non\nzebra\n").unwrap();
    let out = run(&["dump-stopwords", "--stopwords", p(&list)]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "a\nan\nit\non\nthe\nzebra\n");
    fs::write(&list, "zebra\n").unwrap();
    assert_eq!(run(&["dump-stopwords", "--stopwords", p(&list)]).status.code(), Some(2));
}
