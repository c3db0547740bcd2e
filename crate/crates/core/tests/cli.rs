use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_crex"))
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name);
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

/// Runs the binary and returns (exit code, parsed report lines), checking
/// each line against the report schema.
fn crex(args: &[&str]) -> (i32, Vec<Value>) {
    let out = bin().args(args).env_remove("CREX_OUT_DIR").output().unwrap();
    let validator = schema("report.schema.json");
    let lines: Vec<Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    for line in &lines {
        let errors: Vec<String> = validator.iter_errors(line).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{line}: {errors:?}");
    }
    (out.status.code().unwrap(), lines)
}

fn exam(dir: &Path, name: &str, extra: &[&str]) -> (i32, Vec<Value>, PathBuf) {
    let path = dir.join(name);
    let mut args = vec!["exam", "run", "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let (code, lines) = crex(&args);
    (code, lines, path)
}

#[test]
fn default_exam_runs_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let (code, lines, path) = exam(dir.path(), "t.jsonl", &[]);
    assert_eq!(code, 0);
    assert_eq!(lines[0]["all_pass"], true);
    assert_eq!(lines[0]["n"], 5);

    let validator = schema("transcript.schema.json");
    let text = std::fs::read_to_string(&path).unwrap();
    for line in text.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert!(validator.is_valid(&v), "{line}");
    }

    let (code, lines) = crex(&["exam", "verify", "--transcript", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let verdict = lines.last().unwrap();
    assert_eq!(verdict["all_pass"], true);
    assert!(lines[..lines.len() - 1].iter().all(|l| l["passed"] == true));
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let (_, a, pa) = exam(dir.path(), "a.jsonl", &["--seed", "17"]);
    let (_, b, pb) = exam(dir.path(), "b.jsonl", &["--seed", "17"]);
    assert_eq!(std::fs::read(pa).unwrap(), std::fs::read(pb).unwrap());
    assert_eq!(a[0]["transcript_sha256"], b[0]["transcript_sha256"]);
    let (_, c, _) = exam(dir.path(), "c.jsonl", &["--seed", "18"]);
    assert_ne!(a[0]["transcript_sha256"], c[0]["transcript_sha256"]);
}

#[test]
fn single_question_config_is_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "k = 1\n").unwrap();
    let (code, lines, path) = exam(dir.path(), "t.jsonl", &["--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(lines[0]["record"], "error");
    assert_eq!(lines[0]["phase"], "config");
    assert!(!path.exists());
}

#[test]
fn config_file_sets_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "n = 4\nm = 3\nk = 2\nd = 3\nrubric = \"length\"\n").unwrap();
    let (code, lines, _) = exam(dir.path(), "t.jsonl", &["--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(lines[0]["m"], 3);
    assert_eq!(lines[0]["rubric"], "length");
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["exam", "run", "--out", "env.jsonl", "--seed", "2"])
        .env("CREX_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("env.jsonl").exists());
}

#[test]
fn empty_transcript_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.jsonl");
    std::fs::write(&path, "").unwrap();
    let (code, lines) = crex(&["exam", "verify", "--transcript", path.to_str().unwrap()]);
    assert_eq!(code, 3);
    assert_eq!(lines[0]["record"], "error");
    assert_eq!(lines[0]["offset"], 0);
}

#[test]
fn garbage_line_reports_its_offset() {
    let dir = tempfile::tempdir().unwrap();
    let (_, _, path) = exam(dir.path(), "t.jsonl", &[]);
    let mut text = std::fs::read_to_string(&path).unwrap();
    let first_len = text.find('\n').unwrap() + 1;
    text.insert_str(first_len, "{not json\n");
    std::fs::write(&path, text).unwrap();
    let (code, lines) = crex(&["exam", "verify", "--transcript", path.to_str().unwrap()]);
    assert_eq!(code, 3);
    // points into the bad line, at the first byte json rejects
    let offset = lines[0]["offset"].as_u64().unwrap() as usize;
    assert_eq!(offset, first_len + 1);
}

#[test]
fn flipped_signature_byte_fails_one_check() {
    let dir = tempfile::tempdir().unwrap();
    let (_, _, path) = exam(dir.path(), "t.jsonl", &["--seed", "5"]);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut seq = None;
    let mutated: Vec<String> = text
        .lines()
        .map(|line| {
            let mut v: Value = serde_json::from_str(line).unwrap();
            if v["type"] == "board" && v["kind"] == "shuffled-answers" {
                seq = v["seq"].as_u64();
                // the signature is the tail of the record
                let mut rec = v["record"].as_str().unwrap().to_string();
                let last = rec.pop().unwrap().to_digit(16).unwrap() ^ 1;
                rec.push(char::from_digit(last, 16).unwrap());
                v["record"] = Value::String(rec);
            }
            v.to_string()
        })
        .collect();
    std::fs::write(&path, mutated.join("\n") + "\n").unwrap();
    let (code, lines) = crex(&["exam", "verify", "--transcript", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    let failed: Vec<&str> = lines
        .iter()
        .filter(|l| l["record"] == "check" && l["passed"] == false)
        .map(|l| l["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, vec![format!("board.signature#{}", seq.unwrap())]);
}

#[test]
fn attack_subcommands() {
    let (code, lines) = crex(&["attack", "demo", "--n", "10", "--seed", "3"]);
    assert_eq!(code, 0);
    assert_eq!(lines[0]["trial"]["success"], true);
    assert_eq!(lines[0]["trial"]["found"], lines[0]["trial"]["truth"]);

    let (code, lines) = crex(&["attack", "demo", "--n", "6", "--external"]);
    assert_eq!(code, 0);
    assert_eq!(lines[0]["trial"]["external"], true);

    let (code, lines) = crex(&["attack", "full-linkage", "--sizes", "16,32", "--mode", "single-session"]);
    assert_eq!(code, 0);
    let ratio = lines.iter().find(|l| l["record"] == "ratio").unwrap()["ratio"].as_f64().unwrap();
    assert!((3.4..=4.6).contains(&ratio), "{ratio}");

    let (code, lines) = crex(&["attack", "iremix", "--n", "6", "--attempts", "3"]);
    assert_eq!(code, 0);
    let summary = lines.last().unwrap();
    assert_eq!(summary["outcome"], "blocked");
    assert_eq!(summary["blocked"], 9);
}

#[test]
fn coercion_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let (_, _, path) = exam(dir.path(), "t.jsonl", &["--seed", "8"]);
    let t = path.to_str().unwrap();

    let (code, lines) = crex(&["coerce", "candidate", "--transcript", t, "--index", "2"]);
    assert_eq!(code, 0);
    assert_eq!(lines[0]["indistinguishable"], true);
    assert_eq!(lines[0]["outcome"]["fake"]["verdict"], "consistent");

    // one of the two labels is the decoy, the other is refused
    let codes: Vec<i32> = ["0", "1"]
        .iter()
        .map(|d| crex(&["coerce", "examiner", "--transcript", t, "--decoy", d]).0)
        .collect();
    let mut sorted = codes.clone();
    sorted.sort();
    assert_eq!(sorted, vec![0, 2]);
}

#[test]
fn mixnet_demo_reports_checks() {
    let (code, lines) = crex(&["mixnet", "demo", "--n", "12", "--servers", "4"]);
    assert_eq!(code, 0);
    let trial = &lines[0]["trial"];
    assert_eq!(trial["multiset_ok"], true);
    assert_eq!(trial["owners_ok"], true);
    assert_eq!(trial["chain_verifies"], true);
}

#[test]
fn modp2048_group_flag() {
    let (code, lines) = crex(&["mixnet", "demo", "--group", "modp2048", "--n", "3", "--servers", "1"]);
    assert_eq!(code, 0);
    assert_eq!(lines[0]["group"], "modp2048");
}
