//! Runs every `tests/golden/*.case.json` through the binary.
//!
//! A case gives the arguments, the input (inline or a sibling file), the
//! expected exit code and an `expect` document that must be contained in the
//! output: objects match on the listed keys, arrays element by element, and a
//! string matches an exact value object when both denote the same value.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use serde_json::Value as Json;
use ss_skeleton::Value;

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn run_cli(args: &[String], stdin: &str) -> (i32, String, String) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_ss-skeleton"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn ss-skeleton");
    child
        .stdin
        .take()
        .expect("stdin")
        .write_all(stdin.as_bytes())
        .expect("write stdin");
    let out = child.wait_with_output().expect("wait");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).expect("utf8 stdout"),
        String::from_utf8(out.stderr).expect("utf8 stderr"),
    )
}

fn same_value(expected: &str, actual: &Json) -> bool {
    let (Ok(e), Ok(a)) = (
        expected.parse::<Value>(),
        serde_json::from_value::<Value>(actual.clone()),
    ) else {
        return false;
    };
    e == a
}

fn contains(expected: &Json, actual: &Json, path: &str, errors: &mut Vec<String>) {
    match (expected, actual) {
        (Json::Object(e), Json::Object(a)) => {
            for (k, ev) in e {
                match a.get(k) {
                    Some(av) => contains(ev, av, &format!("{path}.{k}"), errors),
                    None => errors.push(format!("{path}.{k}: missing")),
                }
            }
        }
        (Json::Array(e), Json::Array(a)) => {
            if e.len() != a.len() {
                errors.push(format!("{path}: length {} vs {}", e.len(), a.len()));
                return;
            }
            for (i, (ev, av)) in e.iter().zip(a).enumerate() {
                contains(ev, av, &format!("{path}[{i}]"), errors);
            }
        }
        (Json::String(e), a @ Json::Object(_)) if same_value(e, a) => {}
        (e, a) if e == a => {}
        (e, a) => errors.push(format!("{path}: expected {e}, got {a}")),
    }
}

fn run_case(path: &Path) -> Result<(), String> {
    let case: Json = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    let args: Vec<String> = case["args"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a.as_str().unwrap().to_string())
        .collect();
    let stdin = match (&case["input"], case.get("input_file")) {
        (_, Some(file)) => fs::read_to_string(golden_dir().join(file.as_str().unwrap())).unwrap(),
        (Json::String(raw), None) => raw.clone(),
        (input, None) => serde_json::to_string(input).unwrap(),
    };
    let (code, stdout, stderr) = run_cli(&args, &stdin);
    let mut errors = Vec::new();
    let want = case["exit"].as_i64().unwrap() as i32;
    if code != want {
        errors.push(format!("exit {code}, expected {want}; stderr: {stderr}"));
    }
    if let Some(expect) = case.get("expect") {
        match serde_json::from_str::<Json>(&stdout) {
            Ok(actual) => contains(expect, &actual, "$", &mut errors),
            Err(e) => errors.push(format!("stdout is not JSON ({e}): {stdout}")),
        }
    }
    for (key, text) in [("stdout_contains", &stdout), ("stderr_contains", &stderr)] {
        if let Some(needle) = case.get(key).and_then(Json::as_str) {
            if !text.contains(needle) {
                errors.push(format!("{key} {needle:?} not found in {text:?}"));
            }
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors.join("\n  "))
    }
}

#[test]
fn golden_cases() {
    let mut paths: Vec<PathBuf> = fs::read_dir(golden_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_string_lossy().ends_with(".case.json"))
        .collect();
    paths.sort();
    assert!(paths.len() >= 60, "golden corpus went missing");
    let failures: Vec<String> = paths
        .iter()
        .filter_map(|p| run_case(p).err().map(|e| format!("{}:\n  {e}", p.display())))
        .collect();
    assert!(failures.is_empty(), "{} golden cases failed:\n{}", failures.len(), failures.join("\n"));
}

#[test]
fn cover_output_is_frozen_and_deterministic() {
    let input = r#"{"model": {"base": {"l": 1, "m": 1, "pi": "1/2"}, "fiber_exponents": [0, 0], "pi_1": "1/3", "r": "1/2"}}"#;
    let frozen = fs::read_to_string(golden_dir().join("two_annuli.certificate.json")).unwrap();
    let (code, first, _) = run_cli(&["cover".into()], input);
    let (_, second, _) = run_cli(&["cover".into()], input);
    assert_eq!(code, 0);
    assert_eq!(first, second);
    assert_eq!(first, frozen);
}

#[test]
fn emitted_files_and_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("cover.svg");
    let csv = dir.path().join("cover.csv");
    let cert = dir.path().join("cert.json");
    let input = dir.path().join("model.json");
    fs::write(
        &input,
        r#"{"base": {"l": 1, "m": 1, "pi": "1/2"}, "fiber_exponents": [0, 0], "pi_1": "1/3", "r": "1/2"}"#,
    )
    .unwrap();
    let path = |p: &Path| p.to_string_lossy().into_owned();
    let (code, stdout, stderr) = run_cli(
        &[
            "cover".into(),
            "--input".into(),
            path(&input),
            "--output".into(),
            path(&cert),
            "--emit-svg".into(),
            path(&svg),
            "--emit-csv".into(),
            path(&csv),
        ],
        "",
    );
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.is_empty());
    assert!(fs::read_to_string(&svg).unwrap().contains("display only"));
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 13);
    let (code, _, _) = run_cli(&["verify".into(), "--input".into(), path(&cert)], "");
    assert_eq!(code, 0);
}

#[test]
fn emit_flags_are_rejected_elsewhere() {
    let (code, _, stderr) = run_cli(&["units".into(), "--emit-svg".into(), "x.svg".into()], "{}");
    assert_eq!(code, 2);
    assert!(stderr.contains("cover"), "{stderr}");
}

#[test]
fn selftest_runs_with_a_seed() {
    let (code, stdout, _) = run_cli(&["selftest".into(), "--seed".into(), "5".into(), "--trials".into(), "20".into()], "");
    assert_eq!(code, 0);
    let report: Json = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["seed"], 5);
    assert_eq!(report["passed"], true);
}

#[test]
fn envelope_round_trip() {
    let request = r#"{"command": "value-cmp", "version": 1, "payload": {"a": "1/2", "b": "1/3"}}"#;
    let (code, stdout, _) = run_cli(&["value-cmp".into()], request);
    assert_eq!(code, 0);
    let response: Json = serde_json::from_str(&stdout).unwrap();
    let reprinted = serde_json::to_string_pretty(&response).unwrap() + "\n";
    assert_eq!(reprinted, stdout);
    assert_eq!(response["result"]["cmp"], "greater");
}
