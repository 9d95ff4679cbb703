#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mlsds::bundle::load_bundle;
use mlsds::render::{assemble, AssembleOptions, Datasheet};

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../example/persondet")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn fixture_datasheet() -> Datasheet {
    let bundle = load_bundle(&fixture_dir()).expect("fixture loads");
    let (d, findings) = assemble(&bundle, &AssembleOptions::default()).expect("fixture is valid");
    assert!(findings.is_empty(), "fixture has findings:\n{findings}");
    d
}

/// Runs the built binary with colors off and no ambient timestamp.
pub fn mlsds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlsds"))
        .args(args)
        .env("MLSDS_NO_COLOR", "1")
        .env_remove("SOURCE_DATE_EPOCH")
        .output()
        .expect("binary runs")
}

/// Copies the fixture bundle into a fresh temporary directory.
pub fn fixture_copy() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(fixture_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.is_file() {
            std::fs::copy(&path, dir.path().join(path.file_name().unwrap())).unwrap();
        }
    }
    dir
}

pub fn edit_bundle(dir: &Path, edit: impl FnOnce(&mut serde_json::Value)) {
    let path = dir.join("bundle.json");
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    edit(&mut v);
    std::fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
}

/// Every leaf of a JSON value as a dotted path with `[i]` indices. Empty
/// arrays and objects count as leaves.
pub fn leaf_paths(value: &serde_json::Value) -> Vec<String> {
    fn walk(v: &serde_json::Value, at: String, out: &mut Vec<String>) {
        match v {
            serde_json::Value::Object(m) if !m.is_empty() => {
                for (k, child) in m {
                    let next = if at.is_empty() { k.clone() } else { format!("{at}.{k}") };
                    walk(child, next, out);
                }
            }
            serde_json::Value::Array(a) if !a.is_empty() => {
                for (i, child) in a.iter().enumerate() {
                    walk(child, format!("{at}[{i}]"), out);
                }
            }
            _ => out.push(at),
        }
    }
    let mut out = Vec::new();
    walk(value, String::new(), &mut out);
    out
}

/// Whether the document path `shown` displays the field at `leaf`.
pub fn covers(shown: &str, leaf: &str) -> bool {
    leaf == shown || leaf.strip_prefix(shown).is_some_and(|rest| rest.starts_with('.') || rest.starts_with('['))
}

/// Leaves covered by zero or by more than one document path.
pub fn coverage_problems(d: &Datasheet) -> Vec<String> {
    let doc = mlsds::render::build_document(d);
    let shown = doc.field_paths();
    let mut problems = Vec::new();
    for leaf in leaf_paths(&serde_json::to_value(d).unwrap()) {
        let hits = shown.iter().filter(|p| covers(p, &leaf)).count();
        if hits != 1 {
            problems.push(format!("{leaf}: shown {hits} times"));
        }
    }
    problems
}
