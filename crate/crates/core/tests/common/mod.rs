#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture_root() -> PathBuf {
    manifest_dir().join("tests/fixtures/dataset")
}

pub fn golden_root() -> PathBuf {
    manifest_dir().join("tests/golden")
}

pub fn cosod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cosod")).args(args).output().expect("spawn cosod")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// Relative paths of every file under `root`, sorted.
pub fn files_under(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

/// Differences between two trees: missing, extra or byte-different files.
pub fn tree_diff(expected: &Path, actual: &Path) -> Vec<String> {
    let want = files_under(expected);
    let got = files_under(actual);
    let mut diffs = Vec::new();
    for f in &want {
        if !got.contains(f) {
            diffs.push(format!("missing {}", f.display()));
        } else if std::fs::read(expected.join(f)).unwrap() != std::fs::read(actual.join(f)).unwrap() {
            diffs.push(format!("differs {}", f.display()));
        }
    }
    for f in &got {
        if !want.contains(f) {
            diffs.push(format!("extra {}", f.display()));
        }
    }
    diffs
}

pub fn copy_tree(from: &Path, to: &Path) {
    for f in files_under(from) {
        let dest = to.join(&f);
        std::fs::create_dir_all(dest.parent().unwrap()).unwrap();
        std::fs::copy(from.join(&f), dest).unwrap();
    }
}
