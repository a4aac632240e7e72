//! Helpers for driving the built `strongaug` binary.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_strongaug"));
    // keep ambient overrides out of the tests
    for (k, _) in std::env::vars() {
        if k.starts_with("STRONGAUG_") {
            cmd.env_remove(k);
        }
    }
    cmd
}

pub fn run<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    bin().args(args).output().expect("binary runs")
}

pub fn ok<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let out = run(args);
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Parsed one-line JSON error summary from stderr.
pub fn error_summary(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text
        .lines()
        .rev()
        .find(|l| l.starts_with('{'))
        .unwrap_or_else(|| panic!("no JSON summary in stderr: {text}"));
    serde_json::from_str(line).unwrap()
}

/// Every file under `root` with its bytes, sorted by relative path,
/// skipping files whose name ends with any of `skip`.
pub fn snapshot(root: &Path, skip: &[&str]) -> Vec<(PathBuf, Vec<u8>)> {
    fn walk(dir: &Path, root: &Path, skip: &[&str], out: &mut Vec<(PathBuf, Vec<u8>)>) {
        for entry in fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                walk(&p, root, skip, out);
            } else {
                let name = p.file_name().unwrap().to_str().unwrap();
                if skip.iter().any(|s| name.ends_with(s)) {
                    continue;
                }
                out.push((p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, skip, &mut out);
    out.sort();
    out
}
