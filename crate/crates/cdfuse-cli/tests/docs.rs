//! Executes the command blocks in docs/*.md and compares their output.
//!
//! A ```console block holds `$ command` lines, each followed by its expected
//! stdout. Commands run through `sh` in a scratch directory holding a copy of
//! `data/`, with the built `cdfuse` first on PATH; blocks of one file share
//! that directory. ```json run-config and ```json sim-config blocks must
//! parse as configs and validate apart from the survey path. `CDFUSE_BLESS=1`
//! rewrites the expected outputs.

use std::path::{Path, PathBuf};
use std::process::Command;

use cdfuse::sim::SimConfig;
use cdfuse_cli::config::RunConfig;

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(cmd: &str, cwd: &Path) -> String {
    let bin = Path::new(env!("CARGO_BIN_EXE_cdfuse")).parent().unwrap().to_path_buf();
    let path = std::env::join_paths(std::iter::once(bin).chain(std::env::split_paths(&std::env::var_os("PATH").unwrap_or_default())))
        .unwrap();
    let o = Command::new("sh")
        .arg("-c")
        .arg(cmd)
        .current_dir(cwd)
        .env("PATH", path)
        .env_remove("CDFUSE_THREADS")
        .output()
        .unwrap();
    let mut s = String::from_utf8_lossy(&o.stdout).into_owned();
    if !o.status.success() {
        s.push_str(&format!("[exit {}]\n", o.status.code().unwrap_or(-1)));
    }
    s
}

fn copy_dir(from: &Path, to: &Path) {
    std::fs::create_dir_all(to).unwrap();
    for e in std::fs::read_dir(from).unwrap() {
        let e = e.unwrap();
        std::fs::copy(e.path(), to.join(e.file_name())).unwrap();
    }
}

/// Returns the file with outputs as produced, output mismatches, and
/// config errors (which blessing cannot fix).
fn check_file(path: &Path) -> (String, Vec<String>, Vec<String>) {
    let text = std::fs::read_to_string(path).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    copy_dir(&repo().join("data"), &tmp.path().join("data"));
    let mut out = String::new();
    let mut errs = vec![];
    let mut bad_configs = vec![];
    let mut lines = text.lines();
    while let Some(line) = lines.next() {
        out.push_str(line);
        out.push('\n');
        let fence = line.trim_end();
        if fence == "```console" {
            let mut block = vec![];
            for l in lines.by_ref() {
                if l.trim_end() == "```" {
                    break;
                }
                block.push(l);
            }
            let mut i = 0;
            while i < block.len() {
                let Some(cmd) = block[i].strip_prefix("$ ") else {
                    errs.push(format!("{}: output line without a command: {:?}", path.display(), block[i]));
                    i += 1;
                    continue;
                };
                let mut expected = String::new();
                i += 1;
                while i < block.len() && !block[i].starts_with("$ ") {
                    expected.push_str(block[i]);
                    expected.push('\n');
                    i += 1;
                }
                let got = run(cmd, tmp.path());
                if got.trim_end() != expected.trim_end() {
                    errs.push(format!("{}: `{cmd}`\n--- expected\n{expected}--- got\n{got}", path.display()));
                }
                out.push_str(&format!("$ {cmd}\n{got}"));
            }
            out.push_str("```\n");
        } else if fence == "```json run-config" || fence == "```json sim-config" {
            let mut body = String::new();
            for l in lines.by_ref() {
                if l.trim_end() == "```" {
                    break;
                }
                body.push_str(l);
                body.push('\n');
            }
            let res = if fence.ends_with("run-config") {
                // survey paths in examples point at files the commands create
                RunConfig::from_json(&body)
                    .and_then(|c| RunConfig { survey: None, ..c }.validate())
                    .map_err(|e| e.to_string())
            } else {
                serde_json::from_str::<SimConfig>(&body)
                    .map_err(|e| e.to_string())
                    .and_then(|c| c.validate().map_err(|e| e.to_string()))
            };
            if let Err(e) = res {
                bad_configs.push(format!("{}: config block does not validate: {e}\n{body}", path.display()));
            }
            out.push_str(&body);
            out.push_str("```\n");
        }
    }
    (out, errs, bad_configs)
}

#[test]
fn doc_examples_check() {
    let bless = std::env::var("CDFUSE_BLESS").is_ok_and(|v| v == "1");
    let mut docs: Vec<PathBuf> = std::fs::read_dir(repo().join("docs"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "md"))
        .collect();
    docs.sort();
    assert!(!docs.is_empty());
    let mut all = vec![];
    for d in &docs {
        let (text, errs, bad_configs) = check_file(d);
        if bless && !errs.is_empty() {
            std::fs::write(d, text).unwrap();
        } else {
            all.extend(errs);
        }
        all.extend(bad_configs);
    }
    assert!(all.is_empty(), "{} doc mismatches (rerun with CDFUSE_BLESS=1 to accept):\n{}", all.len(), all.join("\n"));
}
