//! Golden transcripts of the bundled example models.
//!
//! Each `docs/models/<stem>.json` has a command list `<stem>.cmds.json` and
//! two goldens, `<stem>.golden.txt` (text reports) and
//! `<stem>.golden-json.txt` (`--json` reports). Set `FINMEAS_BLESS=1` to
//! rewrite the goldens from the current build.
#![allow(dead_code)]

use std::path::PathBuf;
use std::process::Command;

use finmeas::cli::{run_with, Outcome};

pub const MODELS: [&str; 3] = ["measures", "kernels", "metrics_logic"];

pub fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn model_arg(stem: &str) -> String {
    format!("docs/models/{stem}.json")
}

pub fn commands(stem: &str) -> Vec<Vec<String>> {
    let path = root().join(format!("docs/models/{stem}.cmds.json"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).expect("command list is a JSON array of argument arrays")
}

fn full_args(stem: &str, args: &[String], json: bool) -> Vec<String> {
    let mut all = vec!["-m".to_string(), model_arg(stem)];
    if json {
        all.push("--json".into());
    }
    all.extend(args.iter().cloned());
    all
}

/// Runs the dispatcher in this process, resolving the model path against the workspace root.
pub fn in_process(stem: &str, args: &[String], json: bool) -> Outcome {
    let mut argv = vec!["finmeas".to_string()];
    for a in full_args(stem, args, json) {
        if a == model_arg(stem) {
            argv.push(root().join(&a).to_string_lossy().into_owned());
        } else {
            argv.push(a);
        }
    }
    run_with(argv, None)
}

/// Runs the built `finmeas` binary from the workspace root.
pub fn binary(stem: &str, args: &[String], json: bool) -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_finmeas"))
        .current_dir(root())
        .args(full_args(stem, args, json))
        .output()
        .expect("binary runs");
    Outcome {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).expect("UTF-8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("UTF-8 stderr"),
    }
}

pub fn render(stem: &str, args: &[String], json: bool, out: &Outcome) -> String {
    let mut s = format!("$ finmeas {}\n", full_args(stem, args, json).join(" "));
    s.push_str(&out.stdout);
    s.push_str(&out.stderr);
    s.push_str(&format!("exit: {}\n\n", out.code));
    s
}

pub fn transcript(stem: &str, json: bool, runner: impl Fn(&str, &[String], bool) -> Outcome) -> String {
    commands(stem)
        .iter()
        .map(|args| render(stem, args, json, &runner(stem, args, json)))
        .collect()
}

pub fn golden_path(stem: &str, json: bool) -> PathBuf {
    let suffix = if json { "golden-json.txt" } else { "golden.txt" };
    root().join(format!("docs/models/{stem}.{suffix}"))
}

pub fn bless_enabled() -> bool {
    std::env::var("FINMEAS_BLESS").is_ok_and(|v| v == "1")
}

/// Compares `actual` with the golden file, rewriting it first when blessing.
pub fn check_golden(stem: &str, json: bool, actual: &str) -> Result<(), String> {
    let path = golden_path(stem, json);
    if bless_enabled() {
        std::fs::write(&path, actual).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let expected = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected == actual {
        return Ok(());
    }
    let line = expected
        .lines()
        .zip(actual.lines())
        .position(|(a, b)| a != b)
        .unwrap_or_else(|| expected.lines().count().min(actual.lines().count()));
    Err(format!(
        "{} differs from the current output at line {}",
        path.display(),
        line + 1
    ))
}
