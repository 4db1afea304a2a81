mod common;

use common::{path, text, FIXTURES};
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trusskit")).args(args).output().unwrap()
}

fn fx(name: &str) -> String {
    path(name).to_string_lossy().into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn canonical_output_is_byte_identical() {
    for f in FIXTURES.iter().chain(["interval"].iter()) {
        let o = run(&["validate", "--canonical", &fx(f)]);
        assert_eq!(code(&o), 0, "{f}");
        assert_eq!(String::from_utf8(o.stdout).unwrap(), text(f), "{f}");
    }
}

#[test]
fn golden_svgs() {
    for f in ["pt2", "cap", "circle", "interval"] {
        let o = run(&["render", &fx(f)]);
        assert_eq!(code(&o), 0);
        let golden = path(f).with_file_name("golden").join(format!("{f}.svg"));
        assert_eq!(String::from_utf8(o.stdout).unwrap(), std::fs::read_to_string(golden).unwrap(), "{f}");
    }
}

#[test]
fn render_3_truss_is_a_data_error() {
    assert_eq!(code(&run(&["render", &fx("braid")])), 65);
    assert_eq!(code(&run(&["render", "--slices", &fx("braid")])), 0);
}

#[test]
fn verdict_exit_codes() {
    assert_eq!(code(&run(&["check-tangle", &fx("cap")])), 0);
    assert_eq!(code(&run(&["check-tangle", &fx("bifur")])), 1);
    assert_eq!(code(&run(&["perturb", "verify", &fx("stacked_side")])), 0);
    assert_eq!(code(&run(&["check-diagram", &fx("interval")])), 0);
    // stable point: search exhausts and finds nothing
    let o = run(&["perturb", "search", &fx("pt"), "--max-q", "2", "--max-total", "5"]);
    assert_eq!(code(&o), 1);
    assert_eq!(String::from_utf8(o.stdout).unwrap().trim(), "none");
    let o = run(&["stable", &fx("pt"), "--max-q", "2", "--max-total", "5"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn usage_and_data_errors() {
    assert_eq!(code(&run(&["frobnicate"])), 64);
    assert_eq!(code(&run(&["check-tangle"])), 64);
    assert_eq!(code(&run(&["enumerate", "--n", "1", "--max-size", "3", "--tangle", "0", "--strata", "2"])), 64);
    assert_eq!(code(&run(&["validate", "/nonexistent.json"])), 65);
    assert_eq!(code(&run(&["--help"])), 0);
    let dir = std::env::temp_dir().join(format!("trusskit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"format_version":1,"kind":"truss","payload":{"n":1,"levels":[{"fibers":{"":"RRS"},"bordisms":{}}]}}"#).unwrap();
    let o = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 65);
    assert!(String::from_utf8(o.stderr).unwrap().contains("/payload/levels/0/fibers"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn size_guard_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_trusskit"))
        .args(["validate", &fx("cap")])
        .env("TRUSSKIT_MAX_TOTAL", "4")
        .output()
        .unwrap();
    assert_eq!(code(&o), 65);
}

#[test]
fn dual_twice_is_identity() {
    let o = run(&["dual", "--twice", &fx("interval")]);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), text("interval"));
}

#[test]
fn json_mode_reports() {
    let o = run(&["--json", "check-tangle", &fx("cap")]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "yes");
    assert_eq!(v["tdim"]["1-1"], 0);
    let o = run(&["--json", "complexity", &fx("circle")]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["complexity"], 4);
}

#[test]
fn output_is_deterministic() {
    let a = run(&["enumerate", "--n", "2", "--max-size", "5", "--seed", "1"]);
    let b = run(&["enumerate", "--n", "2", "--max-size", "5", "--seed", "2"]);
    assert_eq!(a.stdout, b.stdout);
}
