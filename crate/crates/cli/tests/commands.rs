use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_pmc-synth");
const MODELS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../models");

fn model(name: &str) -> String {
    Path::new(MODELS).join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str], dir: &Path) -> (i32, String) {
    let out = Command::new(BIN).args(args).current_dir(dir).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn translate_reports_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run(&["translate", "-f", "a U b"], dir.path());
    assert_eq!(code, 0);
    assert!(out.contains("states 3"), "{out}");
}

#[test]
fn check_gives_verdict_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let m = model("fig4.pmc");
    let (code, out) = run(&["check", "-m", &m, "-q", "P >= 1 [ G F x ]", "-e", "eps=1/10", "--oracle"], dir.path());
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("verdict true"));
    assert!(out.contains("agrees"));
    let (code, _) = run(&["check", "-m", &m, "-q", "P < 1/2 [ G F x ]", "-e", "eps=1/10"], dir.path());
    assert_eq!(code, 1);
}

#[test]
fn errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let m = model("fig4.pmc");
    assert_eq!(run(&["check", "-m", &m, "-f", "G F x"], dir.path()).0, 2);
    assert_eq!(run(&["check", "-m", &m, "-f", "G F (", "-e", "eps=0"], dir.path()).0, 3);
    assert_eq!(run(&["check", "-m", "missing.pmc", "-f", "x"], dir.path()).0, 3);
    assert_eq!(run(&["check", "-m", &m, "-f", "G F x", "-e", "eps=3"], dir.path()).0, 4);
    assert_eq!(run(&["classify", "-m", &m, "-f", "G F x", "--max-product-nodes", "2"], dir.path()).0, 5);
    assert_eq!(run(&["synth", "-m", &m, "-q", "P >= 1 [ G F x ]", "--solver", "no-such-solver-binary"], dir.path()).0, 6);
}

#[test]
fn synth_writes_default_file() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run(&["synth", "-m", &model("fig4.pmc"), "-q", "P >= 9/10 [ G F x ]"], dir.path());
    assert_eq!(code, 0, "{out}");
    let text = std::fs::read_to_string(dir.path().join("fig4.smt2")).unwrap();
    assert!(pmc_core::eqsys::check_smtlib(&text).is_ok());
}
