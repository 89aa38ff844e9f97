use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use forbconf::verify::parse_machine;
use forbconf::{read_matrix, SMatrix};

fn forbconf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forbconf")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines().find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn forb_prints_value() {
    let out = forbconf(&["forb", "--m", "3", "--F", "0,2,2,0", "--format", "machine"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(field(&stdout(&out), "value"), Some("23"));
    let text = stdout(&forbconf(&["forb", "--m", "3", "--F", "0,2,2,0"]));
    assert!(text.lines().next().unwrap().split_whitespace().eq(["value", "23"]));
}

#[test]
fn forb_methods_agree_and_write_witness() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.mat");
    let caps = forbconf(&["forb", "--m", "3", "--F", "1,2,2,1", "--witness", p(&w), "--format", "machine"]);
    let reference = forbconf(&["forb", "--m", "3", "--F", "1,2,2,1", "--method", "reference", "--format", "machine"]);
    assert_eq!(field(&stdout(&caps), "value"), Some("23"));
    assert_eq!(field(&stdout(&reference), "value"), Some("23"));
    let mat = read_matrix(&fs::read_to_string(&w).unwrap()).unwrap();
    assert_eq!(mat.ncols(), 23);
    assert_eq!(forbconf(&["check", "--matrix", p(&w), "--F", "1,2,2,1"]).status.code(), Some(0));
}

#[test]
fn forb_preconditions_are_usage_errors() {
    assert_eq!(forbconf(&["forb", "--m", "3", "--F", "1,1,2,1"]).status.code(), Some(2));
    assert_eq!(forbconf(&["forb", "--m", "5", "--F", "1,1,1,1"]).status.code(), Some(2));
    assert_eq!(forbconf(&["forb", "--m", "3", "--F", "1,2"]).status.code(), Some(2));
    assert_eq!(forbconf(&["nonsense"]).status.code(), Some(2));
    assert_eq!(forbconf(&["forb", "--m", "3", "--F", "1,1,2,1", "--method", "reference"]).status.code(), Some(0));
}

#[test]
fn check_reports_violating_pair() {
    let dir = tempfile::tempdir().unwrap();
    let x = dir.path().join("x.mat");
    fs::write(&x, "# contains K2 on rows 2,3\n3 4 3\n2222\n0101\n0011\n").unwrap();
    let out = forbconf(&["check", "--matrix", p(&x), "--F", "1,1,1,1", "--format", "machine"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert_eq!(field(&text, "result"), Some("contains"));
    assert_eq!(field(&text, "pair"), Some("2,3"));

    let f = dir.path().join("k2.mat");
    fs::write(&f, "2 4 2\n0101\n0011\n").unwrap();
    assert_eq!(forbconf(&["check", "--matrix", p(&x), "--config", p(&f)]).status.code(), Some(1));
    assert_eq!(forbconf(&["check", "--matrix", p(&x), "--F", "2,1,1,1"]).status.code(), Some(0));
    assert_eq!(forbconf(&["check", "--matrix", p(&dir.path().join("missing.mat")), "--F", "1,1,1,1"]).status.code(), Some(2));
}

#[test]
fn formulas_eval() {
    let out = forbconf(&["formulas", "--eval", "n_r", "--args", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "value=9 valid=true");
    let bad = stdout(&forbconf(&["formulas", "--eval", "thm_pk", "--args", "4,5,1"]));
    assert!(bad.starts_with("value=") && bad.contains("valid=false [failed: "), "{bad}");
    assert_eq!(forbconf(&["formulas", "--eval", "n_r", "--args", "1,2"]).status.code(), Some(2));
    assert!(stdout(&forbconf(&["formulas", "--list"])).lines().any(|l| l == "n_r r"));
}

#[test]
fn gen_check_decompose_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let mat = dir.path().join("p.mat");
    let out = forbconf(&["gen", "--construction", "prop-lower", "--m", "6", "--p", "5", "--q0", "1", "--q1", "1", "--r1", "1", "--r2", "1", "-o", p(&mat)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("columns=314"));
    let a: SMatrix = read_matrix(&fs::read_to_string(&mat).unwrap()).unwrap();
    assert_eq!(a.ncols(), 314);
    assert_eq!(forbconf(&["check", "--matrix", p(&mat), "--F", "4,5,5,4"]).status.code(), Some(0));
    assert_eq!(forbconf(&["check", "--matrix", p(&mat), "--F", "3,5,5,3"]).status.code(), Some(1));

    let report = dir.path().join("dec.txt");
    let out = forbconf(&["decompose", "--matrix", p(&mat), "--F", "4,5,5,4", "--out", p(&report), "--format", "machine"]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&report).unwrap();
    assert_eq!(field(&text, "assignment"), Some("canonical-priority"));
    assert_eq!(field(&text, "N"), Some("2"));
    assert_eq!(field(&text, "B").unwrap().parse::<usize>().unwrap() + field(&text, "C").unwrap().parse::<usize>().unwrap(), 314);

    assert_eq!(forbconf(&["gen", "--construction", "notalways", "--m", "6", "--p", "6"]).status.code(), Some(2));
    assert_eq!(forbconf(&["decompose", "--matrix", p(&mat), "--F", "0,1,1,0"]).status.code(), Some(1));
}

#[test]
fn triangle_tasks() {
    let out = stdout(&forbconf(&["triangle", "--r", "4", "--task", "max-mn", "--format", "machine"]));
    assert_eq!(field(&out, "value"), Some("4"));
    let out = stdout(&forbconf(&["triangle", "--r", "3", "--task", "min-weak", "--format", "machine"]));
    assert!(field(&out, "closed_form").unwrap().ends_with("holds=true"));
    let out = forbconf(&["triangle", "--r", "6", "--task", "induction", "--format", "machine"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(field(&stdout(&out), "mode"), Some("extended"));
}

#[test]
fn verify_exits_zero_and_is_reproducible() {
    let first = forbconf(&["verify", "--suite", "full", "--format", "machine"]);
    assert_eq!(first.status.code(), Some(0));
    let second = forbconf(&["verify", "--suite", "full", "--format", "machine"]);
    assert_eq!(first.stdout, second.stdout);
    let report = parse_machine(&stdout(&first)).unwrap();
    assert_eq!(report.checks.len(), 9);
    assert!(report.passed());
    let seeded = forbconf(&["verify", "--seed", "7", "--threads", "2"]);
    assert_eq!(seeded.status.code(), Some(0));
}

#[test]
fn outputs_are_byte_identical() {
    for args in [
        &["forb", "--m", "4", "--F", "0,3,3,0"][..],
        &["triangle", "--r", "5", "--task", "min-weak"][..],
        &["gen", "--construction", "prelim", "--m", "6", "--p", "3"][..],
    ] {
        assert_eq!(forbconf(args).stdout, forbconf(args).stdout, "{args:?}");
    }
}
