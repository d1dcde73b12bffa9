use std::path::PathBuf;
use std::process::{Command, Output};

fn cando(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cando"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn bundled() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data/cando.fsm")
}

#[test]
fn check_bundled_is_clean() {
    let o = cando(&["check", "--spec", bundled().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("714 transitions, 0 violation(s)"));
}

#[test]
fn check_reports_mutation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.fsm");
    let text = std::fs::read_to_string(bundled()).unwrap().replace(
        "transition CONT start -> get_cmd",
        "transition CONT start -> error_",
    );
    std::fs::write(&path, text).unwrap();
    let o = cando(&["check", "--spec", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("[C7]"), "{}", stdout(&o));
}

#[test]
fn malformed_spec_is_a_load_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.fsm");
    std::fs::write(&path, "states {\n  start: wizard\n}\n").unwrap();
    let o = cando(&["check", "--spec", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains(":2:"));
    let o = cando(&["check", "--spec", "/no/such/file.fsm"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn usage_errors_exit_three() {
    assert_eq!(code(&cando(&[])), 3);
    assert_eq!(code(&cando(&["frobnicate"])), 3);
    assert_eq!(
        code(&cando(&[
            "simulate",
            "--command",
            "LED_ON_C",
            "--max-rounds",
            "0"
        ])),
        3
    );
    assert_eq!(code(&cando(&["simulate", "--command", "NOT_A_CMD"])), 3);
    assert_eq!(code(&cando(&["--help"])), 0);
    assert_eq!(code(&cando(&["--version"])), 0);
}

#[test]
fn simulate_both_engines_then_diff() {
    let dir = tempfile::tempdir().unwrap();
    let ops = dir.path().join("ops.csv");
    let reqs = dir.path().join("reqs.csv");
    for (engine, out) in [("ops", &ops), ("reqs", &reqs)] {
        let o = cando(&[
            "simulate",
            "--command",
            "LED_ON_C",
            "--engine",
            engine,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty());
    }
    let o = cando(&["diff", ops.to_str().unwrap(), reqs.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("0 difference(s)"));
}

#[test]
fn diff_finds_differences() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let sim = |cmd: &str, out: &PathBuf| {
        let o = cando(&["simulate", "--command", cmd, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    };
    sim("LED_ON_C", &a);
    sim("LED_OFF_C", &b);
    let o = cando(&["diff", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("state"));
    let o = cando(&["diff", a.to_str().unwrap(), "/no/such.csv"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn simulate_to_stdout_is_csv() {
    let o = cando(&["simulate", "--command", "LED_ON_C", "--max-rounds", "3"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("round,state,event"));
    assert_eq!(lines.len(), 4);
}

#[test]
fn verify_passes() {
    let o = cando(&["verify", "--format", "json"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("\"pass\": true"));
}

#[test]
fn report_formats() {
    let md = cando(&["report"]);
    assert_eq!(code(&md), 0);
    assert!(stdout(&md).contains("### 1.06: set_vLED to send_packet_6"));
    assert_eq!(stdout(&md), stdout(&cando(&["report", "--format", "md"])));

    let html = cando(&["report", "--format", "html"]);
    assert!(stdout(&html).starts_with("<!DOCTYPE html>"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.req");
    let o = cando(&["report", "--format", "req", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&path).unwrap();
    let model = cando_core::req::parse_req(&text).unwrap();
    assert!(model.requirement("1.06").is_some());
}
