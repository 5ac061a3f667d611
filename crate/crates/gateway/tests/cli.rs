use std::io::Write;
use std::process::{Command, Stdio};

fn colloquy(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_colloquy")).args(args).env("RUST_LOG", "off").output().unwrap()
}

#[test]
fn graph_prints_dot() {
    let out = colloquy(&["graph", "--domains", "weather"]);
    assert!(out.status.success());
    let dot = String::from_utf8(out.stdout).unwrap();
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("nlu.weather"));
    assert!(!dot.contains("nlu.mensa"));
}

#[test]
fn evaluate_reports_metrics() {
    let out = colloquy(&["evaluate", "--dialogs", "12", "--seed", "3", "--direct"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let metrics: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(metrics["dialogs"], 12);
    assert!(metrics["success_rate"].as_f64().unwrap() >= 0.0);
}

#[test]
fn unknown_domain_fails() {
    let out = colloquy(&["graph", "--domains", "trains"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown domain"));
}

#[test]
fn chat_reads_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_colloquy"))
        .args(["chat"])
        .env("RUST_LOG", "off")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"What is the weather like?\nThank you, good bye!\n").unwrap();
    let out = child.wait_with_output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("system> The weather in Stuttgart on January 28 at 3 PM"), "{text}");
    assert!(text.contains("system> Thank you, good bye."));
}
