use std::path::{Path, PathBuf};

use mmp::formats::TraceDoc;
use mmp_core::DecoratedChain;

#[path = "../../mmp-core/tests/common/mod.rs"]
mod common;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("mmp").chain(args.iter().copied());
    let code = mmp::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn here(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join(rel)
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(here(&format!("golden/{name}"))).unwrap()
}

#[test]
fn traces_match_golden_files() {
    for (chain, file) in [
        ("[5,2]-1-[6,2,2]", "trace_37_10.txt"),
        ("[2,5,3]-1-[2,5,3]-2", "trace_81_47.txt"),
        ("[2,5]-1-[5,2]", "trace_45_26.txt"),
    ] {
        let (code, out, _) = run(&["trace", chain]);
        assert_eq!(code, 0);
        assert_eq!(out, golden(file), "{chain}");
    }
}

#[test]
fn simple_queries() {
    assert_eq!(run(&["fraction", "2-4-3-3-2"]), (0, "81/47\n".into(), String::new()));
    assert_eq!(run(&["t0", "check", "[2,5,3]"]).1, "T0 n=5 a=3 initial=2\n");
    assert_eq!(run(&["t0", "initial", "[6,2,2]"]).1, "1\n");
    assert_eq!(run(&["resolve", "1/45(1,26)"]).1, "2-4-4-2\n");
    assert_eq!(run(&["flip", "[5,2]-1-6"]).1, "4-4\n");
    assert_eq!(run(&["antiflip", "4-4"]).1, "[5,2]-1-6\n");
    assert_eq!(run(&["flip", "[2,5,3]-1-2", "--site", "1:A:ltr"]).1, "2-[5,2]-1\n");
    let (code, out, _) = run(&["zero", "enum", "--bounds", "3,2,3,3,3"]);
    assert_eq!(code, 0);
    assert!(out.lines().any(|l| l == "(3,2,1,3,2)"));
}

#[test]
fn validate_reports_rule_three() {
    let (code, out, _) = run(&["validate", "[6,2,2]-1-[5,2]"]);
    assert_eq!(code, 1);
    assert!(out.lines().any(|l| l.starts_with("rule 3:") && l.contains("b1 >= a1")));
    assert_eq!(run(&["validate", "[5,2]-1-[6,2,2]"]), (0, "valid\n".into(), String::new()));
}

#[test]
fn errors_are_json_and_usage_is_two() {
    let (code, out, err) = run(&["fraction", "4-[x]"]);
    assert_eq!((code, out.as_str()), (1, ""));
    let v: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(v["error"], "parse");
    assert!(v["message"].is_string());
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["trace"]).0, 2);
    assert_eq!(run(&["--help"]).0, 0);
    let (code, _, err) = run(&["certify", "[5,2]-1-6", "4-5"]);
    assert_eq!(code, 1);
    assert!(err.contains("not-a-flip-pair"));
}

#[test]
fn certify_prints_classes() {
    let (code, out, _) = run(&["certify", "[5,2]-1-6", "4-4", "--show-classes"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("true"));
    let text: Vec<&str> = lines.collect();
    let y = text.iter().position(|l| *l == "# Y").unwrap();
    let yp = text.iter().position(|l| *l == "# Y+").unwrap();
    assert_eq!(text[y + 1..yp], text[yp + 1..]);
    assert!(text[y + 1..yp].iter().all(|r| r.split(',').all(|x| x.parse::<i64>().is_ok())));
}

#[test]
fn toi_fixture_seven_has_two_steps() {
    let (code, out, _) = run(&["toi", here("fixtures/gamma7.json").to_str().unwrap()]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1. A symplectic antiflip"));
    assert!(lines[2].starts_with("2. A rational blow-down"));
}

#[test]
fn every_fixture_traces() {
    for k in 1..=9 {
        let path = here(&format!("fixtures/gamma{k}.json"));
        let (code, out, err) = run(&["toi", "--json", path.to_str().unwrap()]);
        assert_eq!(code, 0, "gamma{k}: {err}");
        let doc: TraceDoc = serde_json::from_str(&out).unwrap();
        assert_eq!(doc.moves.last().unwrap().after, doc.end);
    }
}

#[test]
fn json_traces_replay() {
    let dir = std::env::temp_dir().join(format!("mmp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut r = common::rng(5);
    for i in 0..50 {
        let ch = common::m_resolution(&mut r);
        for dir_flag in ["down", "up"] {
            let (code, out, err) = run(&["trace", "--json", "--direction", dir_flag, &ch.to_string()]);
            assert_eq!(code, 0, "{ch}: {err}");
            let doc: TraceDoc = serde_json::from_str(&out).unwrap();
            let file = dir.join(format!("{i}-{dir_flag}.json"));
            std::fs::write(&file, &out).unwrap();
            let (code, end, _) = run(&["replay", file.to_str().unwrap()]);
            assert_eq!(code, 0);
            assert_eq!(end.trim(), doc.end);
        }
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn tampered_trace_is_rejected() {
    let (_, out, _) = run(&["trace", "--json", "[5,2]-1-[6,2,2]"]);
    let mut doc: TraceDoc = serde_json::from_str(&out).unwrap();
    doc.end = "[5,2]-1-6-2-2".into();
    let file = std::env::temp_dir().join(format!("mmp-tampered-{}.json", std::process::id()));
    std::fs::write(&file, serde_json::to_string(&doc).unwrap()).unwrap();
    let (code, _, err) = run(&["replay", file.to_str().unwrap()]);
    std::fs::remove_file(&file).unwrap();
    assert_eq!(code, 1);
    assert!(err.contains("\"driver\""));
}

#[test]
fn chain_text_round_trips() {
    for s in ["4-4-2-2", "[5,2]-1-[6,2,2]", "2-[4]-4-2", "[2,5,3]-1-[2,5,3]-2", " 2 - [ 4 ] - 4 "] {
        let ch: DecoratedChain = s.parse().unwrap();
        let canon = ch.to_string();
        assert_eq!(canon.parse::<DecoratedChain>().unwrap(), ch);
        assert_eq!(canon, s.replace(' ', ""));
    }
}
