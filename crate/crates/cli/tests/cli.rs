use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name);
    p.to_str().unwrap().to_string()
}

fn sdg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdg"))
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn analyze_small_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let indicators = fixture("indicators_small.csv");
    let run = || {
        sdg(&[
            "analyze",
            "--indicators",
            &indicators,
            "--out",
            out_dir,
            "--format",
            "json",
        ])
    };

    let first = run();
    let bundle = json(&first);
    let stats = &bundle["methods"][0]["stats"];
    assert_eq!(stats["method"], "indicator");
    let class = |name: &str| {
        let classes = stats["classes"].as_array().unwrap();
        classes.iter().find(|c| c["class"] == name).unwrap()["count"]
            .as_u64()
            .unwrap()
    };
    assert_eq!((class("synergy"), class("tradeoff")), (1, 0));

    let table = fs::read_to_string(dir.path().join("indicator_results.csv")).unwrap();
    let classified: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(classified, ["3.1,6.1,synergy,4,0,0"]);
    let report = fs::read(dir.path().join("report.json")).unwrap();
    assert_eq!(report, first.stdout);

    // reruns are byte-identical
    let second = run();
    assert_eq!(second.stdout, first.stdout);
    assert_eq!(
        fs::read_to_string(dir.path().join("indicator_results.csv")).unwrap(),
        table
    );
}

#[test]
fn analyze_records_generation_time_only_when_given() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let indicators = fixture("indicators_small.csv");
    let plain = json(&sdg(&[
        "analyze",
        "--indicators",
        &indicators,
        "--out",
        out_dir,
        "--format",
        "json",
    ]));
    assert!(plain.get("generated_at").is_none());
    let stamped = json(&sdg(&[
        "analyze",
        "--indicators",
        &indicators,
        "--out",
        out_dir,
        "--format",
        "json",
        "--generated-at",
        "2026-01-01T00:00:00Z",
    ]));
    assert_eq!(stamped["generated_at"], "2026-01-01T00:00:00Z");
}

#[test]
fn analyze_with_expert_answers_includes_synthesis() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let bundle = json(&sdg(&[
        "analyze",
        "--indicators",
        &fixture("indicators_small.csv"),
        "--expert",
        &fixture("expert_answers.csv"),
        "--out",
        out_dir,
        "--format",
        "json",
    ]));
    assert_eq!(bundle["methods"].as_array().unwrap().len(), 2);
    assert!(bundle["synthesis"].is_object());
}

#[test]
fn missing_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = sdg(&[
        "analyze",
        "--indicators",
        "/no/such/file.csv",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = sdg(&[
        "stats",
        "--method",
        "expert",
        "--expert",
        "/no/such/answers.csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_input_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "target_a,target_b,score,explanation\n1.1,1.2,9,\n").unwrap();
    let out = sdg(&[
        "stats",
        "--method",
        "expert",
        "--expert",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    // expert data passed where indicator data is expected
    let out = sdg(&[
        "stats",
        "--method",
        "indicator",
        "--indicator",
        &fixture("expert_answers.csv"),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn synthesize_ignores_argument_order() {
    let (e, i) = (
        fixture("expert_answers.csv"),
        fixture("indicator_results.csv"),
    );
    let ab = sdg(&["synthesize", &e, &i, "--format", "json"]);
    let ba = sdg(&["synthesize", &i, &e, "--format", "json"]);
    assert_eq!(json(&ab), json(&ba));
    assert_eq!(ab.stdout, ba.stdout);
    let report = json(&ab);
    let ugly: Vec<&str> = report["negative"]["common_ugly"]
        .as_array()
        .unwrap()
        .iter()
        .map(|u| u["target"].as_str().unwrap())
        .collect();
    assert_eq!(ugly, ["3.6", "3.7", "8.2"]);
}

#[test]
fn synthesize_against_an_empty_side() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(
        &empty,
        "target_a,target_b,class,synergies,tradeoffs,nonclassified\n",
    )
    .unwrap();
    let report = json(&sdg(&[
        "synthesize",
        &fixture("expert_answers.csv"),
        empty.to_str().unwrap(),
        "--format",
        "json",
    ]));
    assert_eq!(report["negative"]["targets"], Value::Array(vec![]));
    assert_eq!(report["positive"]["common_pairs"], Value::Array(vec![]));
}

#[test]
fn synthesize_rejects_two_files_of_one_method() {
    let e = fixture("expert_answers.csv");
    let out = sdg(&["synthesize", &e, &e]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn graph_export_matches_intra_goal_counts() {
    let doc = json(&sdg(&[
        "export-graph",
        "--method",
        "indicator",
        "--a",
        "3",
        "--b",
        "3",
        "--indicator",
        &fixture("indicator_results.csv"),
        "--format",
        "json",
    ]));
    let edges = doc["edges"].as_array().unwrap();
    // goal 3 has 13 targets
    assert_eq!(doc["nodes"].as_array().unwrap().len(), 13);
    assert_eq!(edges.len(), 13 * 12 / 2);
    let red = edges.iter().filter(|e| e["hue"] == "red").count();
    assert_eq!(red, 10);
}

#[test]
fn text_output_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("stats.txt");
    let out = sdg(&[
        "stats",
        "--method",
        "expert",
        "--expert",
        &fixture("expert_answers.csv"),
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(path).unwrap();
    assert!(text.contains("evaluated: 1256 of 14196 (8.85%)"), "{text}");
    assert!(text.contains("78.11%"), "{text}");
}
