use std::process::{Command, Output};

fn tensorid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tensorid"))
        .args(args)
        .env_remove("TENSORID_SEED")
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn fixture() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/555r7.json").to_string()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

#[test]
fn generic_555_is_proved_at_rbar() {
    let out = tensorid(&["generic", "--shape", "5,5,5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("rank 9"), "{text}");
    assert!(text.contains("generically identifiable"), "{text}");
}

#[test]
fn generic_shape_order_is_normalized() {
    let a = json(&tensorid(&["generic", "--shape", "3,5,4", "--json"]));
    assert_eq!(a["shape"], serde_json::json!([5, 4, 3]));
}

#[test]
fn generic_443_rank_5_is_a_defect() {
    let out = tensorid(&["generic", "--shape", "4,4,3", "--rank", "5"]);
    assert_eq!(out.status.code(), Some(3));
    let out = tensorid(&["generic", "--shape", "4,4,3", "--rank", "5", "--no-catalog", "--json"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["kind"]["kind"], "defective_suspected");
}

#[test]
fn generic_444_rank_6_without_catalog_is_inconclusive() {
    let out = tensorid(&[
        "generic",
        "--shape",
        "4,4,4",
        "--no-catalog",
        "--retries",
        "1",
        "--no-escalate",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generic_usage_errors() {
    assert_eq!(
        tensorid(&["generic", "--shape", "5,5,5", "--rank", "10"]).status.code(),
        Some(64)
    );
    assert_eq!(
        tensorid(&["generic", "--shape", "5,5,5", "--rank", "0"]).status.code(),
        Some(64)
    );
    assert_eq!(tensorid(&["generic", "--shape", "5,x,5"]).status.code(), Some(64));
    assert_eq!(tensorid(&["generic", "--shape", "5,5"]).status.code(), Some(64));
    assert_eq!(tensorid(&["generic"]).status.code(), Some(64));
    assert_eq!(
        tensorid(&["generic", "--shape", "5,5,5", "--prime", "128"])
            .status
            .code(),
        Some(64)
    );
    assert_eq!(tensorid(&["frobnicate"]).status.code(), Some(64));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(tensorid(&["--help"]).status.code(), Some(0));
    assert_eq!(tensorid(&["--version"]).status.code(), Some(0));
}

#[test]
fn weakly_defective_instance() {
    let out = tensorid(&["generic", "--shape", "8,3,3,2", "--rank", "11", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["kind"]["kind"], "proved_weakly_defective_path");
    let last = v["attempts"].as_array().unwrap().last().unwrap().clone();
    assert_eq!(last["hessian_rank"], 10);
}

#[test]
fn seed_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_tensorid"))
        .args(["generic", "--shape", "4,4,2", "--json"])
        .env("TENSORID_SEED", "41")
        .output()
        .unwrap();
    assert_eq!(json(&out)["seed"], 41);
}

#[test]
fn specific_fixture_report() {
    let out = tensorid(&["specific", "--input", &fixture(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"]["kind"], "unique");
    assert_eq!(v["smoothness"]["rotations"][0]["flattening_rank"], 42);
    assert_eq!(v["smoothness"]["image_dim"], 34);
    assert_eq!(v["kernel_dim"], 34);
    let ranks: Vec<u64> = v["hessians"]
        .as_array()
        .unwrap()
        .iter()
        .map(|h| h["rank"].as_u64().unwrap())
        .collect();
    assert_eq!(ranks, vec![12; 7]);

    let text = tensorid(&["specific", "--input", &fixture()]);
    let text = String::from_utf8_lossy(&text.stdout);
    assert!(text.contains("unique"), "{text}");
    assert!(text.contains("rank 42"), "{text}");
}

#[test]
fn specific_flags() {
    let out = tensorid(&["specific", "--input", &fixture(), "--skip-smoothness"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("unique assuming nonsingularity"));

    let out = tensorid(&["specific", "--input", &fixture(), "--prime", "8191", "--json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["verdict"]["kind"], "modular_evidence");

    let out = tensorid(&[
        "specific",
        "--input",
        &fixture(),
        "--exact",
        "--no-compress",
        "--rotations",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));

    let out = tensorid(&["specific", "--input", &fixture(), "--rotations", "4"]);
    assert_eq!(out.status.code(), Some(64));
    let out = tensorid(&["specific", "--input", &fixture(), "--exact", "--prime", "127"]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn specific_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"shape\": [2, 2").unwrap();
    assert_eq!(
        tensorid(&["specific", "--input", bad.to_str().unwrap()]).status.code(),
        Some(65)
    );

    let wrong = dir.path().join("wrong.json");
    std::fs::write(
        &wrong,
        r#"{"shape": [2, 2, 2], "rank": 1, "factors": [[[1], [0]], [[1], [0]]]}"#,
    )
    .unwrap();
    assert_eq!(
        tensorid(&["specific", "--input", wrong.to_str().unwrap()])
            .status
            .code(),
        Some(65)
    );

    let missing = dir.path().join("missing.json");
    assert_eq!(
        tensorid(&["specific", "--input", missing.to_str().unwrap()])
            .status
            .code(),
        Some(66)
    );
}

#[test]
fn sweep_writes_jsonl_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.jsonl");
    let p = path.to_str().unwrap();
    let out = tensorid(&["sweep", "--max-pi", "30", "--out", p, "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let summary = json(&out);
    assert_eq!(summary["shapes"], summary["computed"]);
    let lines = std::fs::read_to_string(&path).unwrap().lines().count();
    assert_eq!(summary["shapes"], lines);

    let again = json(&tensorid(&[
        "sweep", "--max-pi", "30", "--out", p, "--resume", "--json",
    ]));
    assert_eq!(again["computed"], 0);
    assert_eq!(again["counts"], summary["counts"]);
}

#[test]
fn sweep_output_error() {
    let out = tensorid(&["sweep", "--max-pi", "20", "--out", "/nonexistent-dir/x.jsonl"]);
    assert_eq!(out.status.code(), Some(74));
}

#[test]
fn table_json() {
    let out = tensorid(&["table", "--rows", "2..3", "--cols", "4..5", "--json", "--jobs", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let cells = json(&out);
    let cells = cells.as_array().unwrap();
    assert_eq!(cells.len(), 4);
    for c in cells {
        assert!(c["proved"].as_u64().unwrap() <= c["rbar"].as_u64().unwrap());
    }
    assert_eq!(tensorid(&["table", "--rows", "5-8"]).status.code(), Some(64));
}

#[test]
fn expected_rank_report() {
    let v = json(&tensorid(&["expected-rank", "--shape", "5,5,5", "--json"]));
    assert_eq!(v["pi"], 125);
    assert_eq!(v["sigma"], 12);
    assert_eq!(v["rbar"], 9);
    assert_eq!(v["perfect"], false);
    assert_eq!(v["kruskal"], 6);
    let v = json(&tensorid(&["expected-rank", "--shape", "4,4,4", "--json"]));
    assert_eq!(v["exception_at_rbar"]["kind"], "sporadic");
    let v = json(&tensorid(&["expected-rank", "--shape", "3,3,2,2", "--json"]));
    assert!(v["kruskal"].is_null());
}
