use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn flagacs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flagacs"))
        .args(args)
        .output()
        .expect("run flagacs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const SMALL: &str = "A:1-3,B:2,C:3,G:2";

fn classify_to(path: &Path, extra: &[&str]) {
    let p = path.to_str().unwrap();
    let mut args = vec!["classify", "--families", SMALL, "--out", p];
    args.extend_from_slice(extra);
    let o = flagacs(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["classify", "--families", "A:5-2"],
        vec!["classify", "--families", "Q:2"],
        vec!["classify", "--families", "A:13"],
        vec!["classify", "--families", "B:1"],
        vec!["inspect", "--type", "A", "--rank", "3", "--theta", "l1-l3"],
        vec!["inspect", "--type", "A", "--rank", "3", "--theta", "bogus"],
        vec!["verify", "/nonexistent/report.json"],
        vec!["classify", "--no-such-flag"],
    ] {
        let o = flagacs(&args);
        assert_eq!(o.status.code(), Some(2), "{:?}: {}", args, String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn verify_round_trip_and_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    classify_to(&report, &[]);

    let o = flagacs(&["verify", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("verified "));

    // break J² = -I in the first witness
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let flag = v["flags"]
        .as_array_mut()
        .unwrap()
        .iter_mut()
        .find(|f| f["acs"]["verdict"] == "witness")
        .unwrap();
    let j = flag["acs"]["j"].as_array_mut().unwrap();
    j[0][0] = Value::String("1".into());
    let tampered = dir.path().join("tampered.json");
    std::fs::write(&tampered, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    let o = flagacs(&["verify", tampered.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));

    // unknown schema version is a usage error
    v["schema_version"] = Value::from(99);
    std::fs::write(&tampered, serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(flagacs(&["verify", tampered.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    classify_to(&a, &["--seed", "7"]);
    classify_to(&b, &["--seed", "7"]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

/// id → (acs verdict, [model=status]) from either output format.
fn verdicts_from_text(text: &str) -> BTreeMap<String, (String, Vec<String>)> {
    text.lines()
        .filter(|l| l.contains(" | "))
        .map(|l| {
            let cols: Vec<&str> = l.split(" | ").collect();
            let acs = cols[2].strip_prefix("acs ").unwrap().to_string();
            (cols[0].to_string(), (acs, cols[4..].iter().map(|s| s.to_string()).collect()))
        })
        .collect()
}

fn verdicts_from_json(v: &Value) -> BTreeMap<String, (String, Vec<String>)> {
    v["flags"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| {
            let integ = f["integrability"]
                .as_array()
                .unwrap()
                .iter()
                .map(|r| format!("{}={}", r["model"].as_str().unwrap(), r["status"].as_str().unwrap()))
                .collect();
            (
                f["id"].as_str().unwrap().to_string(),
                (f["acs"]["verdict"].as_str().unwrap().to_string(), integ),
            )
        })
        .collect()
}

#[test]
fn text_and_json_carry_the_same_verdicts() {
    let json = flagacs(&["classify", "--families", SMALL, "--model", "both"]);
    let text = flagacs(&["classify", "--families", SMALL, "--model", "both", "--format", "text"]);
    assert_eq!(json.status.code(), Some(0));
    assert_eq!(text.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&json)).unwrap();
    let from_json = verdicts_from_json(&v);
    assert!(!from_json.is_empty());
    assert_eq!(verdicts_from_text(&stdout(&text)), from_json);
}

#[test]
fn inspect_d4_lists_components_and_verdicts() {
    let o = flagacs(&["inspect", "--type", "D", "--rank", "4", "--theta", "l1-l2,l3-l4", "--model", "n-plus"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    for v in ["V1 ", "V2 ", "V3 ", "V4 ", "V5 ", "V6 "] {
        assert!(s.contains(v), "{}", s);
    }
    assert!(s.contains("X[l1+l3] - X[l2+l4]") || s.contains("X[l1+l3] + X[l2+l4]"), "{}", s);
    assert!(s.contains("invariant almost complex structure: yes"));
    assert!(s.contains("integrability: not_integrable_certified"));
}

#[test]
fn inspect_c3_reports_an_integrable_witness() {
    let o = flagacs(&["inspect", "--type", "C", "--rank", "3", "--theta", "2l3", "--u-basis", "--all-solutions"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("basis: S[1,1], S[2,2], S[2,1], A[2,1], S[3,1], A[3,1], S[3,2], A[3,2]"), "{}", s);
    assert!(s.contains("integrability: integrable_witness"));
    assert!(s.matches("  solution [").count() >= 2, "{}", s);
}

#[test]
fn inspect_a1_has_no_structure() {
    let o = flagacs(&["inspect", "--type", "A", "--rank", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("module dimension 1"));
    assert!(s.contains("{-l1+l2} odd"));
    assert!(s.contains("invariant almost complex structure: no (odd_m_class, dim 1)"));

    let o = flagacs(&["inspect", "--type", "A", "--rank", "1", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["flag"]["acs"]["verdict"], "obstruction");
    assert_eq!(v["flag"]["module_dim"], 1);
}
