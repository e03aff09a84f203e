use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn golden(name: &str) -> PathBuf {
    manifest().join("fixtures/golden").join(name)
}

fn local(name: &str) -> PathBuf {
    manifest().join("tests/fixtures").join(name)
}

fn decint(args: &[&str], file: Option<&PathBuf>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_decint"));
    cmd.args(args);
    if let Some(f) = file {
        cmd.arg(f);
    }
    cmd.output().expect("binary runs")
}

fn run_json(file: &PathBuf, extra: &[&str]) -> (Value, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_decint"))
        .arg("run")
        .arg(file)
        .args(extra)
        .output()
        .unwrap();
    let doc = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{}: {e}\n{}",
            file.display(),
            String::from_utf8_lossy(&out.stderr)
        );
    });
    (doc, out.status.code().unwrap())
}

fn result(doc: &Value, i: usize) -> (&Value, &str) {
    let r = &doc["results"][i];
    (&r["value"], r["status"].as_str().unwrap())
}

#[test]
fn workers_golden() {
    let (doc, code) = run_json(&golden("workers.json"), &[]);
    assert_eq!(code, 0);
    assert_eq!(doc["name"], "workers");
    let (value, status) = result(&doc, 0);
    assert!((value.as_f64().unwrap() - 4.6).abs() < 1e-9);
    assert_eq!(status, "exact");
    assert!(doc["results"][0]["wall_time_ms"].as_f64().unwrap() >= 0.0);
    assert_eq!(result(&doc, 2).0.as_f64(), Some(0.0));
}

#[test]
fn fast_food_golden() {
    let (doc, code) = run_json(&golden("fastfood.json"), &[]);
    assert_eq!(code, 0);
    let values: Vec<f64> = (0..3)
        .map(|i| result(&doc, i).0.as_f64().unwrap())
        .collect();
    assert!((values[0] - 205.0).abs() < 1e-9);
    assert!((values[1] - 54.1).abs() < 1e-9);
    assert_eq!(values[2], 0.0);
    let witness = doc["results"][0]["witness"].as_array().unwrap();
    let total: f64 = witness
        .iter()
        .map(|t| t["coefficient"].as_f64().unwrap() * t["weight"].as_f64().unwrap())
        .sum();
    assert!((total - 205.0).abs() < 1e-9);
}

#[test]
fn oracle_mode_agrees_with_the_solver() {
    let (solver, _) = run_json(&golden("workers.json"), &[]);
    let (oracle, code) = run_json(&golden("workers.json"), &["--mode", "oracle"]);
    assert_eq!(code, 0);
    assert_eq!(oracle["mode"], "oracle");
    for i in 0..3 {
        let a = result(&solver, i).0.as_f64().unwrap();
        let b = result(&oracle, i).0.as_f64().unwrap();
        assert!((a - b).abs() < 1e-9, "query {i}: {a} vs {b}");
    }
}

#[test]
fn classical_mode_reads_one_based_subsets() {
    let (doc, code) = run_json(&local("chain_capacity.json"), &[]);
    assert_eq!(code, 0);
    // 0.2 * 1 + 0.3 * m{1,2} + 0.4 * m{2} = 0.2 + 0.18 + 0.12
    assert!((result(&doc, 0).0.as_f64().unwrap() - 0.5).abs() < 1e-12);
    let (sub, _) = run_json(&local("chain_capacity.json"), &["--mode", "sub"]);
    assert!((result(&sub, 0).0.as_f64().unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn exit_code_matrix() {
    // exact
    assert_eq!(run_json(&golden("comp.json"), &[]).1, 0);
    // approximate
    let (doc, code) = run_json(&local("approximate.json"), &[]);
    assert_eq!((result(&doc, 0).1, code), ("approximate", 0));
    assert!(doc["results"][0]["error_bound"].as_f64().unwrap() > 0.0);
    // unbounded
    let (doc, code) = run_json(&golden("x_plus_sqrt_y.json"), &[]);
    assert_eq!((result(&doc, 0).1, code), ("unbounded", 2));
    assert!(result(&doc, 0).0.as_f64().unwrap() > 1e3);
    assert_eq!(result(&doc, 1).1, "exact");
    // infeasible
    let (doc, code) = run_json(&local("uncoverable.json"), &[]);
    assert_eq!((result(&doc, 1).1, code), ("infeasible_domain", 2));
    assert!(result(&doc, 1).0.is_null());
    // input errors
    for bad in ["malformed.json", "bad_length.json"] {
        let out = decint(&["run"], Some(&local(bad)));
        assert_eq!(out.status.code(), Some(1), "{bad}");
        assert!(out.stdout.is_empty());
    }
    let out = decint(&["run", "--mode", "average"], Some(&golden("workers.json")));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown mode"));
    let out = decint(&["run"], Some(&local("does-not-exist.json")));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn diagnostics_name_line_and_field() {
    let out = decint(&["run"], Some(&local("malformed.json")));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 5"));
    let out = decint(&["run"], Some(&local("bad_length.json")));
    assert!(String::from_utf8_lossy(&out.stderr).contains("queries[0]"));
}

#[test]
fn empty_query_list_is_an_empty_document() {
    let (doc, code) = run_json(&local("empty_queries.json"), &[]);
    assert_eq!(code, 0);
    assert_eq!(doc["results"], Value::Array(Vec::new()));
}

#[test]
fn fixtures_are_canonical() {
    let mut files: Vec<PathBuf> = std::fs::read_dir(manifest().join("fixtures/golden"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.extend(
        [
            "uncoverable.json",
            "empty_queries.json",
            "approximate.json",
            "chain_capacity.json",
        ]
        .iter()
        .map(|f| local(f)),
    );
    assert!(files.len() >= 13);
    for f in files {
        let text = std::fs::read_to_string(&f).unwrap();
        let out = decint(&["fmt"], Some(&f));
        assert_eq!(out.status.code(), Some(0), "{}", f.display());
        assert_eq!(
            String::from_utf8(out.stdout).unwrap(),
            text,
            "{} is not canonical",
            f.display()
        );
    }
}

#[test]
fn explain_prints_the_optimal_collection() {
    let out = decint(
        &["explain", "--query", "2,2"],
        Some(&golden("workers.json")),
    );
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("E(2,1)=3.5\n"), "{text}");
    assert!(text.contains("E(0,1)=1.1\n"), "{text}");
    assert!(text.contains("total 4.6\n"));
    assert!(text.contains("slack (0,0)\n"));

    let out = decint(
        &["explain", "--query", "50,30,60"],
        Some(&golden("fastfood.json")),
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("total 205\n"), "{text}");

    let out = decint(
        &["explain", "--query", "0,0"],
        Some(&golden("workers.json")),
    );
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "query (0,0)\ntotal 0\nslack (0,0)\n"
    );

    let out = decint(&["explain"], Some(&local("approximate.json")));
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("status approximate"));
}

#[test]
fn check_reports_and_is_deterministic() {
    let a = decint(&["check", "oracle-equivalence", "--seed", "42"], None);
    assert_eq!(a.status.code(), Some(0));
    let text = String::from_utf8(a.stdout.clone()).unwrap();
    assert!(
        text.contains("sub = brute force            50/50 pass"),
        "{text}"
    );
    let b = decint(&["check", "oracle-equivalence", "--seed", "42"], None);
    assert_eq!(a.stdout, b.stdout);

    let out = decint(
        &["check", "monotonicity", "--file"],
        Some(&golden("workers.json")),
    );
    assert_eq!(out.status.code(), Some(0));

    let out = decint(&["check", "frank"], None);
    assert!(String::from_utf8(out.stdout).unwrap().contains("pass"));

    let out = decint(&["check", "nonsense"], None);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn flags_reach_the_solvers() {
    // one member of at most (2,2): E(2,2)
    let (doc, _) = run_json(&golden("workers.json"), &["--max-parts", "1"]);
    assert!((result(&doc, 0).0.as_f64().unwrap() - 4.3).abs() < 1e-9);
    let (coarse, _) = run_json(
        &golden("maxlog_superadditive.json"),
        &["--grid-step", "0.5"],
    );
    let (fine, _) = run_json(&golden("maxlog_superadditive.json"), &[]);
    assert!(result(&coarse, 0).0.as_f64().unwrap() < result(&fine, 0).0.as_f64().unwrap());
    let out = decint(
        &["run", "--mode", "oracle:super", "--node-budget", "10"],
        Some(&golden("fastfood.json")),
    );
    assert_eq!(out.status.code(), Some(1));
}
