use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_powerarith"))
        .args(args)
        .env_remove("POWERARITH_PRECISION_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_lines(o: &Output) -> Vec<Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).expect("valid JSON line")).collect()
}

fn temp_file(dir: &tempfile::TempDir, name: &str, content: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, content).unwrap();
    p
}

#[test]
fn lambda_of_eight() {
    let o = run(&["lambda", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "2");
    let o = run(&["--json", "lambda", "8"]);
    assert_eq!(json_lines(&o)[0]["lambda"], 2);
}

#[test]
fn mann_solve_inline_gives_four_records() {
    let o = run(&["--json", "mann-solve", "--inline", "1*3^a - 1*2^b = 1*2^c", "--bound", "64"]);
    assert_eq!(o.status.code(), Some(0));
    let mut tuples: Vec<Vec<u64>> = json_lines(&o)
        .iter()
        .map(|r| r["tuple"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect())
        .collect();
    tuples.sort();
    assert_eq!(tuples, vec![vec![1, 0, 1], vec![1, 1, 0], vec![2, 0, 3], vec![2, 3, 0]]);
}

#[test]
fn mann_solve_from_file_and_families() {
    let dir = tempfile::tempdir().unwrap();
    let eq = temp_file(&dir, "eq.json", r#"{"coeffs": [1, 1], "rhs": 1, "bases": [2, 2, 2]}"#);
    let o = run(&["--json", "mann-solve", "--eq", eq.to_str().unwrap(), "--bound", "10", "--families"]);
    assert_eq!(o.status.code(), Some(0));
    let recs = json_lines(&o);
    assert!(recs.iter().any(|r| r["type"] == "family"));
    let o = run(&["--json", "mann-axiom", "--eq", eq.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_lines(&o)[0]["tag"], "A4");
}

#[test]
fn mann_solve_without_solutions_exits_one() {
    let o = run(&["mann-solve", "--inline", "4*3^a = 1*5^b", "--bound", "20"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn residues_and_excluded() {
    let o = run(&["--json", "residues", "2", "9"]);
    let r = &json_lines(&o)[0];
    assert_eq!(r["period"], 6);
    assert_eq!(r["preperiod"], 0);
    let o = run(&["--json", "excluded", "2", "7"]);
    assert_eq!(json_lines(&o)[0]["excluded"], serde_json::json!([3, 5, 6, 7]));
    assert_eq!(run(&["excluded", "2", "4"]).status.code(), Some(64));
}

#[test]
fn kronecker_queries() {
    let o = run(&["--json", "ratio-in", "2", "3", "3/2", "8/5"]);
    assert_eq!(o.status.code(), Some(0));
    let r = &json_lines(&o)[0];
    let (s, t) = (r["s"].as_u64().unwrap() as u32, r["t"].as_u64().unwrap() as u32);
    let (num, den) = (2f64.powi(s as i32), 3f64.powi(t as i32));
    assert!(num * 2.0 > den * 3.0 && num * 5.0 < den * 8.0);
    let o = run(&["--json", "frac-hit", "2", "3", "1/3", "1/2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(run(&["ratio-in", "2", "4", "1", "2"]).status.code(), Some(64));
}

const MOD3: &str = r#"{"vars": [{"id": "x", "base": 2}, {"id": "y", "base": 2}], "rows": [[-1, 1], [4, -1]]}"#;

#[test]
fn ineq_mod3_dichotomy() {
    let dir = tempfile::tempdir().unwrap();
    let sys = temp_file(&dir, "sys.json", MOD3);
    let same = temp_file(&dir, "c11.json", r#"[{"id": "x", "mod": 3, "residue": 1}, {"id": "y", "mod": 3, "residue": 1}]"#);
    let diff = temp_file(&dir, "c12.json", r#"[{"id": "x", "mod": 3, "residue": 1}, {"id": "y", "mod": 3, "residue": 2}]"#);
    let o = run(&["--json", "ineq", "solve", sys.to_str().unwrap(), "--congruences", same.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let rec = &json_lines(&o)[0];
    assert_eq!(rec["status"], "unsat");
    assert!(rec["reason"].is_string());
    let o = run(&["--json", "ineq", "solve", sys.to_str().unwrap(), "--congruences", diff.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_lines(&o)[0]["exponents"], serde_json::json!({"x": 0, "y": 1}));
}

#[test]
fn precision_cap_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let sys = temp_file(&dir, "sys.json", MOD3);
    let o = Command::new(env!("CARGO_BIN_EXE_powerarith"))
        .args(["ineq", "solve", sys.to_str().unwrap()])
        .env("POWERARITH_PRECISION_CAP", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn emit_and_check_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let params = temp_file(&dir, "params.json", r#"{"cong_max": 3, "car_m_max": 1, "e_max": 3}"#);
    let o = run(&["emit-axioms", "--theory", "Tforall", "--bases", "2,3", "--params", params.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for line in text.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        for key in ["tag", "params", "formula", "completeness_flag"] {
            assert!(v.get(key).is_some(), "missing {key} in {line}");
        }
    }
    let ax = temp_file(&dir, "ax.jsonl", &text);
    let o = run(&["--json", "check", ax.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(json_lines(&o).iter().all(|r| r["status"] == "pass"));
    assert_eq!(run(&["emit-axioms", "--theory", "T", "--bases", "2,4"]).status.code(), Some(64));
    assert_eq!(run(&["emit-axioms", "--theory", "Tforall", "--bases", "2,3,5"]).status.code(), Some(64));
}

#[test]
fn check_reports_counterexamples_and_cost() {
    let dir = tempfile::tempdir().unwrap();
    let bad = temp_file(&dir, "bad.txt", "(forall x (-> (< 0 x) (U 2 x)))");
    let o = run(&["--json", "check", bad.to_str().unwrap(), "--window", "1000", "--height", "1024"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json_lines(&o)[0]["assignment"]["x"], "3");
    let o = run(&["check", bad.to_str().unwrap(), "--window", "1000", "--cost-cap", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sat_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let sat = temp_file(&dir, "sat.txt", "(and (U 3 x) (U 2 y) (= (- x y) 1) (< 5 x))");
    let o = run(&["--json", "sat", sat.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_lines(&o)[0]["assignment"], serde_json::json!({"x": "9", "y": "8"}));
    let unsat = temp_file(&dir, "unsat.txt", "(and (U 2 x) (U 2 y) (U 2 z) (= (+ x y) z) (not (= x y)))");
    assert_eq!(run(&["sat", unsat.to_str().unwrap()]).status.code(), Some(1));
    let bad = temp_file(&dir, "bad.txt", "(and (U 2 x)");
    assert_eq!(run(&["sat", bad.to_str().unwrap()]).status.code(), Some(64));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(run(&["bogus"]).status.code(), Some(64));
    assert_eq!(run(&["lambda"]).status.code(), Some(64));
    assert_eq!(run(&["mann-solve", "--bound", "3"]).status.code(), Some(64));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
