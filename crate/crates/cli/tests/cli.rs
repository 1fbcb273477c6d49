use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn omegacat(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_omegacat"));
    cmd.args(args).env_remove("OMEGACAT_PROFILE");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn eq_on_double_involution() {
    let dir = TempDir::new().unwrap();
    let t1 = file(&dir, "t1.sexp", "(inv 0 (inv 0 (gen pt1)))");
    let t2 = file(&dir, "t2.sexp", "(gen pt1)");
    let out = omegacat(&["eq", "--mode", "inv", s(&t1), s(&t2)], &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out), serde_json::json!({ "equal": true }));
}

#[test]
fn eq_reports_distinct_terms() {
    let dir = TempDir::new().unwrap();
    let t1 = file(&dir, "t1.sexp", "(inv 0 (gen pt1))");
    let t2 = file(&dir, "t2.sexp", "(gen pt1)");
    let out = omegacat(&["eq", "--mode", "inv", s(&t1), s(&t2)], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["equal"], false);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = omegacat(&["enumerate-pasting", "--dim", "1", "--max-size", "2", "--frobnicate"], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn parse_errors_carry_positions() {
    let dir = TempDir::new().unwrap();
    let bad = file(&dir, "bad.sexp", "(gset :maxdim 1\n  (cells 0 a)\n  (cells 1 (f a b)))");
    let out = omegacat(&["validate", s(&bad)], &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("3:"), "{err}");
}

#[test]
fn exhausted_budget_exits_3() {
    let dir = TempDir::new().unwrap();
    let t = file(&dir, "t.sexp", "(comp 0 (id (gen pt0)) (gen pt1))");
    let out = omegacat(&["normalize", "--budget", "0", s(&t)], &[]);
    assert_eq!(out.status.code(), Some(3));
    let out = omegacat(&["normalize", "--trace", s(&t)], &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["normal_form"], "(gen pt1)");
    assert_eq!(v["trace"].as_array().unwrap().len(), v["steps"].as_u64().unwrap() as usize);
}

#[test]
fn budget_from_the_environment_yields_to_the_flag() {
    let dir = TempDir::new().unwrap();
    let t = file(&dir, "t.sexp", "(comp 0 (id (gen pt0)) (gen pt1))");
    let env = [("OMEGACAT_PROFILE", "budget=0")];
    assert_eq!(omegacat(&["normalize", s(&t)], &env).status.code(), Some(3));
    assert_eq!(omegacat(&["normalize", "--budget", "10", s(&t)], &env).status.code(), Some(0));
    assert_eq!(omegacat(&["normalize", s(&t)], &[("OMEGACAT_PROFILE", "budget=x")]).status.code(), Some(2));
}

#[test]
fn pasting_census() {
    let out = omegacat(&["enumerate-pasting", "--dim", "2", "--max-size", "2", "--mode", "inv", "--list"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let counts: Vec<u64> = v["census"].as_array().unwrap().iter().map(|c| c["count"].as_u64().unwrap()).collect();
    // plane trees of height at most 2 with e edges, times 2^e decorations
    assert_eq!(counts, vec![1, 2, 8]);
    assert_eq!(v["trees"].as_array().unwrap().len(), 11);
}

#[test]
fn output_is_deterministic() {
    let args = ["enumerate-terms", "--maxdim", "2", "--dim", "1", "--max-nodes", "4"];
    let a = omegacat(&args, &[]);
    let b = omegacat(&args, &[]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

const Q: &str = "(gset q :maxdim 1 (cells 0 a) (cells 1 (f a a)))\n\
                 (collection c :over q :mode inv (proj (a ()) (f (()()))))\n";

#[test]
fn free_operad_round_trip() {
    let dir = TempDir::new().unwrap();
    let q = file(&dir, "q.sexp", Q);
    let out_path = dir.path().join("free.sexp");
    let out = omegacat(&["operad", "free", "--collection", s(&q), "--depth", "1", "--shape-bound", "2", "--out", s(&out_path)], &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["violations"], serde_json::json!([]));
    assert_eq!(v["magma_sizes"][0], 3);
    let laws = omegacat(&["operad", "check-laws", s(&out_path)], &[]);
    assert_eq!(laws.status.code(), Some(0));
    assert!(json(&laws)["checked"].as_u64().unwrap() > 0);
    // the free operad carries no operadic contraction beyond its generators
    let con = omegacat(&["operad", "check-contraction", s(&out_path)], &[]);
    assert_eq!(con.status.code(), Some(1));
    assert!(!json(&con)["violations"].as_array().unwrap().is_empty());
}

#[test]
fn environment_sets_operad_bounds() {
    let dir = TempDir::new().unwrap();
    let q = file(&dir, "q.sexp", Q);
    let env = [("OMEGACAT_PROFILE", "depth=1,shape-bound=2")];
    let a = json(&omegacat(&["operad", "free", "--collection", s(&q)], &env));
    let b = json(&omegacat(&["operad", "free", "--collection", s(&q), "--depth", "1", "--shape-bound", "2"], &[]));
    assert_eq!(a, b);
    let c = json(&omegacat(&["operad", "free", "--collection", s(&q), "--depth", "0"], &env));
    assert_ne!(a["magma_sizes"], c["magma_sizes"]);
}

#[test]
fn initial_operad_passes_its_laws() {
    let out = omegacat(&["operad", "initial", "--maxdim", "1", "--depth", "2", "--shape-bound", "2", "--mode", "strict"], &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["operad_sizes"][0], 1);
}

#[test]
fn algebra_check_across_files() {
    let dir = TempDir::new().unwrap();
    let op = file(&dir, "op.sexp", "(operad t terminal :maxdim 1 :bound 2 :mode inv)\n");
    let alg = file(&dir, "alg.sexp", "(gset x :maxdim 1 (cells 0 u) (cells 1 (e u u)))\n(algebra a :operad t free :base x :bound 2)\n");
    let out = omegacat(&["algebra", "check", "--operad", s(&op), "--algebra", s(&alg)], &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["violations"], serde_json::json!([]));
}

#[test]
fn compose_collections_from_a_file() {
    let dir = TempDir::new().unwrap();
    let f = file(&dir, "c.sexp", Q);
    // f labelled by f twice flattens to four edges
    let small = json(&omegacat(&["compose", s(&f), "--left", "c", "--right", "c", "--bound", "2"], &[]));
    assert_eq!(small["sizes"], serde_json::json!([1, 0]));
    let out = omegacat(&["compose", s(&f), "--left", "c", "--right", "c", "--bound", "4"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["mode"], "inv");
    assert_eq!(v["sizes"], serde_json::json!([1, 1]));
    assert_eq!(v["cells"][1]["proj"], "(()()()())");
}

#[test]
fn quick_selftest_embeds_the_seed() {
    let out = omegacat(&["selftest", "--profile", "quick", "--seed", "11"], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["seed"], 11);
    assert_eq!(v["criteria"].as_array().unwrap().len(), 9);
}
