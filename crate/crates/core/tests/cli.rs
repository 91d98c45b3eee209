use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use tempfile::TempDir;
use twise::model::{generate_random_model, serialize_native};

fn twise() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_twise"));
    cmd.env_remove("TWISE_OUT_DIR");
    cmd
}

fn run(args: &[&str]) -> Output {
    twise().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const TABLE_ONE: &str = "f1,f2,f3,f4\n1,1,1,0\n1,1,0,1\n1,0,1,0\n";

#[test]
fn single_product_model_yields_that_product() {
    let dir = TempDir::new().unwrap();
    let model = write(dir.path(), "one.cnf", "p cnf 3 3\n1 0\n-2 0\n3 0\n");
    let out = dir.path().join("out");
    let o = run(&[
        "generate", "--model", s(&model), "--strategy", "unpredictable", "--products", "1", "--out", s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(out.join("products.csv")).unwrap(), "f1,f2,f3\n1,0,1\n");
    assert!(out.join("manifest.json").exists());
    assert!(!out.join("trace.csv").exists());
}

#[test]
fn iteration_capped_generation_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let fm = generate_random_model(20, 0.5, 3).unwrap();
    let model = write(dir.path(), "m.json", &serialize_native(&fm));
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}"));
        let o = run(&["generate", "--model", s(&model), "--products", "5", "--iterations", "200", "--seed", "9", "--out", s(&out)]);
        assert!(o.status.success());
        outputs.push((
            fs::read(out.join("products.csv")).unwrap(),
            fs::read(out.join("trace.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
    let trace = String::from_utf8(outputs[0].1.clone()).unwrap();
    assert!(trace.starts_with("iteration,elapsed_ms,fitness,accepted\n0,,"));
    assert_eq!(trace.lines().count(), 202);
}

#[test]
fn greedy_on_worked_example() {
    let dir = TempDir::new().unwrap();
    let model = write(dir.path(), "free.cnf", "p cnf 4 0\n");
    let suite = write(dir.path(), "suite.csv", TABLE_ONE);
    let out = dir.path().join("out");
    let o = run(&["prioritize", "--model", s(&model), "--suite", s(&suite), "--algorithm", "greedy", "--out", s(&out)]);
    assert!(o.status.success());
    assert_eq!(
        fs::read_to_string(out.join("products.csv")).unwrap(),
        "f1,f2,f3,f4\n1,1,0,1\n1,0,1,0\n1,1,1,0\n"
    );
}

#[test]
fn single_product_suite_is_unchanged() {
    let dir = TempDir::new().unwrap();
    let model = write(dir.path(), "free.cnf", "p cnf 4 0\n");
    let suite = write(dir.path(), "suite.csv", "f1,f2,f3,f4\n0,1,1,0\n");
    for alg in ["greedy", "near-optimal", "random"] {
        let out = dir.path().join(alg);
        let o = run(&["prioritize", "--model", s(&model), "--suite", s(&suite), "--algorithm", alg, "--out", s(&out)]);
        assert!(o.status.success());
        assert_eq!(fs::read_to_string(out.join("products.csv")).unwrap(), "f1,f2,f3,f4\n0,1,1,0\n");
    }
}

fn sorted_rows(text: &str) -> Vec<String> {
    let mut rows: Vec<String> = text.lines().skip(1).map(str::to_string).collect();
    rows.sort();
    rows
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn prioritize_outputs_a_permutation(
        rows in prop::collection::vec(prop::collection::vec(any::<bool>(), 5), 1..12),
        alg in prop::sample::select(vec!["greedy", "near-optimal", "random"]),
    ) {
        let dir = TempDir::new().unwrap();
        let model = write(dir.path(), "free.cnf", "p cnf 5 0\n");
        let mut text = String::from("f1,f2,f3,f4,f5\n");
        for r in &rows {
            let cells: Vec<&str> = r.iter().map(|&b| if b { "1" } else { "0" }).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        let suite = write(dir.path(), "suite.csv", &text);
        let out = dir.path().join("out");
        let code = twise::cli::run(["twise", "prioritize", "--model", s(&model), "--suite", s(&suite),
            "--algorithm", alg, "--seed", "3", "--out", s(&out)]);
        prop_assert_eq!(code, 0);
        let got = fs::read_to_string(out.join("products.csv")).unwrap();
        prop_assert_eq!(got.lines().next(), Some("f1,f2,f3,f4,f5"));
        prop_assert_eq!(sorted_rows(&got), sorted_rows(&text));
    }
}

#[test]
fn full_valid_suite_has_full_coverage_and_round_trips() {
    let dir = TempDir::new().unwrap();
    let model = write(dir.path(), "m.cnf", "c i 1 a\nc i 2 b\nc i 3 c\np cnf 3 1\n-1 2 0\n");
    let gen = dir.path().join("gen");
    // The model has exactly six valid products; asking for six with the
    // blocking-clause sampler yields all of them.
    let o = run(&["generate", "--model", s(&model), "--strategy", "unpredictable", "--products", "6", "--out", s(&gen)]);
    assert!(o.status.success());
    let suite = gen.join("products.csv");
    assert_eq!(sorted_rows(&fs::read_to_string(&suite).unwrap()).len(), 6);
    let cov = dir.path().join("cov");
    let o = run(&["coverage", "--model", s(&model), "--suite", s(&suite), "--t", "2", "--curve", "--out", s(&cov)]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(cov.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["coverage"], 1.0);
    assert_eq!(report["method"], "exact");
    assert_eq!(report["schema_version"], 1);
    assert!(report["auc"].as_f64().unwrap() > 0.0);
    let curve = fs::read_to_string(cov.join("curve.csv")).unwrap();
    assert!(curve.starts_with("prefix,coverage\n1,"));
    assert!(curve.ends_with("6,1\n"));
    let csv = fs::read_to_string(cov.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn sampled_and_exact_agree() {
    let dir = TempDir::new().unwrap();
    let fm = generate_random_model(8, 0.5, 21).unwrap();
    let model = write(dir.path(), "m.json", &serialize_native(&fm));
    let gen = dir.path().join("gen");
    assert!(run(&["generate", "--model", s(&model), "--strategy", "unpredictable", "--products", "4", "--out", s(&gen)]).status.success());
    let suite = gen.join("products.csv");
    let report = |mode: &str, name: &str| -> serde_json::Value {
        let out = dir.path().join(name);
        let o = run(&["coverage", "--model", s(&model), "--suite", s(&suite), "--mode", mode, "--samples", "10000", "--seed", "4", "--out", s(&out)]);
        assert!(o.status.success());
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
    };
    let exact = report("exact", "e")["coverage"].as_f64().unwrap();
    let sampled = report("sampled", "s");
    let se = sampled["std_error"].as_f64().unwrap();
    assert!((sampled["coverage"].as_f64().unwrap() - exact).abs() <= 3.0 * se);
}

fn assert_exit(o: &Output, code: i32) {
    assert_eq!(o.status.code(), Some(code), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    assert!(!o.stderr.is_empty());
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let good = write(dir.path(), "free.cnf", "p cnf 4 0\n");
    let bad = write(dir.path(), "bad.cnf", "p cnf 2 1\n1 x 0\n");
    let unsat = write(dir.path(), "unsat.cnf", "p cnf 1 2\n1 0\n-1 0\n");
    let suite = write(dir.path(), "suite.csv", TABLE_ONE);
    let empty = write(dir.path(), "empty.csv", "f1,f2,f3,f4\n");
    let wrong = write(dir.path(), "wrong.csv", "a,b,c,d\n1,1,1,1\n");
    let out = dir.path().join("out");
    let o = s(&out);

    assert_exit(&run(&["generate", "--model", s(&good), "--bogus"]), 2);
    assert_exit(&run(&["generate", "--model", s(&good), "--iterations", "3", "--budget-seconds", "1"]), 2);
    assert_exit(&run(&["generate", "--model", s(&good), "--products", "0", "--iterations", "3", "--out", o]), 2);
    assert_exit(&run(&["generate", "--model", s(&bad), "--iterations", "3", "--out", o]), 3);
    assert_exit(&run(&["generate", "--model", s(&unsat), "--iterations", "3", "--out", o]), 4);
    assert_exit(&run(&["prioritize", "--model", s(&good), "--suite", s(&wrong), "--out", o]), 5);
    assert_exit(&run(&["coverage", "--model", s(&good), "--suite", s(&empty), "--out", o]), 2);
    assert_exit(&run(&["coverage", "--model", s(&good), "--suite", s(&suite), "--t", "9", "--out", o]), 2);
    assert_exit(&run(&["evaluate", "--models", s(&dir.path().join("none")), "--out", o]), 1);
    assert!(!out.exists(), "failed commands must not leave output behind");

    let budget = run(&["coverage", "--model", s(&good), "--suite", s(&suite), "--t", "3", "--budget", "10", "--out", o]);
    assert_exit(&budget, 6);
    let stderr = String::from_utf8_lossy(&budget.stderr);
    assert!(stderr.contains("--mode sampled --samples 100000"), "{stderr}");
    assert!(!out.exists());

    let help = run(&["coverage", "--help"]);
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn empty_model_directory_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let models = dir.path().join("models");
    fs::create_dir(&models).unwrap();
    fs::write(models.join("notes.txt"), "not a model").unwrap();
    let o = run(&["evaluate", "--models", s(&models), "--out", s(&dir.path().join("out"))]);
    assert_exit(&o, 2);
}

#[test]
fn output_directory_from_environment() {
    let dir = TempDir::new().unwrap();
    let model = write(dir.path(), "free.cnf", "p cnf 3 0\n");
    let target = dir.path().join("from-env");
    let o = twise()
        .env("TWISE_OUT_DIR", &target)
        .args(["generate", "--model", s(&model), "--strategy", "unpredictable", "--products", "2"])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(target.join("products.csv").exists());
}

#[test]
fn evaluate_row_counts() {
    let dir = TempDir::new().unwrap();
    let models = dir.path().join("models");
    fs::create_dir(&models).unwrap();
    fs::write(models.join("a.json"), serialize_native(&generate_random_model(10, 0.5, 1).unwrap())).unwrap();
    let out = dir.path().join("out");
    let o = run(&[
        "evaluate", "--models", s(&models), "--strategies", "search", "--repeats", "1", "--iterations", "50",
        "--products", "4", "--out", s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let results = fs::read_to_string(out.join("results.csv")).unwrap();
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(results.lines().count(), 2);
    assert_eq!(summary.lines().count(), 2);
    assert!(results.lines().nth(1).unwrap().starts_with("a.json,10,search,2,exact,1,"));
    assert!(summary.starts_with("models,rows,coverage_mean_search,auc_mean_random,auc_mean_greedy,auc_mean_near_optimal"));
    assert_eq!(fs::read_to_string(out.join("timings.csv")).unwrap().lines().count(), 2);
}

#[test]
fn timed_generation_respects_budget() {
    let dir = TempDir::new().unwrap();
    let fm = generate_random_model(200, 0.5, 5).unwrap();
    let model = write(dir.path(), "m200.json", &serialize_native(&fm));
    let out = dir.path().join("out");
    let start = Instant::now();
    let o = run(&["generate", "--model", s(&model), "--products", "50", "--budget-seconds", "60", "--out", s(&out)]);
    let elapsed = start.elapsed();
    assert!(o.status.success());
    assert!(elapsed <= Duration::from_secs(66), "took {elapsed:?}");
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    let last: Vec<&str> = trace.lines().last().unwrap().split(',').collect();
    assert!(last[1].parse::<u64>().unwrap() <= 60_000 + 6_000);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["reproducible"], false);
}
