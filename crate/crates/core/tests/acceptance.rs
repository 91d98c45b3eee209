//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line. Pass substrings as
//! arguments to run a subset, e.g. `cargo test --test acceptance -- c1 c4`.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twise::coverage::{
    estimate_coverage_with, estimate_valid_tsets, exact_coverage, exact_curve, exact_valid_tsets, Estimator,
    ValidTSetSample,
};
use twise::generation::{search_generate, unpredictable_generate, SearchConfig};
use twise::model::generate_random_model;
use twise::sat::solve;
use twise::prioritization::{area_under_curve, greedy_prioritize, near_optimal_prioritize, random_prioritize};
use twise::similarity::{fitness, jaccard_distance};
use twise::stats::{mean, spearman};
use twise::{FeatureModel, Product};

const DENSITY: f64 = 0.5;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn main() {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, &str, fn() -> Outcome); 9] = [
        ("c1", "worked-example fidelity", c1_worked_example),
        ("c2", "exact coverage vs brute-force oracle", c2_oracle_equivalence),
        ("c3", "estimator calibration", c3_estimator_calibration),
        ("c4", "search monotonicity and validity", c4_search_monotone),
        ("c5", "search beats unpredictable sampling", c5_search_beats_baseline),
        ("c6", "prioritization ordering", c6_prioritization_ordering),
        ("c7", "fitness/coverage correlation", c7_correlation),
        ("c8", "scalability smoke", c8_scalability),
        ("c9", "determinism from manifest", c9_determinism),
    ];
    let mut failed = 0;
    let mut ran = 0;
    for (id, name, f) in criteria {
        if !filters.is_empty() && !filters.iter().any(|flt| id.contains(flt.as_str()) || name.contains(flt.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                outcome(false, format!("panicked: {msg}"))
            });
        if !result.pass {
            failed += 1;
        }
        println!(
            "acceptance {id} {name}: {} ({}) [{:.1}s]",
            if result.pass { "PASS" } else { "FAIL" },
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn table_one() -> Vec<Product> {
    vec![
        Product::from_bools(&[true, true, true, false]),
        Product::from_bools(&[true, true, false, true]),
        Product::from_bools(&[true, false, true, false]),
    ]
}

fn c1_worked_example() -> Outcome {
    let s = table_one();
    let d12 = jaccard_distance(&s[0], &s[1]).unwrap();
    let d13 = jaccard_distance(&s[0], &s[2]).unwrap();
    let d23 = jaccard_distance(&s[1], &s[2]).unwrap();
    let f = fitness(&s).unwrap();
    let exact = [2.0 / 3.0, 2.0 / 5.0, 6.0 / 7.0];
    let ok = [d12, d13, d23].iter().zip(exact).all(|(d, e)| (d - e).abs() <= 1e-9)
        && (f - exact.iter().sum::<f64>()).abs() <= 1e-9
        && format!("{d12:.2} {d13:.1} {d23:.2} {f:.2}") == "0.67 0.4 0.86 1.92"
        && (f - 1.93).abs() < 0.01;
    outcome(ok, format!("d = {d12:.4}, {d13:.4}, {d23:.4}; fitness = {f:.4}"))
}

/// All valid products by enumerating every assignment against the clauses.
fn oracle_products(fm: &FeatureModel) -> Vec<Vec<bool>> {
    let n = fm.num_features();
    (0u32..1 << n)
        .map(|mask| (0..n).map(|i| mask >> i & 1 == 1).collect::<Vec<bool>>())
        .filter(|a| {
            fm.clauses()
                .iter()
                .all(|c| c.iter().any(|&l| a[l.unsigned_abs() as usize - 1] == (l > 0)))
        })
        .collect()
}

fn oracle_tsets(products: &[Vec<bool>], t: usize) -> BTreeSet<Vec<i32>> {
    let n = products.first().map_or(0, Vec::len);
    let mut out = BTreeSet::new();
    for p in products {
        for mask in 0u32..1 << n {
            if mask.count_ones() as usize != t {
                continue;
            }
            let lits: Vec<i32> = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| if p[i] { i as i32 + 1 } else { -(i as i32 + 1) })
                .collect();
            out.insert(lits);
        }
    }
    out
}

fn c2_oracle_equivalence() -> Outcome {
    let mut mismatches = Vec::new();
    let mut checks = 0;
    for i in 0..50u64 {
        let n = 4 + (i % 7) as usize;
        let fm = generate_random_model(n, 0.3 + 0.05 * (i % 10) as f64, 1000 + i).unwrap();
        let valid = oracle_products(&fm);
        let mut rng = ChaCha8Rng::seed_from_u64(i);
        let k = rng.gen_range(1..=valid.len().min(6));
        let suite: Vec<Vec<bool>> = valid.choose_multiple(&mut rng, k).cloned().collect();
        let products: Vec<Product> = suite.iter().map(|b| Product::from_bools(b)).collect();
        for t in [2, 3] {
            let all = oracle_tsets(&valid, t).len() as u64;
            let covered = oracle_tsets(&suite, t).len() as f64;
            let got_all = exact_valid_tsets(&fm, t).unwrap();
            let report = exact_coverage(&fm, &products, t).unwrap();
            checks += 1;
            if got_all != all || report.covered != covered || report.total_valid != all as f64 {
                mismatches.push(format!("model {i} t={t}: {got_all} vs {all}, {} vs {covered}", report.covered));
            }
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("{}/{checks} model x t cases match {}", checks - mismatches.len(), mismatches.join("; ")),
    )
}

fn c3_estimator_calibration() -> Outcome {
    let samples = 10_000;
    let (mut count_ok, mut uniform_ok, mut covered_ok) = (0, 0, 0);
    for i in 0..20u64 {
        let fm = generate_random_model(8, DENSITY, 3000 + i).unwrap();
        let t = if i % 2 == 0 { 2 } else { 3 };
        let exact_total = exact_valid_tsets(&fm, t).unwrap() as f64;
        let est = estimate_valid_tsets(&fm, t, samples, 7 + i).unwrap();
        if (est.estimate - exact_total).abs() <= 3.0 * est.std_error {
            count_ok += 1;
        }
        let suite = unpredictable_generate(&fm, 4, 50 + i).unwrap();
        let exact = exact_coverage(&fm, &suite, t).unwrap().coverage;
        for (estimator, hits) in [
            (Estimator::UniformRejection, &mut uniform_ok),
            (Estimator::CoveredSetSampling, &mut covered_ok),
        ] {
            let r = estimate_coverage_with(&fm, &suite, t, samples, 90 + i, estimator).unwrap();
            if (r.coverage - exact).abs() <= 3.0 * r.std_error.unwrap() {
                *hits += 1;
            }
        }
    }
    outcome(
        count_ok >= 18 && uniform_ok >= 18 && covered_ok >= 18,
        format!(
            "within 3 SE: valid t-sets {count_ok}/20, coverage uniform {uniform_ok}/20, covered-set {covered_ok}/20"
        ),
    )
}

fn c4_search_monotone() -> Outcome {
    let mut problems = Vec::new();
    let mut accepted = 0;
    for run in 0..100u64 {
        let n = 8 + (run % 13) as usize;
        let fm = generate_random_model(n, DENSITY, 5000 + run / 4).unwrap();
        let cfg = SearchConfig::with_iterations(2 + (run % 7) as usize, 150, run);
        let out = search_generate(&fm, &cfg).unwrap();
        let trace = &out.trace;
        let mut current = trace.initial_fitness;
        for r in &trace.records {
            let ok = if r.accepted {
                r.fitness_after > r.fitness_before
            } else {
                r.fitness_after == r.fitness_before
            };
            if !ok || r.fitness_before != current {
                problems.push(format!("run {run} iteration {}", r.iteration));
            }
            current = r.fitness_after;
            accepted += usize::from(r.accepted);
        }
        let invalid = out.suite.products.iter().chain(&out.initial).any(|p| !fm.is_valid_product(p).unwrap());
        if invalid {
            problems.push(format!("run {run}: invalid product"));
        }
        if out.fitness < trace.initial_fitness || (fitness(&out.suite.products).unwrap() - out.fitness).abs() > 1e-9 {
            problems.push(format!("run {run}: final fitness"));
        }
    }
    outcome(
        problems.is_empty(),
        format!("100 runs, {accepted} accepted iterations, {} violations {}", problems.len(), problems.join("; ")),
    )
}

fn c5_search_beats_baseline() -> Outcome {
    let (mut search, mut unpredictable) = (Vec::new(), Vec::new());
    let mut strict = 0;
    for i in 0..20u64 {
        let fm = generate_random_model(50, DENSITY, 7000 + i).unwrap();
        let s = search_generate(&fm, &SearchConfig::with_iterations(10, 2000, i)).unwrap();
        let u = unpredictable_generate(&fm, 10, i).unwrap();
        let cs = exact_coverage(&fm, &s.suite.products, 2).unwrap().coverage;
        let cu = exact_coverage(&fm, &u, 2).unwrap().coverage;
        strict += usize::from(cs > cu);
        search.push(cs);
        unpredictable.push(cu);
    }
    let (ms, mu) = (mean(&search), mean(&unpredictable));
    outcome(
        ms >= mu && strict >= 12,
        format!("mean coverage search {ms:.4} vs unpredictable {mu:.4}; strictly better on {strict}/20"),
    )
}

/// `count` valid products that agree with `base` everywhere except on up
/// to `free` randomly chosen features.
fn near_copies(fm: &FeatureModel, base: &Product, count: usize, free: usize, seed: u64) -> Vec<Product> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = fm.num_features();
    (0..count)
        .map(|_| {
            let freed: Vec<usize> = rand::seq::index::sample(&mut rng, n, free).iter().map(|f| f + 1).collect();
            let fixed: Vec<i32> = (1..=n).filter(|f| !freed.contains(f)).map(|f| base.literal(f)).collect();
            solve(fm, &fixed, rng.gen()).unwrap().expect("base itself satisfies the fixed literals")
        })
        .collect()
}

fn c6_prioritization_ordering() -> Outcome {
    let (mut random, mut greedy, mut near) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..20u64 {
        let fm = generate_random_model(30, DENSITY, 9000 + i).unwrap();
        // Half dissimilar products, half a cluster of near-copies of one
        // product.
        let mut suite = unpredictable_generate(&fm, 20, i).unwrap();
        suite.extend(near_copies(&fm, &suite[0], 20, 3, i));
        let total = exact_valid_tsets(&fm, 2).unwrap();
        let auc = |ordered: &[Product]| area_under_curve(&exact_curve(&fm, ordered, 2, total).unwrap()).unwrap();
        let r: Vec<f64> = (0..10).map(|s| auc(&random_prioritize(&suite, 100 * i + s).products)).collect();
        random.push(mean(&r));
        greedy.push(auc(&greedy_prioritize(&suite).unwrap().products));
        near.push(auc(&near_optimal_prioritize(&suite).unwrap().products));
    }
    let (r, g, n) = (mean(&random), mean(&greedy), mean(&near));
    outcome(
        r <= g && g <= n && n > r,
        format!("mean AUC random {r:.4} <= greedy {g:.4} <= near-optimal {n:.4}"),
    )
}

fn c7_correlation() -> Outcome {
    let fm = generate_random_model(30, DENSITY, 11_000).unwrap();
    let pool = unpredictable_generate(&fm, 200, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut fit, mut cov) = (Vec::new(), Vec::new());
    for _ in 0..30 {
        let suite: Vec<Product> = (0..10).map(|_| pool.choose(&mut rng).unwrap().clone()).collect();
        fit.push(fitness(&suite).unwrap());
        cov.push(exact_coverage(&fm, &suite, 2).unwrap().coverage);
    }
    let rho = spearman(&fit, &cov);
    outcome(rho > 0.5, format!("Spearman rho = {rho:.3} over 30 suites"))
}

fn c8_scalability() -> Outcome {
    let mut wins = 0;
    let mut worst_overshoot = Duration::ZERO;
    let mut lines = Vec::new();
    for i in 0..10u64 {
        let fm = generate_random_model(1000, DENSITY, 13_000 + i).unwrap();
        let budget = Duration::from_secs(60);
        let start = Instant::now();
        let s = search_generate(&fm, &SearchConfig::with_time_budget(50, budget, i)).unwrap();
        worst_overshoot = worst_overshoot.max(start.elapsed().saturating_sub(budget));
        let u = unpredictable_generate(&fm, 50, i).unwrap();
        let sample = ValidTSetSample::draw(&fm, 2, 100_000, i).unwrap();
        let (cs, cu) = (sample.report(&s.suite.products).coverage, sample.report(&u).coverage);
        wins += usize::from(cs >= cu);
        lines.push(format!("{cs:.4}/{cu:.4}"));
    }
    outcome(
        wins >= 7,
        format!(
            "search >= unpredictable in {wins}/10 runs [{}]; worst budget overshoot {:.2}s",
            lines.join(" "),
            worst_overshoot.as_secs_f64()
        ),
    )
}

fn twise(args: &[&str], out: &Path) -> bool {
    Command::new(env!("CARGO_BIN_EXE_twise"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn replay_matches(dir: &Path, replay_dir: &Path) -> Result<usize, String> {
    let manifest = dir.join("manifest.json");
    let status = Command::new(env!("CARGO_BIN_EXE_twise"))
        .arg("replay")
        .arg(&manifest)
        .arg("--out")
        .arg(replay_dir)
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(format!("replay of {} failed", dir.display()));
    }
    let mut compared = 0;
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap().to_owned();
        if name == "manifest.json" {
            continue;
        }
        let a = std::fs::read(&path).map_err(|e| e.to_string())?;
        let b = std::fs::read(replay_dir.join(&name)).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("{} differs", path.display()));
        }
        compared += 1;
    }
    Ok(compared)
}

fn c9_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let fm = generate_random_model(12, DENSITY, 17).unwrap();
    let model = root.join("model.json");
    std::fs::write(&model, twise::model::serialize_native(&fm)).unwrap();
    let m = model.to_str().unwrap();
    let gen = root.join("gen");
    let gen_s = gen.join("products.csv");
    let suite = gen_s.to_str().unwrap().to_string();
    let runs: Vec<(&str, Vec<String>)> = vec![
        ("gen", vec!["generate", "--model", m, "--products", "6", "--iterations", "300", "--seed", "4"]),
        ("gen-u", vec!["generate", "--model", m, "--products", "6", "--strategy", "unpredictable", "--seed", "4"]),
        ("pri-r", vec!["prioritize", "--model", m, "--suite", &suite, "--algorithm", "random", "--seed", "2"]),
        ("pri-g", vec!["prioritize", "--model", m, "--suite", &suite, "--algorithm", "greedy"]),
        ("cov-e", vec!["coverage", "--model", m, "--suite", &suite, "--t", "3", "--curve"]),
        ("cov-s", vec!["coverage", "--model", m, "--suite", &suite, "--mode", "sampled", "--samples", "3000", "--seed", "5", "--curve"]),
        ("cov-c", vec!["coverage", "--model", m, "--suite", &suite, "--mode", "sampled", "--estimator", "covered-set", "--samples", "3000"]),
        ("eval", vec!["evaluate", "--random-models", "2,10,1", "--iterations", "50", "--repeats", "2", "--t", "2,3"]),
    ]
    .into_iter()
    .map(|(name, args)| (name, args.into_iter().map(String::from).collect()))
    .collect();
    let mut compared = 0;
    let mut problems = Vec::new();
    for (name, args) in &runs {
        let dir: PathBuf = root.join(name);
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        if !twise(&argv, &dir) {
            problems.push(format!("{name}: command failed"));
            continue;
        }
        match replay_matches(&dir, &root.join(format!("{name}-replay"))) {
            Ok(n) => compared += n,
            Err(e) => problems.push(format!("{name}: {e}")),
        }
    }
    outcome(
        problems.is_empty(),
        format!("{} commands, {compared} output files byte-identical on replay {}", runs.len(), problems.join("; ")),
    )
}
