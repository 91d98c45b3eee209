//! The command-line workflow driven in-process: generate, reorder, measure,
//! then replay the generation from its manifest.

use std::fs;

use twise::cli::run;
use twise::model::{generate_random_model, serialize_native};

fn main() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;
    let root = dir.path();
    let model = root.join("model.json");
    fs::write(&model, serialize_native(&generate_random_model(15, 0.5, 8)?))?;
    let p = |name: &str| root.join(name).display().to_string();
    let m = model.display().to_string();

    let steps: Vec<Vec<String>> = vec![
        vec!["generate", "--model", &m, "--products", "6", "--iterations", "300", "--seed", "1", "--out", &p("gen")],
        vec!["prioritize", "--model", &m, "--suite", &p("gen/products.csv"), "--algorithm", "greedy", "--out", &p("pri")],
        vec!["coverage", "--model", &m, "--suite", &p("pri/products.csv"), "--t", "2", "--curve", "--out", &p("cov")],
        vec!["replay", &p("gen/manifest.json"), "--out", &p("again")],
    ]
    .into_iter()
    .map(|s| s.into_iter().map(String::from).collect())
    .collect();
    for step in steps {
        let code = run(std::iter::once("twise".to_string()).chain(step.iter().cloned()));
        anyhow::ensure!(code == 0, "{} exited with {code}", step[0]);
    }
    print!("{}", fs::read_to_string(root.join("cov/report.json"))?);
    print!("{}", fs::read_to_string(root.join("cov/curve.csv"))?);
    let same = fs::read(root.join("gen/products.csv"))? == fs::read(root.join("again/products.csv"))?;
    println!("replay reproduced products.csv: {same}");
    Ok(())
}
