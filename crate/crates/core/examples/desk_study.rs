//! A small experiment across several random models: search against
//! sampling, and how well fitness tracks coverage.

use twise::coverage::exact_coverage;
use twise::generation::{search_generate, unpredictable_generate, SearchConfig};
use twise::model::generate_random_model;
use twise::similarity::fitness;
use twise::stats::{mean, spearman, std_dev};

fn main() -> anyhow::Result<()> {
    let (mut search, mut plain) = (Vec::new(), Vec::new());
    for seed in 0..6 {
        let fm = generate_random_model(25, 0.5, 100 + seed)?;
        let s = search_generate(&fm, &SearchConfig::with_iterations(8, 800, seed))?;
        let u = unpredictable_generate(&fm, 8, seed)?;
        search.push(exact_coverage(&fm, &s.suite.products, 2)?.coverage);
        plain.push(exact_coverage(&fm, &u, 2)?.coverage);
        println!("model {seed}: search {:.4}  unpredictable {:.4}", search[seed as usize], plain[seed as usize]);
    }
    println!(
        "mean: search {:.4} (sd {:.4}), unpredictable {:.4} (sd {:.4})",
        mean(&search),
        std_dev(&search),
        mean(&plain),
        std_dev(&plain)
    );

    let fm = generate_random_model(25, 0.5, 999)?;
    let pool = unpredictable_generate(&fm, 60, 1)?;
    let (mut fit, mut cov) = (Vec::new(), Vec::new());
    for k in 0..20 {
        let suite: Vec<_> = pool.iter().skip(k).step_by(1 + k % 4).take(6).cloned().collect();
        fit.push(fitness(&suite)?);
        cov.push(exact_coverage(&fm, &suite, 2)?.coverage);
    }
    println!("Spearman(fitness, coverage) over 20 suites: {:.3}", spearman(&fit, &cov));
    Ok(())
}
