//! Ordering a suite so coverage grows quickly, measured by the area under
//! the prefix coverage curve.

use twise::coverage::{exact_curve, exact_valid_tsets};
use twise::generation::unpredictable_generate;
use twise::model::generate_random_model;
use twise::prioritization::{area_under_curve, greedy_prioritize, near_optimal_prioritize, random_prioritize};
use twise::Product;

fn main() -> anyhow::Result<()> {
    let fm = generate_random_model(30, 0.5, 11)?;
    let mut suite = unpredictable_generate(&fm, 12, 3)?;
    // Pad with copies so that order matters more.
    suite.extend(suite.clone());
    let total = exact_valid_tsets(&fm, 2)?;

    let report = |name: &str, ordered: &[Product]| -> anyhow::Result<()> {
        let curve = exact_curve(&fm, ordered, 2, total)?;
        let first: Vec<String> = curve.iter().take(6).map(|c| format!("{c:.3}")).collect();
        println!("{name:>12}: area {:.3}, first prefixes [{}]", area_under_curve(&curve)?, first.join(", "));
        Ok(())
    };
    report("input", &suite)?;
    report("random", &random_prioritize(&suite, 5).products)?;
    report("greedy", &greedy_prioritize(&suite)?.products)?;
    report("near-optimal", &near_optimal_prioritize(&suite)?.products)?;
    Ok(())
}
