//! Three products over four unconstrained features: pairwise distances,
//! suite fitness, both prioritizations and the 2-wise coverage curve.

use twise::coverage::{coverage_curve, exact_coverage, CurveMode};
use twise::prioritization::{area_under_curve, greedy_prioritize, near_optimal_prioritize};
use twise::similarity::{distance_matrix, fitness};
use twise::{FeatureModel, Product};

fn main() -> anyhow::Result<()> {
    let fm = FeatureModel::unconstrained(4);
    let suite = vec![
        Product::from_bools(&[true, true, true, false]),
        Product::from_bools(&[true, true, false, true]),
        Product::from_bools(&[true, false, true, false]),
    ];
    let names = ["P1", "P2", "P3"];

    let matrix = distance_matrix(&suite)?;
    for i in 0..suite.len() {
        for j in i + 1..suite.len() {
            let d = matrix.exact(i, j);
            println!(
                "d({}, {}) = 1 - {}/{} = {:.4}",
                names[i],
                names[j],
                d.agreement,
                2 * d.features - d.agreement,
                d.value()
            );
        }
    }
    println!("fitness = {:.4}", fitness(&suite)?);

    let label = |ordered: &[Product]| -> Vec<&str> {
        ordered
            .iter()
            .map(|p| names[suite.iter().position(|q| q == p).unwrap()])
            .collect()
    };
    let greedy = greedy_prioritize(&suite)?;
    let near = near_optimal_prioritize(&suite)?;
    println!("greedy order:       {:?}", label(&greedy.products));
    println!("near-optimal order: {:?}", label(&near.products));

    let report = exact_coverage(&fm, &suite, 2)?;
    println!("2-wise coverage: {} of {} valid pairs", report.covered, report.total_valid);
    let curve = coverage_curve(&fm, &near.products, 2, CurveMode::exact())?;
    println!("curve {:?}, area {:.4}", curve, area_under_curve(&curve)?);
    Ok(())
}
