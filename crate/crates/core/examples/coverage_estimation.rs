//! Exact t-wise coverage where enumeration is affordable, Monte-Carlo
//! estimates where it is not.

use twise::coverage::{
    estimate_coverage_with, estimate_valid_tsets, exact_coverage, exact_valid_tsets, Estimator, ValidTSetSample,
};
use twise::generation::unpredictable_generate;
use twise::model::generate_random_model;
use twise::Error;

fn main() -> anyhow::Result<()> {
    let small = generate_random_model(12, 0.5, 2)?;
    let suite = unpredictable_generate(&small, 6, 2)?;
    for t in [2, 3] {
        let exact = exact_coverage(&small, &suite, t)?;
        let count = estimate_valid_tsets(&small, t, 20_000, 9)?;
        println!(
            "t={t}: valid t-sets exact {} / estimated {:.0} +- {:.0}",
            exact_valid_tsets(&small, t)?,
            count.estimate,
            count.std_error
        );
        for est in [Estimator::UniformRejection, Estimator::CoveredSetSampling] {
            let r = estimate_coverage_with(&small, &suite, t, 20_000, 9, est)?;
            println!(
                "     {est:?}: {:.4} +- {:.4} (exact {:.4})",
                r.coverage,
                r.std_error.unwrap_or(0.0),
                exact.coverage
            );
        }
    }

    let large = generate_random_model(400, 0.5, 2)?;
    let suite = unpredictable_generate(&large, 20, 2)?;
    match exact_coverage(&large, &suite, 3) {
        Err(Error::BudgetExceeded { required, budget }) => {
            println!("400 features, t=3: {required} index slots exceed the budget of {budget}")
        }
        other => println!("unexpected: {other:?}"),
    }
    let sample = ValidTSetSample::draw(&large, 3, 20_000, 4)?;
    let r = sample.report(&suite);
    println!(
        "sampled 3-wise coverage {:.4} +- {:.4} of about {:.3e} valid 3-sets",
        r.coverage,
        r.std_error.unwrap_or(0.0),
        r.total_valid
    );
    Ok(())
}
