//! Similarity-driven search against plain sampling on a random model.

use std::time::Duration;

use twise::coverage::exact_coverage;
use twise::generation::{search_generate, unpredictable_generate, SearchConfig};
use twise::model::generate_random_model;
use twise::similarity::fitness;

fn main() -> anyhow::Result<()> {
    let fm = generate_random_model(40, 0.5, 7)?;
    let m = 10;

    let baseline = unpredictable_generate(&fm, m, 1)?;
    let outcome = search_generate(&fm, &SearchConfig::with_iterations(m, 1500, 1))?;
    let trace = &outcome.trace;
    println!(
        "search: {} iterations, {} accepted, fitness {:.3} -> {:.3}",
        outcome.iterations,
        trace.accepted(),
        trace.initial_fitness,
        outcome.fitness
    );
    for r in trace.records.iter().filter(|r| r.accepted).take(5) {
        println!("  iteration {:>4}: {:.3} -> {:.3}", r.iteration, r.fitness_before, r.fitness_after);
    }

    for (name, suite) in [("unpredictable", &baseline), ("search", &outcome.suite.products)] {
        let cov = exact_coverage(&fm, suite, 2)?;
        println!("{name:>13}: fitness {:.3}, 2-wise coverage {:.4}", fitness(suite)?, cov.coverage);
    }

    // Wall-clock mode, as used on large models.
    let timed = search_generate(&fm, &SearchConfig::with_time_budget(m, Duration::from_millis(300), 1))?;
    println!(
        "300 ms budget: {} iterations, fitness {:.3}, stopped by clock: {}",
        timed.iterations, timed.fitness, timed.trace.wall_clock_limited
    );
    Ok(())
}
