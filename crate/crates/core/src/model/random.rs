use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{default_names, FeatureModel, Product};
use crate::sat::Solver;
use crate::{Error, Result};

const MAX_RETRIES_PER_CLAUSE: usize = 100;

/// Random consistent model with `round(density * n)` clauses of two or three
/// literals over distinct features, uniform signs.
///
/// Clauses are added one at a time. A clause that would make the model
/// inconsistent is dropped and redrawn, up to a fixed number of retries.
/// Deterministic in `(n, density, seed)`.
pub fn generate_random_model(n: usize, density: f64, seed: u64) -> Result<FeatureModel> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("random models need n >= 2, got {n}")));
    }
    if !(density >= 0.0 && density.is_finite()) {
        return Err(Error::InvalidConfig(format!("clause density must be >= 0, got {density}")));
    }
    let target = (density * n as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut solver = Solver::new(&FeatureModel::unconstrained(n));
    let mut solve_rng = ChaCha8Rng::seed_from_u64(seed.rotate_left(17) ^ 0x5eed);
    // Current witness: a product satisfying every clause accepted so far.
    let mut witness = Product::all_unselected(n);
    let mut clauses = Vec::with_capacity(target);

    for i in 0..target {
        let mut accepted = false;
        for _ in 0..MAX_RETRIES_PER_CLAUSE {
            let clause = random_clause(&mut rng, n);
            if clause.iter().any(|&l| witness.satisfies(l)) {
                solver.add_clause(&clause);
                clauses.push(clause);
                accepted = true;
                break;
            }
            solver.add_clause(&clause);
            match solver.solve_with(&[], &mut solve_rng) {
                Some(p) => {
                    witness = p;
                    clauses.push(clause);
                    accepted = true;
                    break;
                }
                None => {
                    solver = Solver::new(&FeatureModel::new(default_names(n), clauses.clone())?);
                }
            }
        }
        if !accepted {
            return Err(Error::GenerationFailed(format!(
                "no consistent clause found for clause {} of {target} after {MAX_RETRIES_PER_CLAUSE} attempts",
                i + 1
            )));
        }
    }
    FeatureModel::new(default_names(n), clauses)
}

fn random_clause(rng: &mut ChaCha8Rng, n: usize) -> Vec<i32> {
    let len = if n == 2 { 2 } else { rng.gen_range(2..=3) };
    index::sample(rng, n, len)
        .iter()
        .map(|f| {
            let f = f as i32 + 1;
            if rng.gen::<bool>() {
                f
            } else {
                -f
            }
        })
        .collect()
}
