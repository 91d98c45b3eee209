//! Test-suite generation: the unpredictable baseline and the similarity
//! driven (1+1) evolutionary search.
//!
//! The search keeps `m` products. Each iteration finds the member with the
//! smallest summed distance to the others, draws fresh products from the
//! sampler until one differs from it, swaps it in, and keeps the swap only
//! if fitness strictly increases. The distance matrix is patched one
//! row/column per swap.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::model::{FeatureModel, Product};
use crate::prioritization::{PrioritizedSuite, Prioritizer, Provenance};
use crate::sat::SamplerSession;
use crate::similarity::DistanceMatrix;
use crate::{Error, Result};

pub const DEFAULT_MAX_REDRAWS: usize = 1000;

/// Candidate must beat the current fitness by more than this relative
/// margin; smaller differences are floating-point noise on equal sums.
const IMPROVEMENT_EPSILON: f64 = 1e-12;

/// `m` products from one sampler session: distinct until the valid space is
/// exhausted, after which the session restarts and repeats are possible.
pub fn unpredictable_generate(fm: &FeatureModel, m: usize, seed: u64) -> Result<Vec<Product>> {
    let mut session = SamplerSession::new(fm, seed)?;
    Ok((0..m).map(|_| session.next_product()).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Suite size.
    pub products: usize,
    /// Wall-clock budget. Runs are not reproducible when this ends them.
    pub time_budget: Option<Duration>,
    pub max_iterations: Option<u64>,
    pub seed: u64,
    pub prioritizer: Prioritizer,
    pub trace: bool,
    /// Bound on sampler draws per iteration when looking for a product that
    /// differs from the worst member.
    pub max_redraws: usize,
}

impl SearchConfig {
    pub fn with_iterations(products: usize, iterations: u64, seed: u64) -> Self {
        SearchConfig {
            products,
            time_budget: None,
            max_iterations: Some(iterations),
            seed,
            prioritizer: Prioritizer::NearOptimal,
            trace: true,
            max_redraws: DEFAULT_MAX_REDRAWS,
        }
    }

    pub fn with_time_budget(products: usize, budget: Duration, seed: u64) -> Self {
        SearchConfig {
            time_budget: Some(budget),
            max_iterations: None,
            ..SearchConfig::with_iterations(products, 0, seed)
        }
    }

    pub fn prioritizer(mut self, prioritizer: Prioritizer) -> Self {
        self.prioritizer = prioritizer;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.products == 0 {
            return Err(Error::InvalidConfig("suite size must be >= 1".into()));
        }
        match (self.time_budget, self.max_iterations) {
            (None, None) => Err(Error::InvalidConfig(
                "a time budget or an iteration cap is required".into(),
            )),
            (Some(d), _) if d.is_zero() => Err(Error::InvalidConfig("time budget must be > 0".into())),
            (_, Some(0)) => Err(Error::InvalidConfig("iteration cap must be > 0".into())),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based.
    pub iteration: u64,
    pub elapsed: Duration,
    pub fitness_before: f64,
    pub fitness_after: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub initial_fitness: f64,
    pub records: Vec<IterationRecord>,
    /// True when the wall-clock budget, not the iteration cap, ended the
    /// run; such runs are not reproducible.
    pub wall_clock_limited: bool,
}

impl SearchTrace {
    pub fn accepted(&self) -> usize {
        self.records.iter().filter(|r| r.accepted).count()
    }

    pub fn final_fitness(&self) -> f64 {
        self.records.last().map_or(self.initial_fitness, |r| r.fitness_after)
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub suite: PrioritizedSuite,
    pub trace: SearchTrace,
    pub initial: Vec<Product>,
    pub iterations: u64,
    pub fitness: f64,
}

/// Member with the smallest summed distance to the rest. Ties go to the
/// member placed last by the prioritizer.
fn worst_member(matrix: &DistanceMatrix, prioritizer: Prioritizer) -> usize {
    let sums: Vec<f64> = (0..matrix.len()).map(|i| matrix.row_sum(i)).collect();
    let min = sums.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = IMPROVEMENT_EPSILON * min.abs().max(1.0);
    let tied: Vec<usize> = (0..sums.len()).filter(|&i| sums[i] <= min + tol).collect();
    if tied.len() == 1 {
        return tied[0];
    }
    let order = prioritizer.order(matrix);
    *order
        .iter()
        .rev()
        .find(|i| tied.contains(i))
        .expect("the order is a permutation")
}

/// Runs the (1+1) search and returns the final suite ordered by the
/// configured prioritizer, with its trace.
pub fn search_generate(fm: &FeatureModel, cfg: &SearchConfig) -> Result<SearchOutcome> {
    cfg.validate()?;
    let start = Instant::now();
    let mut session = SamplerSession::new(fm, cfg.seed)?;
    let mut suite: Vec<Product> = (0..cfg.products).map(|_| session.next_product()).collect();
    let initial = suite.clone();
    let mut matrix = DistanceMatrix::new(&suite)?;
    let mut fitness = matrix.fitness();
    let mut trace = SearchTrace {
        initial_fitness: fitness,
        ..SearchTrace::default()
    };

    let mut iteration = 0u64;
    loop {
        if cfg.max_iterations.is_some_and(|cap| iteration >= cap) {
            break;
        }
        if cfg.time_budget.is_some_and(|b| start.elapsed() >= b) {
            trace.wall_clock_limited = true;
            break;
        }
        iteration += 1;
        let before = fitness;
        let mut accepted = false;

        if suite.len() >= 2 {
            let worst = worst_member(&matrix, cfg.prioritizer);
            let replacement = (0..cfg.max_redraws)
                .map(|_| session.next_product())
                .find(|p| *p != suite[worst]);
            if let Some(candidate) = replacement {
                let old_sum = matrix.row_sum(worst);
                let new_sum = matrix.row_sum_if_replaced(&suite, worst, &candidate)?;
                if new_sum - old_sum > IMPROVEMENT_EPSILON * fitness.abs().max(1.0) {
                    suite[worst] = candidate;
                    matrix.update(&suite, worst)?;
                    fitness = matrix.fitness();
                    accepted = true;
                }
            }
        }

        if cfg.trace {
            trace.records.push(IterationRecord {
                iteration,
                elapsed: start.elapsed(),
                fitness_before: before,
                fitness_after: fitness,
                accepted,
            });
        }
    }

    let order = cfg.prioritizer.order(&matrix);
    let products = order.iter().map(|&i| suite[i].clone()).collect();
    Ok(SearchOutcome {
        suite: PrioritizedSuite {
            products,
            provenance: Provenance::Search,
            seed: Some(cfg.seed),
        },
        trace,
        initial,
        iterations: iteration,
        fitness,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use crate::model::generate_random_model;
    use crate::similarity::fitness;

    #[test]
    fn unpredictable_covers_small_space() {
        let fm = FeatureModel::unconstrained(3);
        let suite = unpredictable_generate(&fm, 8, 4).unwrap();
        let distinct: HashSet<Product> = suite.iter().cloned().collect();
        assert_eq!(distinct.len(), 8);
        assert_eq!(unpredictable_generate(&fm, 8, 4).unwrap(), suite);
        let one = unpredictable_generate(&fm, 1, 4).unwrap();
        assert_eq!(one.len(), 1);
        assert!(fm.is_valid_product(&one[0]).unwrap());
    }

    #[test]
    fn config_validation() {
        let fm = FeatureModel::unconstrained(3);
        let mut cfg = SearchConfig::with_iterations(0, 10, 1);
        assert!(search_generate(&fm, &cfg).is_err());
        cfg.products = 2;
        cfg.max_iterations = None;
        assert!(search_generate(&fm, &cfg).is_err());
        cfg.time_budget = Some(Duration::ZERO);
        assert!(search_generate(&fm, &cfg).is_err());
        cfg.max_iterations = Some(0);
        cfg.time_budget = None;
        assert!(search_generate(&fm, &cfg).is_err());
    }

    #[test]
    fn inconsistent_model_rejected() {
        let fm = FeatureModel::new(vec!["a".into(), "b".into()], vec![vec![1], vec![-1]]).unwrap();
        assert!(matches!(
            search_generate(&fm, &SearchConfig::with_iterations(2, 5, 0)),
            Err(Error::InconsistentModel)
        ));
        assert!(matches!(unpredictable_generate(&fm, 2, 0), Err(Error::InconsistentModel)));
    }

    #[test]
    fn single_product_model_never_improves() {
        let fm = FeatureModel::new(vec!["a".into(), "b".into()], vec![vec![1], vec![-2]]).unwrap();
        let mut cfg = SearchConfig::with_iterations(2, 20, 3);
        cfg.max_redraws = 50;
        let out = search_generate(&fm, &cfg).unwrap();
        assert_eq!(out.suite.products[0], out.suite.products[1]);
        assert_eq!(out.fitness, 0.0);
        assert_eq!(out.trace.records.len(), 20);
        assert!(out.trace.records.iter().all(|r| !r.accepted));
    }

    #[test]
    fn fitness_never_decreases_and_trace_is_consistent() {
        for seed in 0..10 {
            let fm = generate_random_model(25, 0.5, seed).unwrap();
            let cfg = SearchConfig::with_iterations(6, 200, seed).prioritizer(if seed % 2 == 0 {
                Prioritizer::Greedy
            } else {
                Prioritizer::NearOptimal
            });
            let out = search_generate(&fm, &cfg).unwrap();
            let initial = fitness(&out.initial).unwrap();
            assert!((out.trace.initial_fitness - initial).abs() < 1e-9);
            assert!(out.fitness >= initial);
            assert!((fitness(&out.suite.products).unwrap() - out.fitness).abs() < 1e-9);
            let mut current = out.trace.initial_fitness;
            for r in &out.trace.records {
                assert_eq!(r.fitness_before, current);
                if r.accepted {
                    assert!(r.fitness_after > r.fitness_before);
                } else {
                    assert_eq!(r.fitness_after, r.fitness_before);
                }
                current = r.fitness_after;
            }
            assert!(out.suite.products.iter().all(|p| fm.is_valid_product(p).unwrap()));
            assert!(!out.trace.wall_clock_limited);
        }
    }

    #[test]
    fn iteration_capped_runs_are_reproducible() {
        let fm = generate_random_model(40, 0.6, 9).unwrap();
        let cfg = SearchConfig::with_iterations(8, 300, 77);
        let a = search_generate(&fm, &cfg).unwrap();
        let b = search_generate(&fm, &cfg).unwrap();
        assert_eq!(a.suite, b.suite);
        let fa: Vec<f64> = a.trace.records.iter().map(|r| r.fitness_after).collect();
        let fb: Vec<f64> = b.trace.records.iter().map(|r| r.fitness_after).collect();
        assert_eq!(fa, fb);
    }

    #[test]
    fn wall_clock_budget_stops_the_run() {
        let fm = generate_random_model(60, 0.5, 1).unwrap();
        let cfg = SearchConfig::with_time_budget(5, Duration::from_millis(200), 2);
        let start = Instant::now();
        let out = search_generate(&fm, &cfg).unwrap();
        assert!(start.elapsed() < Duration::from_secs(2));
        assert!(out.trace.wall_clock_limited);
        assert!(out.iterations > 0);
    }

    #[test]
    fn pair_reaches_complementary_products() {
        let fm = FeatureModel::unconstrained(4);
        let hits = (0..100)
            .filter(|&seed| {
                let out = search_generate(&fm, &SearchConfig::with_iterations(2, 500, seed)).unwrap();
                out.fitness == 1.0
            })
            .count();
        assert!(hits >= 95, "{hits}/100 runs reached distance 1");
    }
}
