//! Similarity-based ordering of a product set, plus the random baseline and
//! the trapezoidal area under a coverage curve used to score orderings.
//!
//! Ties follow one rule everywhere: scan in ascending order of position in
//! the current (remaining) set and keep the first maximum. Pair distances
//! are compared exactly; sums of distances are compared with a small
//! relative tolerance.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::Product;
use crate::similarity::DistanceMatrix;
use crate::{Error, Result};

const SUM_TIE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Greedy,
    NearOptimal,
    Random,
    Search,
    Unpredictable,
}

/// Which similarity prioritizer to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prioritizer {
    Greedy,
    NearOptimal,
}

impl Prioritizer {
    pub fn order(self, matrix: &DistanceMatrix) -> Vec<usize> {
        match self {
            Prioritizer::Greedy => greedy_order(matrix),
            Prioritizer::NearOptimal => near_optimal_order(matrix),
        }
    }

    pub fn provenance(self) -> Provenance {
        match self {
            Prioritizer::Greedy => Provenance::Greedy,
            Prioritizer::NearOptimal => Provenance::NearOptimal,
        }
    }
}

/// An ordered suite; position 0 has the highest priority.
#[derive(Debug, Clone, PartialEq)]
pub struct PrioritizedSuite {
    pub products: Vec<Product>,
    pub provenance: Provenance,
    pub seed: Option<u64>,
}

impl PrioritizedSuite {
    pub fn len(&self) -> usize {
        self.products.len()
    }

    pub fn is_empty(&self) -> bool {
        self.products.is_empty()
    }
}

fn permute(suite: &[Product], order: &[usize]) -> Vec<Product> {
    order.iter().map(|&i| suite[i].clone()).collect()
}

/// Positions `(i, j)`, `i < j`, within `remaining` of the first pair at
/// maximum distance.
fn max_pair(matrix: &DistanceMatrix, remaining: &[usize]) -> (usize, usize) {
    let mut best = (0, 1);
    let mut best_d = matrix.exact(remaining[0], remaining[1]);
    for i in 0..remaining.len() {
        for j in i + 1..remaining.len() {
            let d = matrix.exact(remaining[i], remaining[j]);
            if d > best_d {
                best_d = d;
                best = (i, j);
            }
        }
    }
    best
}

/// Repeatedly takes the most distant remaining pair; a leftover product
/// goes last.
pub fn greedy_order(matrix: &DistanceMatrix) -> Vec<usize> {
    let mut remaining: Vec<usize> = (0..matrix.len()).collect();
    let mut order = Vec::with_capacity(remaining.len());
    while remaining.len() > 1 {
        let (i, j) = max_pair(matrix, &remaining);
        order.push(remaining[i]);
        order.push(remaining[j]);
        remaining.remove(j);
        remaining.remove(i);
    }
    order.extend(remaining);
    order
}

/// Seeds with the most distant pair, then repeatedly appends the remaining
/// product with the largest summed distance to everything already chosen.
pub fn near_optimal_order(matrix: &DistanceMatrix) -> Vec<usize> {
    let m = matrix.len();
    if m < 2 {
        return (0..m).collect();
    }
    let mut remaining: Vec<usize> = (0..m).collect();
    let (i, j) = max_pair(matrix, &remaining);
    let mut order = vec![remaining[i], remaining[j]];
    remaining.remove(j);
    remaining.remove(i);
    // Running sum of distances to the chosen list, per remaining member.
    let mut sums: Vec<f64> = remaining
        .iter()
        .map(|&c| matrix.get(c, order[0]) + matrix.get(c, order[1]))
        .collect();
    while !remaining.is_empty() {
        let mut best = 0;
        for k in 1..remaining.len() {
            if sums[k] > sums[best] + SUM_TIE_TOLERANCE * sums[best].abs().max(1.0) {
                best = k;
            }
        }
        let chosen = remaining.remove(best);
        sums.remove(best);
        for (k, &c) in remaining.iter().enumerate() {
            sums[k] += matrix.get(c, chosen);
        }
        order.push(chosen);
    }
    order
}

pub fn greedy_prioritize(suite: &[Product]) -> Result<PrioritizedSuite> {
    let matrix = DistanceMatrix::new(suite)?;
    Ok(PrioritizedSuite {
        products: permute(suite, &greedy_order(&matrix)),
        provenance: Provenance::Greedy,
        seed: None,
    })
}

pub fn near_optimal_prioritize(suite: &[Product]) -> Result<PrioritizedSuite> {
    let matrix = DistanceMatrix::new(suite)?;
    Ok(PrioritizedSuite {
        products: permute(suite, &near_optimal_order(&matrix)),
        provenance: Provenance::NearOptimal,
        seed: None,
    })
}

/// Uniformly random permutation, deterministic per seed.
pub fn random_prioritize(suite: &[Product], seed: u64) -> PrioritizedSuite {
    let mut products = suite.to_vec();
    products.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    PrioritizedSuite {
        products,
        provenance: Provenance::Random,
        seed: Some(seed),
    }
}

/// Trapezoidal area `sum_i (c[i] + c[i+1]) / 2` over consecutive points.
pub fn area_under_curve(curve: &[f64]) -> Result<f64> {
    if curve.is_empty() {
        return Err(Error::InvalidConfig("coverage curve is empty".into()));
    }
    if let Some((index, &value)) = curve
        .iter()
        .enumerate()
        .find(|(_, v)| !(0.0..=1.0).contains(*v))
    {
        return Err(Error::CoverageOutOfRange { index, value });
    }
    Ok(curve.windows(2).map(|w| (w[0] + w[1]) / 2.0).sum())
}
