//! Jaccard distance between products and the similarity fitness of a suite.
//!
//! A product is read as the set of its signed literals, so unselected
//! features count too. Two products over `n` features that agree on `a`
//! features share `a` literals and together hold `2n - a`, hence
//! `d = 1 - a / (2n - a)`. Distances are kept as the integer pair `(a, n)`
//! so that comparisons between pairs are exact.

use std::cell::Cell;
use std::cmp::Ordering;

use crate::model::Product;
use crate::{Error, Result};

thread_local! {
    static DISTANCE_EVALUATIONS: Cell<u64> = const { Cell::new(0) };
}

/// Number of product-pair distance computations performed on this thread.
pub fn distance_evaluations() -> u64 {
    DISTANCE_EVALUATIONS.with(Cell::get)
}

pub fn reset_distance_evaluations() {
    DISTANCE_EVALUATIONS.with(|c| c.set(0));
}

fn count_evaluation() {
    DISTANCE_EVALUATIONS.with(|c| c.set(c.get() + 1));
}

/// Exact Jaccard distance between two products of `features` features that
/// agree on `agreement` of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Distance {
    pub agreement: u32,
    pub features: u32,
}

impl Distance {
    pub fn value(self) -> f64 {
        let a = f64::from(self.agreement);
        1.0 - a / (2.0 * f64::from(self.features) - a)
    }
}

impl PartialOrd for Distance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Distance {
    /// Orders by distance value: `a1/(2n1-a1)` vs `a2/(2n2-a2)` by
    /// cross-multiplication, reversed since larger agreement means smaller
    /// distance.
    fn cmp(&self, other: &Self) -> Ordering {
        let (a1, n1) = (u64::from(self.agreement), u64::from(self.features));
        let (a2, n2) = (u64::from(other.agreement), u64::from(other.features));
        let lhs = a1 * (2 * n2 - a2);
        let rhs = a2 * (2 * n1 - a1);
        rhs.cmp(&lhs)
    }
}

/// Exact distance between two products of the same model.
pub fn distance(p: &Product, q: &Product) -> Result<Distance> {
    if p.is_empty() {
        return Err(Error::InvalidModel("distance is undefined for zero features".into()));
    }
    let agreement = p.agreement(q)?;
    count_evaluation();
    Ok(Distance {
        agreement: agreement as u32,
        features: p.len() as u32,
    })
}

pub fn jaccard_distance(p: &Product, q: &Product) -> Result<f64> {
    distance(p, q).map(Distance::value)
}

/// Sum of pairwise distances over all unordered pairs; 0 for fewer than two
/// products. Performs exactly `m(m-1)/2` distance computations.
pub fn fitness(suite: &[Product]) -> Result<f64> {
    check_homogeneous(suite)?;
    let mut total = 0.0;
    for (i, p) in suite.iter().enumerate() {
        for q in &suite[i + 1..] {
            total += jaccard_distance(p, q)?;
        }
    }
    Ok(total)
}

pub(crate) fn check_homogeneous(suite: &[Product]) -> Result<()> {
    if let Some(first) = suite.first() {
        if first.is_empty() {
            return Err(Error::InvalidModel("distance is undefined for zero features".into()));
        }
        if let Some(bad) = suite.iter().find(|p| p.len() != first.len()) {
            return Err(Error::LengthMismatch {
                expected: first.len(),
                found: bad.len(),
            });
        }
    }
    Ok(())
}

/// Symmetric `m x m` matrix of pairwise distances, zero diagonal, stored as
/// agreement counts.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    features: u32,
    agreement: Vec<u32>,
}

impl DistanceMatrix {
    pub fn new(suite: &[Product]) -> Result<Self> {
        check_homogeneous(suite)?;
        let m = suite.len();
        let features = suite.first().map_or(0, |p| p.len() as u32);
        let mut agreement = vec![features; m * m];
        for i in 0..m {
            for j in i + 1..m {
                let d = distance(&suite[i], &suite[j])?;
                agreement[i * m + j] = d.agreement;
                agreement[j * m + i] = d.agreement;
            }
        }
        Ok(DistanceMatrix {
            size: m,
            features,
            agreement,
        })
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn exact(&self, i: usize, j: usize) -> Distance {
        Distance {
            agreement: self.agreement[i * self.size + j],
            features: self.features,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.exact(i, j).value()
        }
    }

    /// Sum of distances from member `i` to every member.
    pub fn row_sum(&self, i: usize) -> f64 {
        (0..self.size).map(|j| self.get(i, j)).sum()
    }

    /// Fitness of the whole suite, summed in a fixed pair order.
    pub fn fitness(&self) -> f64 {
        let mut total = 0.0;
        for i in 0..self.size {
            for j in i + 1..self.size {
                total += self.get(i, j);
            }
        }
        total
    }

    /// Row sum member `index` would have if it were replaced by `product`.
    pub fn row_sum_if_replaced(&self, suite: &[Product], index: usize, product: &Product) -> Result<f64> {
        let mut total = 0.0;
        for (j, q) in suite.iter().enumerate() {
            if j != index {
                total += jaccard_distance(product, q)?;
            }
        }
        Ok(total)
    }

    /// Recomputes row and column `index` after `suite[index]` changed.
    pub fn update(&mut self, suite: &[Product], index: usize) -> Result<()> {
        let m = self.size;
        for j in 0..m {
            if j != index {
                let d = distance(&suite[index], &suite[j])?;
                self.agreement[index * m + j] = d.agreement;
                self.agreement[j * m + index] = d.agreement;
            }
        }
        Ok(())
    }
}

pub fn distance_matrix(suite: &[Product]) -> Result<DistanceMatrix> {
    DistanceMatrix::new(suite)
}
