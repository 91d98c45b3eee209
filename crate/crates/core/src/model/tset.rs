use std::fmt;

use super::Product;
use crate::{Error, Result};

/// `t` signed literals over `t` distinct features, kept in ascending order of
/// feature index so equal t-sets hash and compare equal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TSet(Vec<i32>);

impl TSet {
    /// Canonicalizes `literals`. Fails on zero literals, repeated features
    /// (including both polarities of one feature) or fewer than two
    /// literals.
    pub fn new(mut literals: Vec<i32>) -> Result<Self> {
        if literals.len() < 2 {
            return Err(Error::InvalidTSet(format!(
                "a t-set needs t >= 2 literals, got {}",
                literals.len()
            )));
        }
        if literals.contains(&0) {
            return Err(Error::InvalidTSet("literal 0".into()));
        }
        literals.sort_unstable_by_key(|l| l.unsigned_abs());
        if let Some(w) = literals
            .windows(2)
            .find(|w| w[0].unsigned_abs() == w[1].unsigned_abs())
        {
            return Err(Error::InvalidTSet(format!(
                "feature {} appears twice",
                w[0].unsigned_abs()
            )));
        }
        Ok(TSet(literals))
    }

    /// Builds from literals already in canonical order.
    pub(crate) fn from_canonical(literals: Vec<i32>) -> Self {
        debug_assert!(literals
            .windows(2)
            .all(|w| w[0].unsigned_abs() < w[1].unsigned_abs()));
        TSet(literals)
    }

    pub fn literals(&self) -> &[i32] {
        &self.0
    }

    /// The strength `t`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_feature(&self) -> usize {
        self.0.last().map_or(0, |l| l.unsigned_abs() as usize)
    }

    pub fn is_covered_by(&self, product: &Product) -> bool {
        self.0.iter().all(|&l| product.satisfies(l))
    }
}

impl fmt::Debug for TSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TSet{:?}", self.0)
    }
}
