//! Feature models as propositional constraint systems.
//!
//! A [`FeatureModel`] is a list of feature names plus CNF clauses over signed
//! 1-based feature indices: `3` means "feature 3 selected", `-3` means
//! "feature 3 unselected". Models come from DIMACS ([`parse_dimacs`]), the
//! JSON native format ([`parse_native`]), a feature tree ([`compile_tree`])
//! or the random generator ([`generate_random_model`]).

mod dimacs;
mod native;
mod product;
mod random;
mod tree;
mod tset;

use std::collections::HashSet;

pub use dimacs::parse_dimacs;
pub use native::{parse_native, serialize_native};
pub use product::Product;
pub use random::generate_random_model;
pub use tree::{compile_tree, parse_tree, FeatureTree, GroupKind, NodeId};
pub use tset::TSet;

use crate::{Error, Result};

/// Named features plus CNF constraints.
///
/// Invariants, enforced by [`FeatureModel::new`]: names are unique and
/// non-empty, every clause is non-empty, every literal names a feature in
/// `1..=n`, and no clause holds both polarities of one feature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureModel {
    features: Vec<String>,
    clauses: Vec<Vec<i32>>,
}

impl FeatureModel {
    pub fn new(features: Vec<String>, clauses: Vec<Vec<i32>>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(features.len());
        for name in &features {
            if name.is_empty() {
                return Err(Error::InvalidModel("empty feature name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidModel(format!(
                    "duplicate feature name {name:?}"
                )));
            }
        }
        for (i, clause) in clauses.iter().enumerate() {
            check_clause(clause, features.len()).map_err(|e| match e {
                Error::InvalidModel(msg) => Error::InvalidModel(format!("clause {}: {msg}", i + 1)),
                other => other,
            })?;
        }
        Ok(FeatureModel { features, clauses })
    }

    /// A model with `n` unconstrained features named `f1..fn`.
    pub fn unconstrained(n: usize) -> Self {
        FeatureModel {
            features: default_names(n),
            clauses: Vec::new(),
        }
    }

    pub fn num_features(&self) -> usize {
        self.features.len()
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    /// Name of a 1-based feature.
    pub fn feature_name(&self, feature: usize) -> &str {
        &self.features[feature - 1]
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f == name).map(|i| i + 1)
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    /// Full-assignment clause evaluation: true iff every clause has a
    /// literal the product satisfies.
    pub fn is_valid_product(&self, product: &Product) -> Result<bool> {
        if product.len() != self.num_features() {
            return Err(Error::LengthMismatch {
                expected: self.num_features(),
                found: product.len(),
            });
        }
        Ok(self
            .clauses
            .iter()
            .all(|c| c.iter().any(|&l| product.satisfies(l))))
    }
}

pub(crate) fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("f{i}")).collect()
}

/// Checks one clause against the model invariants. Errors carry no position.
pub(crate) fn check_clause(clause: &[i32], n: usize) -> Result<()> {
    if clause.is_empty() {
        return Err(Error::InvalidModel("empty clause".into()));
    }
    for &lit in clause {
        if lit == 0 || lit.unsigned_abs() as usize > n {
            return Err(Error::LiteralOutOfRange {
                literal: lit,
                features: n,
            });
        }
    }
    for (i, &a) in clause.iter().enumerate() {
        if clause[i + 1..].contains(&-a) {
            return Err(Error::InvalidModel(format!(
                "tautological clause (contains {a} and {})",
                -a
            )));
        }
    }
    Ok(())
}
