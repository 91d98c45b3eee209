//! Generation, prioritization and coverage measurement of t-wise test
//! suites for software product lines described by feature models.
//!
//! A product (an abstract test case) is a total assignment of every feature
//! to selected or unselected. Suites are scored with a similarity fitness,
//! the sum of pairwise Jaccard distances between products, which stands in
//! for t-wise coverage without ever enumerating t-sets. The fitness drives a
//! (1+1) evolutionary search over products drawn from a randomized SAT
//! sampler, and the same distances order suites so that coverage grows as
//! fast as possible.
//!
//! Exact t-wise coverage is available for small models; Monte-Carlo
//! estimators cover the rest.
//!
//! ```
//! use twise::{similarity, Product};
//!
//! let p1 = Product::from_bools(&[true, true, true, false]);
//! let p2 = Product::from_bools(&[true, true, false, true]);
//! let p3 = Product::from_bools(&[true, false, true, false]);
//! let f = similarity::fitness(&[p1, p2, p3]).unwrap();
//! assert!((f - (2.0 / 3.0 + 0.4 + 6.0 / 7.0)).abs() < 1e-12);
//! ```

pub mod cli;
pub mod coverage;
mod error;
pub mod generation;
pub mod io;
pub mod model;
pub mod prioritization;
pub mod sat;
pub mod similarity;
pub mod stats;

pub use error::{Error, Result};
pub use model::{FeatureModel, FeatureTree, Product, TSet};
