//! Exact and Monte-Carlo t-wise coverage.
//!
//! A t-set is valid when some valid product exhibits it; coverage is the
//! fraction of valid t-sets exhibited by at least one product of a suite.
//!
//! Exact routines enumerate every canonical t-set: each choice of `t`
//! features in lexicographic order, then each of the `2^t` sign patterns.
//! The position in that enumeration is a collision-free key, so unions of
//! covered t-sets are bitsets. Exact work is capped by an enumeration budget
//! and refused beyond it.
//!
//! The estimators draw `t` distinct literals uniformly from the `2n`
//! literals, so the sampling universe has `C(2n, t)` members; draws naming a
//! feature twice count as invalid.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{FeatureModel, Product, TSet};
use crate::sat::TSetValidator;
use crate::{Error, Result};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Default cap on validity checks for exact enumeration.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 10_000_000;

/// Rejection sampling gives up once this many draws have been made with a
/// validity rate under [`STALL_FLOOR`].
pub const STALL_CHECK_DRAWS: u64 = 100_000;
pub const STALL_FLOOR: f64 = 1e-3;

const VALIDATION_BATCH: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Sampled,
}

/// Monte-Carlo coverage estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Uniform valid t-sets by rejection; coverage is the covered fraction.
    #[default]
    UniformRejection,
    /// Samples t-sets from the suite's own covered t-sets, estimates the
    /// number of distinct covered t-sets and divides by an estimate of the
    /// number of valid t-sets.
    CoveredSetSampling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub schema_version: u32,
    pub t: usize,
    pub method: Method,
    /// Number of valid t-sets covered (estimated when sampled).
    pub covered: f64,
    /// Number of valid t-sets (estimated when sampled).
    pub total_valid: f64,
    pub coverage: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub estimator: Option<Estimator>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sample_size: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub std_error: Option<f64>,
}

impl CoverageReport {
    fn exact(t: usize, covered: u64, total: u64) -> Self {
        CoverageReport {
            schema_version: REPORT_SCHEMA_VERSION,
            t,
            method: Method::Exact,
            covered: covered as f64,
            total_valid: total as f64,
            coverage: if total == 0 { 0.0 } else { covered as f64 / total as f64 },
            estimator: None,
            sample_size: None,
            seed: None,
            std_error: None,
        }
    }
}

/// Estimated number of valid t-sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidTSetEstimate {
    pub t: usize,
    pub samples: u64,
    pub valid_hits: u64,
    /// `C(2n, t)`.
    pub universe: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub seed: u64,
}

/// `C(n, k)` or `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}

/// `C(n, k)` as a float, usable far beyond `u128`.
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn check_strength(t: usize, n: usize) -> Result<()> {
    if t < 2 || t > n {
        return Err(Error::StrengthOutOfRange { t, features: n });
    }
    Ok(())
}

/// Size of the canonical t-set index space, `C(n, t) * 2^t`, checked
/// against `budget`.
fn index_space(n: usize, t: usize, budget: u128) -> Result<usize> {
    let required = binomial(n as u64, t as u64)
        .and_then(|c| c.checked_mul(1u128.checked_shl(t as u32)?))
        .unwrap_or(u128::MAX);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    usize::try_from(required).map_err(|_| Error::BudgetExceeded { required, budget })
}

/// Lexicographic `t`-combinations of the 1-based features `1..=n`.
#[derive(Debug, Clone)]
pub struct Combinations {
    n: usize,
    current: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, t: usize) -> Self {
        Combinations {
            n,
            current: (1..=t).collect(),
            done: t > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let t = self.current.len();
        let mut i = t;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.current[i] < self.n - (t - 1 - i) {
                self.current[i] += 1;
                for j in i + 1..t {
                    self.current[j] = self.current[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Sign pattern of `product` over `features`: bit `i` set when the `i`-th
/// feature is unselected.
fn sign_mask(product: &Product, features: &[usize]) -> usize {
    features
        .iter()
        .enumerate()
        .filter(|(_, &f)| !product.is_selected(f))
        .fold(0, |m, (i, _)| m | 1 << i)
}

fn literals_for(features: &[usize], mask: usize) -> Vec<i32> {
    features
        .iter()
        .enumerate()
        .map(|(i, &f)| if mask >> i & 1 == 1 { -(f as i32) } else { f as i32 })
        .collect()
}

/// The `C(n, t)` t-sets a product exhibits, in canonical enumeration order.
pub fn tsets_of_product(product: &Product, t: usize) -> Result<impl Iterator<Item = TSet> + '_> {
    check_strength(t, product.len())?;
    Ok(Combinations::new(product.len(), t).map(move |features| {
        TSet::from_canonical(features.iter().map(|&f| product.literal(f)).collect())
    }))
}

/// Fixed-size bitset over the canonical index space.
#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }

    /// Sets bit `i`; returns true if it was clear.
    fn insert(&mut self, i: usize) -> bool {
        let w = &mut self.0[i / 64];
        let bit = 1 << (i % 64);
        let fresh = *w & bit == 0;
        *w |= bit;
        fresh
    }

    fn count(&self) -> u64 {
        self.0.iter().map(|w| u64::from(w.count_ones())).sum()
    }
}

/// Keys of the t-sets a product covers, each `combination_rank * 2^t + mask`.
fn covered_keys(product: &Product, t: usize) -> impl Iterator<Item = usize> + '_ {
    Combinations::new(product.len(), t)
        .enumerate()
        .map(move |(rank, features)| (rank << t) | sign_mask(product, &features))
}

/// Number of valid t-sets, by enumerating all `C(n, t) * 2^t` canonical
/// t-sets under the default budget.
pub fn exact_valid_tsets(fm: &FeatureModel, t: usize) -> Result<u64> {
    exact_valid_tsets_with_budget(fm, t, DEFAULT_ENUMERATION_BUDGET)
}

pub fn exact_valid_tsets_with_budget(fm: &FeatureModel, t: usize, budget: u128) -> Result<u64> {
    let n = fm.num_features();
    check_strength(t, n)?;
    index_space(n, t, budget)?;
    let mut combos = Combinations::new(n, t);
    let mut total = 0u64;
    loop {
        let batch: Vec<Vec<usize>> = combos.by_ref().take(VALIDATION_BATCH).collect();
        if batch.is_empty() {
            break;
        }
        total += batch
            .par_iter()
            .map_init(
                || TSetValidator::new(fm),
                |validator, features| {
                    (0..1usize << t)
                        .filter(|&mask| validator.check_literals(&literals_for(features, mask)))
                        .count() as u64
                },
            )
            .sum::<u64>();
    }
    Ok(total)
}

fn check_suite(fm: &FeatureModel, suite: &[Product]) -> Result<()> {
    for (index, p) in suite.iter().enumerate() {
        if !fm.is_valid_product(p)? {
            return Err(Error::InvalidProduct { index });
        }
    }
    Ok(())
}

/// Exact coverage under the default enumeration budget.
pub fn exact_coverage(fm: &FeatureModel, suite: &[Product], t: usize) -> Result<CoverageReport> {
    exact_coverage_with_budget(fm, suite, t, DEFAULT_ENUMERATION_BUDGET)
}

pub fn exact_coverage_with_budget(
    fm: &FeatureModel,
    suite: &[Product],
    t: usize,
    budget: u128,
) -> Result<CoverageReport> {
    let n = fm.num_features();
    check_strength(t, n)?;
    check_suite(fm, suite)?;
    let space = index_space(n, t, budget)?;
    let total = exact_valid_tsets_with_budget(fm, t, budget)?;
    let mut bits = Bits::new(space);
    for p in suite {
        for key in covered_keys(p, t) {
            bits.insert(key);
        }
    }
    Ok(CoverageReport::exact(t, bits.count(), total))
}

/// For each product, whether dropping it leaves exact coverage unchanged
/// (every t-set it covers is also covered by another product).
pub fn redundant_products(fm: &FeatureModel, suite: &[Product], t: usize) -> Result<Vec<bool>> {
    let n = fm.num_features();
    check_strength(t, n)?;
    check_suite(fm, suite)?;
    let space = index_space(n, t, DEFAULT_ENUMERATION_BUDGET)?;
    let mut counts = vec![0u8; space];
    for p in suite {
        for key in covered_keys(p, t) {
            counts[key] = counts[key].saturating_add(1);
        }
    }
    Ok(suite
        .iter()
        .map(|p| covered_keys(p, t).all(|key| counts[key] >= 2))
        .collect())
}

/// Draws `t` distinct literals uniformly from the `2n` literals. Returns the
/// canonical t-set, or `None` if the draw names a feature twice.
fn draw_candidate(rng: &mut ChaCha8Rng, n: usize, t: usize) -> Option<TSet> {
    let mut lits: Vec<i32> = index::sample(rng, 2 * n, t)
        .iter()
        .map(|code| {
            let f = (code / 2 + 1) as i32;
            if code % 2 == 0 {
                f
            } else {
                -f
            }
        })
        .collect();
    lits.sort_unstable_by_key(|l| l.unsigned_abs());
    if lits.windows(2).any(|w| w[0].unsigned_abs() == w[1].unsigned_abs()) {
        return None;
    }
    Some(TSet::from_canonical(lits))
}

/// Validity of each candidate, computed in parallel; order preserved.
fn validate_batch(fm: &FeatureModel, batch: &[Option<TSet>]) -> Vec<bool> {
    batch
        .par_iter()
        .map_init(
            || TSetValidator::new(fm),
            |validator, cand| {
                cand.as_ref()
                    .is_some_and(|ts| validator.check_literals(ts.literals()))
            },
        )
        .collect()
}

/// Monte-Carlo estimate of the number of valid t-sets: the valid fraction of
/// `samples` uniform draws, scaled by `C(2n, t)`.
pub fn estimate_valid_tsets(fm: &FeatureModel, t: usize, samples: u64, seed: u64) -> Result<ValidTSetEstimate> {
    let n = fm.num_features();
    check_strength(t, n)?;
    if samples == 0 {
        return Err(Error::InvalidConfig("samples must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut valid_hits = 0u64;
    let mut remaining = samples;
    while remaining > 0 {
        let size = remaining.min(VALIDATION_BATCH as u64) as usize;
        let batch: Vec<Option<TSet>> = (0..size).map(|_| draw_candidate(&mut rng, n, t)).collect();
        valid_hits += validate_batch(fm, &batch).into_iter().filter(|v| *v).count() as u64;
        remaining -= size as u64;
    }
    let universe = binomial_f64(2 * n as u64, t as u64);
    let p = valid_hits as f64 / samples as f64;
    Ok(ValidTSetEstimate {
        t,
        samples,
        valid_hits,
        universe,
        estimate: p * universe,
        std_error: universe * (p * (1.0 - p) / samples as f64).sqrt(),
        seed,
    })
}

/// A uniform sample of valid t-sets drawn by rejection. Shared across
/// suites or prefixes, it makes coverage comparisons paired.
#[derive(Debug, Clone)]
pub struct ValidTSetSample {
    pub t: usize,
    pub seed: u64,
    /// Total candidates drawn, valid or not.
    pub draws: u64,
    /// `C(2n, t)`.
    pub universe: f64,
    pub tsets: Vec<TSet>,
}

impl ValidTSetSample {
    pub fn draw(fm: &FeatureModel, t: usize, samples: u64, seed: u64) -> Result<Self> {
        let n = fm.num_features();
        check_strength(t, n)?;
        if samples == 0 {
            return Err(Error::InvalidConfig("samples must be >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tsets = Vec::with_capacity(samples as usize);
        let mut draws = 0u64;
        while (tsets.len() as u64) < samples {
            let need = samples - tsets.len() as u64;
            let size = need.clamp(64, VALIDATION_BATCH as u64) as usize;
            let batch: Vec<Option<TSet>> = (0..size).map(|_| draw_candidate(&mut rng, n, t)).collect();
            let valid = validate_batch(fm, &batch);
            for (cand, ok) in batch.into_iter().zip(valid) {
                if (tsets.len() as u64) == samples {
                    break;
                }
                draws += 1;
                if ok {
                    tsets.push(cand.expect("valid candidates are well formed"));
                }
            }
            if draws >= STALL_CHECK_DRAWS && (tsets.len() as f64) < STALL_FLOOR * draws as f64 {
                return Err(Error::SamplingStall {
                    draws,
                    valid: tsets.len() as u64,
                });
            }
        }
        Ok(ValidTSetSample {
            t,
            seed,
            draws,
            universe: binomial_f64(2 * n as u64, t as u64),
            tsets,
        })
    }

    pub fn len(&self) -> usize {
        self.tsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tsets.is_empty()
    }

    /// Estimated number of valid t-sets implied by the acceptance rate.
    pub fn estimated_valid(&self) -> f64 {
        self.tsets.len() as f64 / self.draws as f64 * self.universe
    }

    /// Per sampled t-set, the position of the first product covering it.
    pub fn first_cover(&self, suite: &[Product]) -> Vec<Option<usize>> {
        self.tsets
            .par_iter()
            .map(|ts| suite.iter().position(|p| ts.is_covered_by(p)))
            .collect()
    }

    pub fn covered_count(&self, suite: &[Product]) -> u64 {
        self.first_cover(suite).iter().filter(|c| c.is_some()).count() as u64
    }

    /// Coverage report of `suite` against this sample.
    pub fn report(&self, suite: &[Product]) -> CoverageReport {
        let k = self.tsets.len() as f64;
        let p = self.covered_count(suite) as f64 / k;
        let total = self.estimated_valid();
        CoverageReport {
            schema_version: REPORT_SCHEMA_VERSION,
            t: self.t,
            method: Method::Sampled,
            covered: p * total,
            total_valid: total,
            coverage: p,
            estimator: Some(Estimator::UniformRejection),
            sample_size: Some(self.tsets.len() as u64),
            seed: Some(self.seed),
            std_error: Some((p * (1.0 - p) / k).sqrt()),
        }
    }
}

/// Monte-Carlo coverage with the default uniform-rejection estimator.
pub fn estimate_coverage(
    fm: &FeatureModel,
    suite: &[Product],
    t: usize,
    samples: u64,
    seed: u64,
) -> Result<CoverageReport> {
    estimate_coverage_with(fm, suite, t, samples, seed, Estimator::UniformRejection)
}

pub fn estimate_coverage_with(
    fm: &FeatureModel,
    suite: &[Product],
    t: usize,
    samples: u64,
    seed: u64,
    estimator: Estimator,
) -> Result<CoverageReport> {
    check_strength(t, fm.num_features())?;
    if suite.is_empty() {
        return Err(Error::EmptySuite);
    }
    check_suite(fm, suite)?;
    match estimator {
        Estimator::UniformRejection => Ok(ValidTSetSample::draw(fm, t, samples, seed)?.report(suite)),
        Estimator::CoveredSetSampling => covered_set_estimate(fm, suite, t, samples, seed),
    }
}

/// Draw a product uniformly, then `t` features uniformly: a covered t-set
/// `x` appears with probability `c(x) / (m C(n,t))`, where `c(x)` counts the
/// products covering it, so `m C(n,t) E[1 / c(x)]` is the number of
/// distinct covered t-sets.
fn covered_set_estimate(
    fm: &FeatureModel,
    suite: &[Product],
    t: usize,
    samples: u64,
    seed: u64,
) -> Result<CoverageReport> {
    if samples == 0 {
        return Err(Error::InvalidConfig("samples must be >= 1".into()));
    }
    let n = fm.num_features();
    let m = suite.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<TSet> = (0..samples)
        .map(|_| {
            let p = &suite[rng.gen_range(0..m)];
            let mut features: Vec<usize> = index::sample(&mut rng, n, t).iter().map(|f| f + 1).collect();
            features.sort_unstable();
            TSet::from_canonical(features.iter().map(|&f| p.literal(f)).collect())
        })
        .collect();
    let weights: Vec<f64> = draws
        .par_iter()
        .map(|ts| 1.0 / suite.iter().filter(|p| ts.is_covered_by(p)).count() as f64)
        .collect();
    let k = samples as f64;
    let mean = weights.iter().sum::<f64>() / k;
    let var = weights.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
    let scale = m as f64 * binomial_f64(n as u64, t as u64);
    let covered = scale * mean;
    let covered_se = scale * (var / k).sqrt();

    let valid = estimate_valid_tsets(fm, t, samples, seed.wrapping_add(0x9e37_79b9_7f4a_7c15))?;
    let ratio = if valid.estimate > 0.0 { covered / valid.estimate } else { 1.0 };
    let rel = |se: f64, v: f64| if v > 0.0 { se / v } else { 0.0 };
    let std_error =
        ratio * (rel(covered_se, covered).powi(2) + rel(valid.std_error, valid.estimate).powi(2)).sqrt();
    Ok(CoverageReport {
        schema_version: REPORT_SCHEMA_VERSION,
        t,
        method: Method::Sampled,
        covered,
        total_valid: valid.estimate,
        coverage: ratio.min(1.0),
        estimator: Some(Estimator::CoveredSetSampling),
        sample_size: Some(samples),
        seed: Some(seed),
        std_error: Some(std_error),
    })
}

/// How [`coverage_curve`] measures each prefix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveMode {
    Exact { budget: u128 },
    /// One shared sample of valid t-sets for every prefix.
    Sampled { samples: u64, seed: u64 },
}

impl CurveMode {
    pub fn exact() -> Self {
        CurveMode::Exact {
            budget: DEFAULT_ENUMERATION_BUDGET,
        }
    }
}

/// Coverage of every prefix `1..=m` of an ordered suite.
pub fn coverage_curve(fm: &FeatureModel, ordered: &[Product], t: usize, mode: CurveMode) -> Result<Vec<f64>> {
    let n = fm.num_features();
    check_strength(t, n)?;
    check_suite(fm, ordered)?;
    match mode {
        CurveMode::Exact { budget } => {
            let space = index_space(n, t, budget)?;
            let total = exact_valid_tsets_with_budget(fm, t, budget)?;
            Ok(exact_curve_with_total(ordered, t, space, total))
        }
        CurveMode::Sampled { samples, seed } => {
            let sample = ValidTSetSample::draw(fm, t, samples, seed)?;
            Ok(sampled_curve(&sample, ordered))
        }
    }
}

/// Exact prefix coverage given a precomputed number of valid t-sets.
pub fn exact_curve(fm: &FeatureModel, ordered: &[Product], t: usize, total_valid: u64) -> Result<Vec<f64>> {
    let n = fm.num_features();
    check_strength(t, n)?;
    check_suite(fm, ordered)?;
    let space = index_space(n, t, DEFAULT_ENUMERATION_BUDGET)?;
    Ok(exact_curve_with_total(ordered, t, space, total_valid))
}

fn exact_curve_with_total(ordered: &[Product], t: usize, space: usize, total: u64) -> Vec<f64> {
    let mut bits = Bits::new(space);
    let mut covered = 0u64;
    ordered
        .iter()
        .map(|p| {
            covered += covered_keys(p, t).filter(|&k| bits.insert(k)).count() as u64;
            if total == 0 {
                0.0
            } else {
                covered as f64 / total as f64
            }
        })
        .collect()
}

/// Prefix coverage against a shared sample.
pub fn sampled_curve(sample: &ValidTSetSample, ordered: &[Product]) -> Vec<f64> {
    let mut first_hits = vec![0u64; ordered.len()];
    for idx in sample.first_cover(ordered).into_iter().flatten() {
        first_hits[idx] += 1;
    }
    let k = sample.len() as f64;
    let mut acc = 0u64;
    first_hits
        .into_iter()
        .map(|h| {
            acc += h;
            acc as f64 / k
        })
        .collect()
}
