//! Nonparametric tests used to compare rankings and account groups.

mod cvm;
mod dist;
mod krippendorff;
mod mwu;
mod scan;
mod spearman;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cvm::{cvm_statistic, cvm_two_sample};
pub use dist::{cvm_limit_cdf, normal_cdf};
pub use krippendorff::{krippendorff_alpha, read_annotations_csv, AnnotationMatrix};
pub use mwu::{mann_whitney_u, Alternative};
pub use scan::{prefix_cvm_scan, ScanPoint};
pub use spearman::{spearman, Correlation};

/// Combined sample size up to which permutation p-values are exact.
pub const DEFAULT_EXACT_BOUND: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    Asymptotic,
    ExactPermutation,
    MonteCarloPermutation,
}

impl TestMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            TestMethod::Asymptotic => "asymptotic",
            TestMethod::ExactPermutation => "exact_permutation",
            TestMethod::MonteCarloPermutation => "monte_carlo_permutation",
        }
    }
}

/// Seeded Monte-Carlo permutation settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub permutations: usize,
    pub seed: u64,
}

/// How p-values are obtained. Samples with `n1 + n2 <= exact_bound` get the
/// exact permutation distribution; larger ones use Monte-Carlo permutation
/// when configured and the asymptotic distribution otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestConfig {
    pub exact_bound: usize,
    pub monte_carlo: Option<MonteCarlo>,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self { exact_bound: DEFAULT_EXACT_BOUND, monte_carlo: None }
    }
}

impl TestConfig {
    pub fn asymptotic() -> Self {
        Self { exact_bound: 0, monte_carlo: None }
    }

    pub fn exact_up_to(bound: usize) -> Self {
        Self { exact_bound: bound, monte_carlo: None }
    }

    pub(crate) fn method_for(&self, n: usize) -> TestMethod {
        if n <= self.exact_bound {
            TestMethod::ExactPermutation
        } else if self.monte_carlo.is_some() {
            TestMethod::MonteCarloPermutation
        } else {
            TestMethod::Asymptotic
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult<T> {
    pub statistic: T,
    pub p_value: T,
    pub n1: usize,
    pub n2: usize,
    pub method: TestMethod,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("sample is empty")]
    EmptySample,
    #[error("sample contains a non-finite value")]
    NonFinite,
    #[error("all observations are identical; the normal approximation has zero variance")]
    DegenerateVariance,
    #[error("paired samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {need} observations, got {got}")]
    TooFew { need: usize, got: usize },
    #[error("input vector is constant; correlation is undefined")]
    ConstantInput,
    #[error("no item carries two or more labels")]
    NoPairableItems,
    #[error("requested prefix {requested} exceeds curve length {available}")]
    PrefixTooLong { requested: usize, available: usize },
}

/// Pooled observations sorted by value, grouped into runs of ties.
pub(crate) struct Pooled {
    /// Sizes of tie groups in ascending value order.
    pub groups: Vec<usize>,
    /// Number of `x` observations in each group for the observed split.
    pub x_in_group: Vec<usize>,
}

impl Pooled {
    pub fn new<T: crate::Scalar>(x: &[T], y: &[T]) -> Result<Self, StatsError> {
        if x.is_empty() || y.is_empty() {
            return Err(StatsError::EmptySample);
        }
        if x.iter().chain(y).any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite);
        }
        let mut all: Vec<(T, bool)> = x.iter().map(|&v| (v, true)).chain(y.iter().map(|&v| (v, false))).collect();
        all.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
        let mut groups = Vec::new();
        let mut x_in_group = Vec::new();
        let mut i = 0;
        while i < all.len() {
            let mut j = i;
            let mut xs = 0;
            while j < all.len() && all[j].0 == all[i].0 {
                xs += usize::from(all[j].1);
                j += 1;
            }
            groups.push(j - i);
            x_in_group.push(xs);
            i = j;
        }
        Ok(Self { groups, x_in_group })
    }
}

pub(crate) fn binomial_table(n: usize) -> Vec<Vec<u128>> {
    let mut c = vec![vec![0u128; n + 1]; n + 1];
    for i in 0..=n {
        c[i][0] = 1;
        for j in 1..=i {
            c[i][j] = c[i - 1][j - 1] + if j < i { c[i - 1][j] } else { 0 };
        }
    }
    c
}
