//! Mann–Whitney U test with average ranks for ties.
//!
//! Internally ranks and U are doubled so that tied (half-integer) ranks
//! stay integral and permutation tails compare exactly.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dist::normal_cdf;
use super::{binomial_table, Pooled, StatsError, TestConfig, TestMethod, TestResult};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    TwoSided,
    /// `x` tends to be smaller than `y`.
    Less,
    /// `x` tends to be larger than `y`.
    Greater,
}

/// Doubled mean rank of each tie group: first + last position (1-based).
fn doubled_group_ranks(groups: &[usize]) -> Vec<u64> {
    let mut start = 0u64;
    groups
        .iter()
        .map(|&g| {
            let r = 2 * start + g as u64 + 1;
            start += g as u64;
            r
        })
        .collect()
}

/// 2U for x given its per-group counts.
fn doubled_u(ranks2: &[u64], x_in_group: &[usize], n: usize) -> i64 {
    let r2: u64 = ranks2.iter().zip(x_in_group).map(|(&r, &c)| r * c as u64).sum();
    r2 as i64 - (n * (n + 1)) as i64
}

fn in_tail(u2: i64, u2_obs: i64, nm: i64, alt: Alternative) -> bool {
    match alt {
        Alternative::TwoSided => (u2 - nm).abs() >= (u2_obs - nm).abs(),
        Alternative::Less => u2 <= u2_obs,
        Alternative::Greater => u2 >= u2_obs,
    }
}

/// Exact permutation distribution of 2U conditional on ties, by dynamic
/// programming over tie groups; returns (tail count, total splits).
#[allow(clippy::needless_range_loop)]
fn exact_tail(groups: &[usize], n: usize, m: usize, u2_obs: i64, alt: Alternative) -> (u128, u128) {
    let ranks2 = doubled_group_ranks(groups);
    let binom = binomial_table(n + m);
    let mut states: Vec<HashMap<u64, u128>> = vec![HashMap::new(); n + 1];
    states[0].insert(0, 1);
    let mut seen = 0usize;
    for (&g, &r2) in groups.iter().zip(&ranks2) {
        seen += g;
        let mut next: Vec<HashMap<u64, u128>> = vec![HashMap::new(); n + 1];
        for (a_prev, map) in states.iter().enumerate() {
            for t in 0..=g.min(n - a_prev) {
                let a = a_prev + t;
                if map.is_empty() || seen - a > m {
                    continue;
                }
                let ways = binom[g][t];
                for (&s, &c) in map {
                    *next[a].entry(s + t as u64 * r2).or_insert(0) += c * ways;
                }
            }
        }
        states = next;
    }
    let nm = (n * m) as i64;
    let base = (n * (n + 1)) as i64;
    let tail = states[n]
        .iter()
        .filter(|(&r2, _)| in_tail(r2 as i64 - base, u2_obs, nm, alt))
        .map(|(_, &c)| c)
        .sum();
    (tail, binom[n + m][n])
}

fn monte_carlo_tail(p: &Pooled, n: usize, m: usize, u2_obs: i64, alt: Alternative, permutations: usize, seed: u64) -> f64 {
    let ranks2 = doubled_group_ranks(&p.groups);
    let mut labels: Vec<bool> = (0..n + m).map(|i| i < n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; p.groups.len()];
    let mut hits = 0usize;
    for _ in 0..permutations {
        labels.shuffle(&mut rng);
        let mut pos = 0;
        for (gi, &g) in p.groups.iter().enumerate() {
            counts[gi] = labels[pos..pos + g].iter().filter(|&&l| l).count();
            pos += g;
        }
        if in_tail(doubled_u(&ranks2, &counts, n), u2_obs, (n * m) as i64, alt) {
            hits += 1;
        }
    }
    (hits + 1) as f64 / (permutations + 1) as f64
}

/// Normal approximation with tie-corrected variance and continuity
/// correction.
fn asymptotic_p(p: &Pooled, n: usize, m: usize, u: f64, alt: Alternative) -> Result<f64, StatsError> {
    let (nf, mf) = (n as f64, m as f64);
    let big_n = nf + mf;
    let tie_term: f64 = p.groups.iter().map(|&t| (t as f64).powi(3) - t as f64).sum();
    let var = nf * mf / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
    if var <= 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    let sd = var.sqrt();
    let mu = nf * mf / 2.0;
    let pv = match alt {
        Alternative::TwoSided => 2.0 * (1.0 - normal_cdf(((u - mu).abs() - 0.5) / sd)),
        Alternative::Greater => 1.0 - normal_cdf((u - mu - 0.5) / sd),
        Alternative::Less => normal_cdf((u - mu + 0.5) / sd),
    };
    Ok(pv.clamp(0.0, 1.0))
}

/// Mann–Whitney U test. The reported statistic is U for `x`
/// (the number of (x, y) pairs with x > y, ties counting one half).
pub fn mann_whitney_u<T: Scalar>(x: &[T], y: &[T], alternative: Alternative, config: &TestConfig) -> Result<TestResult<T>, StatsError> {
    let pooled = Pooled::new(x, y)?;
    let (n, m) = (x.len(), y.len());
    let u2 = doubled_u(&doubled_group_ranks(&pooled.groups), &pooled.x_in_group, n);
    let u = u2 as f64 / 2.0;
    let method = config.method_for(n + m);
    let p = match method {
        TestMethod::ExactPermutation => {
            let (tail, total) = exact_tail(&pooled.groups, n, m, u2, alternative);
            tail as f64 / total as f64
        }
        TestMethod::MonteCarloPermutation => {
            let mc = config.monte_carlo.expect("method implies monte carlo settings");
            monte_carlo_tail(&pooled, n, m, u2, alternative, mc.permutations, mc.seed)
        }
        TestMethod::Asymptotic => asymptotic_p(&pooled, n, m, u, alternative)?,
    };
    Ok(TestResult { statistic: T::of(u), p_value: T::of(p), n1: n, n2: m, method })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Pair-counting U and full enumeration of label assignments.
    fn enumeration_p(x: &[f64], y: &[f64], alt: Alternative) -> f64 {
        let u2 = |xs: &[f64], ys: &[f64]| -> i64 {
            xs.iter()
                .flat_map(|a| ys.iter().map(move |b| if a > b { 2 } else if a == b { 1 } else { 0 }))
                .sum()
        };
        let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
        let (n, nn) = (x.len(), pooled.len());
        let nm = (x.len() * y.len()) as i64;
        let obs = u2(x, y);
        let (mut hit, mut total) = (0u64, 0u64);
        for mask in 0u32..(1 << nn) {
            if mask.count_ones() as usize != n {
                continue;
            }
            let xs: Vec<f64> = (0..nn).filter(|i| mask >> i & 1 == 1).map(|i| pooled[i]).collect();
            let ys: Vec<f64> = (0..nn).filter(|i| mask >> i & 1 == 0).map(|i| pooled[i]).collect();
            total += 1;
            hit += u64::from(in_tail(u2(&xs, &ys), obs, nm, alt));
        }
        hit as f64 / total as f64
    }

    #[test]
    fn two_by_two_fully_separated() {
        let r = mann_whitney_u(&[1.0, 2.0], &[3.0, 4.0], Alternative::TwoSided, &TestConfig::default()).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 2.0 / 6.0);
        assert_eq!(enumeration_p(&[1.0, 2.0], &[3.0, 4.0], Alternative::TwoSided), 2.0 / 6.0);
        assert_eq!(r.method, TestMethod::ExactPermutation);
    }

    #[test]
    fn identical_samples_have_p_one() {
        let x = [1.0, 5.0, 3.0, 3.0];
        let r = mann_whitney_u(&x, &x, Alternative::TwoSided, &TestConfig::default()).unwrap();
        assert_eq!(r.p_value, 1.0);
        let big: Vec<f64> = (0..40).map(f64::from).collect();
        let r = mann_whitney_u(&big, &big, Alternative::TwoSided, &TestConfig::default()).unwrap();
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn all_identical_values() {
        let x = [2.0; 15];
        let y = [2.0; 15];
        assert_eq!(
            mann_whitney_u(&x, &y, Alternative::TwoSided, &TestConfig::asymptotic()),
            Err(StatsError::DegenerateVariance)
        );
        let r = mann_whitney_u(&x, &y, Alternative::TwoSided, &TestConfig::exact_up_to(30)).unwrap();
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn one_sided_and_ties_match_enumeration() {
        let x = [1.0, 2.0, 2.0, 4.0, 7.0];
        let y = [2.0, 3.0, 4.0, 4.0, 8.0, 9.0];
        for alt in [Alternative::TwoSided, Alternative::Less, Alternative::Greater] {
            let r = mann_whitney_u(&x, &y, alt, &TestConfig::default()).unwrap();
            assert_eq!(r.p_value, enumeration_p(&x, &y, alt), "{alt:?}");
        }
    }

    #[test]
    fn matches_reference_values() {
        // scipy.stats.mannwhitneyu (use_continuity=True).
        let x = [0.8, 1.9, 2.4, 3.6, 4.1, 5.5, 6.2, 7.9, 8.3, 10.0, 11.2, 12.6];
        let y = [3.0, 4.4, 6.8, 7.1, 9.5, 10.7, 12.1, 13.4, 14.0, 15.5, 16.9, 17.3, 18.8];
        let exact = mann_whitney_u(&x, &y, Alternative::TwoSided, &TestConfig::exact_up_to(30)).unwrap();
        let asym = mann_whitney_u(&x, &y, Alternative::TwoSided, &TestConfig::asymptotic()).unwrap();
        assert_eq!(exact.statistic, REF_U);
        assert!((exact.p_value - REF_P_EXACT).abs() < 1e-12, "{}", exact.p_value);
        assert!((asym.p_value - REF_P_ASYM).abs() < 1e-9, "{}", asym.p_value);
    }

    const REF_U: f64 = 32.0;
    const REF_P_EXACT: f64 = 0.011_393_573_447_685_709;
    const REF_P_ASYM: f64 = 0.013_328_328_780_817_546;

    #[test]
    fn swap_preserves_two_sided_p() {
        let x = [0.3, 2.0, 2.0, 7.5, 1.1, 6.0];
        let y = [4.0, 2.0, 9.0, 0.1];
        for cfg in [TestConfig::default(), TestConfig::asymptotic()] {
            let a = mann_whitney_u(&x, &y, Alternative::TwoSided, &cfg).unwrap();
            let b = mann_whitney_u(&y, &x, Alternative::TwoSided, &cfg).unwrap();
            assert_eq!(a.p_value, b.p_value);
            assert_eq!(a.statistic + b.statistic, 24.0);
        }
    }
}
