//! Two-sample Cramér–von Mises test.
//!
//! With ECDFs `F` (of `x`, size n) and `G` (of `y`, size m) evaluated at all
//! N = n + m pooled observations, the statistic is
//! `T = nm/N² Σ (F - G)² = S / (N² n m)` where `S = Σ (a m - b n)²` and
//! `a`, `b` count the x and y observations at or below each point. All
//! permutation comparisons are made on the integer `S`.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dist::cvm_limit_cdf;
use super::{binomial_table, Pooled, StatsError, TestConfig, TestMethod, TestResult};
use crate::scalar::Scalar;

fn integer_statistic(groups: &[usize], x_in_group: &[usize], n: usize, m: usize) -> u128 {
    let (mut a, mut seen) = (0i128, 0i128);
    let mut s = 0u128;
    for (&g, &xs) in groups.iter().zip(x_in_group) {
        a += xs as i128;
        seen += g as i128;
        let d = a * m as i128 - (seen - a) * n as i128;
        s += g as u128 * (d * d) as u128;
    }
    s
}

fn to_statistic<T: Scalar>(s: u128, n: usize, m: usize) -> T {
    let nn = (n + m) as f64;
    T::of(s as f64 / (nn * nn * n as f64 * m as f64))
}

/// Cramér–von Mises two-sample statistic.
pub fn cvm_statistic<T: Scalar>(x: &[T], y: &[T]) -> Result<T, StatsError> {
    let p = Pooled::new(x, y)?;
    Ok(to_statistic(integer_statistic(&p.groups, &p.x_in_group, x.len(), y.len()), x.len(), y.len()))
}

/// Exact permutation tail count `#{S_perm >= s_obs}` over all C(N, n) splits,
/// conditional on the tie structure. Dynamic program over tie groups keyed by
/// the running x count.
#[allow(clippy::needless_range_loop)]
fn exact_tail(groups: &[usize], n: usize, m: usize, s_obs: u128) -> (u128, u128) {
    let max_group = groups.iter().copied().max().unwrap_or(0);
    let binom = binomial_table(max_group.max(n + m));
    // states[a] maps partial S to the number of label assignments.
    let mut states: Vec<HashMap<u128, u128>> = vec![HashMap::new(); n + 1];
    states[0].insert(0, 1);
    let mut seen = 0usize;
    for &g in groups {
        let mut next: Vec<HashMap<u128, u128>> = vec![HashMap::new(); n + 1];
        seen += g;
        for (a_prev, map) in states.iter().enumerate() {
            if map.is_empty() {
                continue;
            }
            for t in 0..=g.min(n - a_prev) {
                let a = a_prev + t;
                if seen - a > m {
                    continue;
                }
                let d = a as i128 * m as i128 - (seen - a) as i128 * n as i128;
                let add = g as u128 * (d * d) as u128;
                let ways = binom[g][t];
                let slot = &mut next[a];
                for (&s, &c) in map {
                    *slot.entry(s + add).or_insert(0) += c * ways;
                }
            }
        }
        states = next;
    }
    let tail = states[n].iter().filter(|(&s, _)| s >= s_obs).map(|(_, &c)| c).sum();
    (tail, binom[n + m][n])
}

fn monte_carlo_tail(pooled: &Pooled, n: usize, m: usize, s_obs: u128, permutations: usize, seed: u64) -> f64 {
    let mut labels: Vec<bool> = (0..n + m).map(|i| i < n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x_in_group = vec![0usize; pooled.groups.len()];
    let mut hits = 0usize;
    for _ in 0..permutations {
        labels.shuffle(&mut rng);
        let mut pos = 0;
        for (gi, &g) in pooled.groups.iter().enumerate() {
            x_in_group[gi] = labels[pos..pos + g].iter().filter(|&&l| l).count();
            pos += g;
        }
        if integer_statistic(&pooled.groups, &x_in_group, n, m) >= s_obs {
            hits += 1;
        }
    }
    (hits + 1) as f64 / (permutations + 1) as f64
}

/// Asymptotic p-value: the statistic is standardized with its exact finite
/// sample mean and variance and referred to the limiting distribution.
fn asymptotic_p(t: f64, n: usize, m: usize) -> Result<f64, StatsError> {
    let (nf, mf) = (n as f64, m as f64);
    let big_n = nf + mf;
    let k = nf * mf;
    let mean = (1.0 + 1.0 / big_n) / 6.0;
    let var = (big_n + 1.0) * (4.0 * k * big_n - 3.0 * (nf * nf + mf * mf) - 2.0 * k) / (45.0 * big_n * big_n * 4.0 * k);
    if var.is_nan() || var <= 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    let tn = 1.0 / 6.0 + (t - mean) / (45.0 * var).sqrt();
    if tn <= 0.0 {
        Ok(1.0)
    } else {
        Ok((1.0 - cvm_limit_cdf(tn)).clamp(0.0, 1.0))
    }
}

/// Two-sample Cramér–von Mises test (upper tail of the statistic).
pub fn cvm_two_sample<T: Scalar>(x: &[T], y: &[T], config: &TestConfig) -> Result<TestResult<T>, StatsError> {
    let pooled = Pooled::new(x, y)?;
    let (n, m) = (x.len(), y.len());
    let s_obs = integer_statistic(&pooled.groups, &pooled.x_in_group, n, m);
    let statistic: T = to_statistic(s_obs, n, m);
    let method = config.method_for(n + m);
    let p = match method {
        TestMethod::ExactPermutation => {
            let (tail, total) = exact_tail(&pooled.groups, n, m, s_obs);
            tail as f64 / total as f64
        }
        TestMethod::MonteCarloPermutation => {
            let mc = config.monte_carlo.expect("method implies monte carlo settings");
            monte_carlo_tail(&pooled, n, m, s_obs, mc.permutations, mc.seed)
        }
        TestMethod::Asymptotic => asymptotic_p(statistic.as_f64(), n, m)?,
    };
    Ok(TestResult { statistic, p_value: T::of(p), n1: n, n2: m, method })
}
