//! Misinformation shares and dismantling curves.
//!
//! Every account's share is its evaluation-period out-strength over the
//! total edge weight, independent of removal order. Curves are built from
//! exact integer prefix sums and divided once per point, so two curves over
//! the same network compare exactly.

use std::collections::BTreeSet;
use std::io::{self, Write};

use thiserror::Error;

use crate::graph::RetweetNetwork;
use crate::metrics::{MetricName, Ranking, TiePolicy};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DismantleError {
    #[error("evaluation network has no misinformation retweets; shares are undefined")]
    EmptyNetwork,
    #[error("ranking lists account {0:?} more than once")]
    DuplicateAccount(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MisinfoShare<T> {
    pub account_id: String,
    pub m: T,
}

fn ratio<T: Scalar>(num: u64, den: u64) -> T {
    T::of_u64(num) / T::of_u64(den)
}

/// Fraction of all evaluation-period misinformation retweets originated by
/// `account`.
pub fn misinfo_share<T: Scalar>(eval: &RetweetNetwork, account: &str) -> Result<MisinfoShare<T>, DismantleError> {
    let total = eval.total_weight();
    if total == 0 {
        return Err(DismantleError::EmptyNetwork);
    }
    Ok(MisinfoShare { account_id: account.to_string(), m: ratio(eval.out_strength(account), total) })
}

/// Share of the total weight originated by posters outside `candidates`.
pub fn residual_floor<T: Scalar>(eval: &RetweetNetwork, candidates: &BTreeSet<String>) -> Result<T, DismantleError> {
    let total = eval.total_weight();
    if total == 0 {
        return Err(DismantleError::EmptyNetwork);
    }
    let covered: u64 = candidates.iter().map(|c| eval.out_strength(c)).sum();
    Ok(ratio(total - covered, total))
}

/// Candidates sorted by descending evaluation-period share, ties by
/// ascending id. Removal by this order is optimal at every `k`.
pub fn optimal_ranking<T: Scalar>(eval: &RetweetNetwork, candidates: &BTreeSet<String>) -> Ranking<T> {
    let total = eval.total_weight();
    let mut order: Vec<(&String, u64)> = candidates.iter().map(|c| (c, eval.out_strength(c))).collect();
    // BTreeSet iteration is already id-ascending; a stable sort keeps it for ties.
    order.sort_by_key(|&(_, w)| std::cmp::Reverse(w));
    Ranking::from_order(
        MetricName::Optimal,
        order
            .into_iter()
            .map(|(id, w)| (id.clone(), if total == 0 { T::zero() } else { ratio(w, total) }))
            .collect(),
        TiePolicy::IdAscending,
    )
}

/// Remaining misinformation after removing the first `k` ranked accounts,
/// for every `k` from 0 to the ranking length.
#[derive(Debug, Clone, PartialEq)]
pub struct DismantlingCurve<T> {
    pub metric: MetricName,
    /// `(k, remaining)`; `points[k].0 == k`.
    pub points: Vec<(usize, T)>,
    /// Share of the k-th removed account (`increments[k - 1]`).
    pub increments: Vec<T>,
    /// Remaining fraction once every ranked account is removed.
    pub residual_floor: T,
    pub total_weight: u64,
}

impl<T: Scalar> DismantlingCurve<T> {
    pub fn remaining(&self, k: usize) -> T {
        self.points[k.min(self.points.len() - 1)].1
    }

    /// Fraction removed by the first `k` accounts.
    pub fn removed(&self, k: usize) -> T {
        T::one() - self.remaining(k)
    }

    /// Number of ranked accounts (the largest `k`).
    pub fn len(&self) -> usize {
        self.points.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Sequential-removal curve of `ranking` over the evaluation network.
/// An empty ranking yields the single point `(0, 1)`.
pub fn dismantling_curve<T: Scalar>(ranking: &Ranking<T>, eval: &RetweetNetwork) -> Result<DismantlingCurve<T>, DismantleError> {
    let total = eval.total_weight();
    if ranking.is_empty() {
        return Ok(DismantlingCurve {
            metric: ranking.metric,
            points: vec![(0, T::one())],
            increments: vec![],
            residual_floor: T::one(),
            total_weight: total,
        });
    }
    if total == 0 {
        return Err(DismantleError::EmptyNetwork);
    }
    let mut seen = BTreeSet::new();
    let mut points = Vec::with_capacity(ranking.len() + 1);
    let mut increments = Vec::with_capacity(ranking.len());
    points.push((0, T::one()));
    let mut removed = 0u64;
    for (k, id) in ranking.ordered_accounts.iter().enumerate() {
        if !seen.insert(id.as_str()) {
            return Err(DismantleError::DuplicateAccount(id.clone()));
        }
        let w = eval.out_strength(id);
        removed += w;
        increments.push(ratio(w, total));
        points.push((k + 1, ratio(total - removed, total)));
    }
    Ok(DismantlingCurve {
        metric: ranking.metric,
        residual_floor: points.last().expect("nonempty").1,
        points,
        increments,
        total_weight: total,
    })
}

/// CSV `metric,k,remaining` for each curve. With `every > 1` only every
/// `every`-th point plus the last one is written.
pub fn write_curves_csv<T: Scalar, W: Write>(curves: &[DismantlingCurve<T>], every: usize, w: W) -> io::Result<()> {
    let every = every.max(1);
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["metric", "k", "remaining"])?;
    for c in curves {
        let last = c.points.len() - 1;
        for &(k, rem) in c.points.iter().filter(|(k, _)| k % every == 0 || *k == last) {
            wtr.write_record([c.metric.as_str(), &k.to_string(), &rem.to_string()])?;
        }
    }
    wtr.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_network;
    use crate::ingest::{LabeledRecord, RetweetRef, TweetRecord};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};

    fn rt(n: usize, by: &str, author: &str) -> LabeledRecord {
        LabeledRecord {
            record: TweetRecord {
                tweet_id: format!("r{n}"),
                author_id: by.into(),
                timestamp: 1,
                retweet_of: Some(RetweetRef { tweet_id: format!("p-{author}"), author_id: author.into() }),
                urls: vec![],
                follower_count: None,
                bot_score: None,
                toxicity: None,
                text_lang: None,
                text: None,
            },
            low_credibility: true,
        }
    }

    /// Builds a network from `(poster, retweeter, weight)` triples.
    fn net(edges: &[(&str, &str, u64)]) -> RetweetNetwork {
        let mut recs = Vec::new();
        for &(p, r, w) in edges {
            for _ in 0..w {
                recs.push(rt(recs.len(), r, p));
            }
        }
        build_network(&recs)
    }

    fn set(ids: &[&str]) -> BTreeSet<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn share_is_out_strength_over_total() {
        let n = net(&[("i", "a", 2), ("i", "b", 1), ("k", "a", 3)]);
        assert_eq!(misinfo_share::<f64>(&n, "i").unwrap().m, 0.5);
        assert_eq!(misinfo_share::<f64>(&n, "a").unwrap().m, 0.0);
        assert_eq!(misinfo_share::<f64>(&RetweetNetwork::default(), "i"), Err(DismantleError::EmptyNetwork));
    }

    #[test]
    fn shares_and_floor_partition_total() {
        let n = net(&[("i", "a", 2), ("i", "b", 1), ("k", "a", 3), ("z", "q", 7)]);
        let cands = set(&["i", "k"]);
        let sum: f64 = cands.iter().map(|c| misinfo_share::<f64>(&n, c).unwrap().m).sum();
        let floor: f64 = residual_floor(&n, &cands).unwrap();
        assert!((sum + floor - 1.0).abs() < 1e-12);
        assert_eq!(residual_floor::<f64>(&n, &set(&["i", "k", "z"])).unwrap(), 0.0);
        assert_eq!(residual_floor::<f64>(&n, &BTreeSet::new()).unwrap(), 1.0);
    }

    #[test]
    fn single_account_curve() {
        let n = net(&[("i", "a", 1), ("k", "a", 1)]);
        let r = Ranking::from_order(MetricName::Fib, vec![("i".to_string(), 1.0)], TiePolicy::InfluenceThenId);
        let c = dismantling_curve(&r, &n).unwrap();
        assert_eq!(c.points, vec![(0, 1.0), (1, 0.5)]);
        assert_eq!(c.residual_floor, 0.5);
    }

    #[test]
    fn empty_ranking_is_single_point() {
        let r: Ranking<f64> = Ranking::from_order(MetricName::Fib, vec![], TiePolicy::InfluenceThenId);
        let c = dismantling_curve(&r, &RetweetNetwork::default()).unwrap();
        assert_eq!(c.points, vec![(0, 1.0)]);
    }

    #[test]
    fn duplicate_account_is_rejected() {
        let n = net(&[("i", "a", 1)]);
        let r = Ranking::from_order(MetricName::Fib, vec![("i".into(), 1.0), ("i".into(), 1.0)], TiePolicy::InfluenceThenId);
        assert!(matches!(dismantling_curve(&r, &n), Err(DismantleError::DuplicateAccount(_))));
    }

    #[test]
    fn optimal_order_and_ties() {
        let n = net(&[("a", "x", 1), ("b", "x", 3)]);
        let r: Ranking<f64> = optimal_ranking(&n, &set(&["a", "b"]));
        assert_eq!(r.ordered_accounts, vec!["b", "a"]);
        let n = net(&[("c", "x", 2), ("a", "x", 2), ("b", "x", 2)]);
        let r: Ranking<f64> = optimal_ranking(&n, &set(&["c", "b", "a"]));
        assert_eq!(r.ordered_accounts, vec!["a", "b", "c"]);
    }

    /// Best achievable removal for each k by enumerating every subset.
    fn best_prefix_brute(n: &RetweetNetwork, cands: &[String]) -> Vec<u64> {
        let mut best = vec![0u64; cands.len() + 1];
        for mask in 0u32..(1 << cands.len()) {
            let k = mask.count_ones() as usize;
            let w: u64 = (0..cands.len()).filter(|i| mask >> i & 1 == 1).map(|i| n.out_strength(&cands[i])).sum();
            best[k] = best[k].max(w);
        }
        best
    }

    #[test]
    fn optimal_matches_brute_force_on_small_networks() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let posters = ["p0", "p1", "p2", "p3", "p4"];
            let mut edges = Vec::new();
            for p in posters {
                for r in ["x", "y"] {
                    let w = rng.gen_range(0..6);
                    if w > 0 {
                        edges.push((p, r, w));
                    }
                }
            }
            if edges.is_empty() {
                continue;
            }
            let n = net(&edges);
            let cands: Vec<String> = posters.iter().map(|s| s.to_string()).collect();
            let c = dismantling_curve(&optimal_ranking::<f64>(&n, &cands.iter().cloned().collect()), &n).unwrap();
            let total = n.total_weight();
            for (k, best) in best_prefix_brute(&n, &cands).into_iter().enumerate() {
                assert_eq!(c.remaining(k), (total - best) as f64 / total as f64);
            }
        }
    }

    #[test]
    fn optimal_dominates_random_permutations_and_curves_are_additive() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let mut edges = Vec::new();
        let names: Vec<String> = (0..40).map(|i| format!("u{i}")).collect();
        for p in &names[..30] {
            for _ in 0..rng.gen_range(0..4) {
                edges.push((p.as_str(), names[rng.gen_range(0..40)].as_str(), rng.gen_range(1..9)));
            }
        }
        edges.retain(|(p, r, _)| p != r);
        let n = net(&edges);
        let cands: BTreeSet<String> = names[..35].iter().cloned().collect();
        let opt = dismantling_curve(&optimal_ranking::<f64>(&n, &cands), &n).unwrap();
        let mut order: Vec<String> = cands.iter().cloned().collect();
        for _ in 0..100 {
            order.shuffle(&mut rng);
            let r = Ranking::from_order(MetricName::Fib, order.iter().map(|id| (id.clone(), 0.0)).collect(), TiePolicy::InfluenceThenId);
            let c = dismantling_curve(&r, &n).unwrap();
            for k in 0..=order.len() {
                assert!(opt.remaining(k) <= c.remaining(k));
            }
            for k in 0..order.len() {
                assert!((c.remaining(k) - c.remaining(k + 1) - c.increments[k]).abs() < 1e-12);
                assert!(c.remaining(k) >= c.remaining(k + 1));
            }
            assert_eq!(c.residual_floor, opt.residual_floor);
        }
    }

    #[test]
    fn f32_curves() {
        let n = net(&[("i", "a", 3), ("k", "a", 1)]);
        let r: Ranking<f32> = optimal_ranking(&n, &set(&["i", "k"]));
        let c = dismantling_curve(&r, &n).unwrap();
        assert_eq!(c.points, vec![(0, 1.0f32), (1, 0.25), (2, 0.0)]);
    }

    #[test]
    fn csv_downsampling_keeps_last() {
        let n = net(&[("a", "x", 1), ("b", "x", 1), ("c", "x", 2)]);
        let c = dismantling_curve(&optimal_ranking::<f64>(&n, &set(&["a", "b", "c"])), &n).unwrap();
        let mut buf = Vec::new();
        write_curves_csv(&[c], 2, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "metric,k,remaining\noptimal,0,1\noptimal,2,0.25\noptimal,3,0\n");
    }
}
