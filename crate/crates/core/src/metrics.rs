//! Per-account superspreader metrics and rankings.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::RetweetNetwork;
use crate::ingest::TweetRecord;
use crate::scalar::{mean, Scalar};

/// FIB-index: the largest `f` such that at least `f` posts were each
/// retweeted at least `f` times. Linear time via a capped histogram.
pub fn fib_index(retweet_counts: &[u64]) -> u64 {
    let n = retweet_counts.len();
    let mut hist = vec![0usize; n + 1];
    for &c in retweet_counts {
        hist[(c.min(n as u64)) as usize] += 1;
    }
    let mut at_least = 0usize;
    for f in (1..=n).rev() {
        at_least += hist[f];
        if at_least >= f {
            return f as u64;
        }
    }
    0
}

/// Total low-credibility retweets earned by `account` (its out-strength).
pub fn influence(network: &RetweetNetwork, account: &str) -> u64 {
    network.out_strength(account)
}

/// Mean follower count over the tweets that carry a snapshot.
pub fn popularity<'a, T: Scalar, I: IntoIterator<Item = &'a TweetRecord>>(records: I) -> Option<T> {
    mean(records.into_iter().filter_map(|r| r.follower_count).map(T::of_u64))
}

/// Mean bot score over the tweets that carry one.
pub fn bot_score<'a, T: Scalar, I: IntoIterator<Item = &'a TweetRecord>>(records: I) -> Option<T> {
    mean(records.into_iter().filter_map(|r| r.bot_score).map(T::of))
        .map(|m| m.max(T::zero()).min(T::one()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    Fib,
    Influence,
    Popularity,
    BotScore,
    /// Evaluation-period oracle; built by `dismantle::optimal_ranking`.
    Optimal,
}

impl MetricName {
    pub const PREDICTIVE: [MetricName; 4] =
        [MetricName::Fib, MetricName::Influence, MetricName::Popularity, MetricName::BotScore];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricName::Fib => "fib",
            MetricName::Influence => "influence",
            MetricName::Popularity => "popularity",
            MetricName::BotScore => "bot_score",
            MetricName::Optimal => "optimal",
        }
    }
}

impl fmt::Display for MetricName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "fib" | "fib_index" => Ok(MetricName::Fib),
            "influence" => Ok(MetricName::Influence),
            "popularity" => Ok(MetricName::Popularity),
            "bot_score" | "bot" => Ok(MetricName::BotScore),
            "optimal" => Ok(MetricName::Optimal),
            other => Err(format!("unknown metric {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccountMetrics<T> {
    pub account_id: String,
    pub fib_index: u64,
    pub influence: u64,
    pub popularity: Option<T>,
    pub bot_score: Option<T>,
    pub n_misinfo_posts: u64,
}

impl<T: Scalar> AccountMetrics<T> {
    /// Metric value as a scalar; `None` when absent (or for `Optimal`).
    pub fn value(&self, by: MetricName) -> Option<T> {
        match by {
            MetricName::Fib => Some(T::of_u64(self.fib_index)),
            MetricName::Influence => Some(T::of_u64(self.influence)),
            MetricName::Popularity => self.popularity,
            MetricName::BotScore => self.bot_score,
            MetricName::Optimal => None,
        }
    }

    fn cmp_desc(&self, other: &Self, by: MetricName) -> Ordering {
        match by {
            MetricName::Fib => other.fib_index.cmp(&self.fib_index),
            MetricName::Influence => Ordering::Equal,
            MetricName::Popularity | MetricName::BotScore | MetricName::Optimal => {
                let (a, b) = (self.value(by), other.value(by));
                b.partial_cmp(&a).unwrap_or(Ordering::Equal)
            }
        }
    }
}

/// Computes all four metrics for every low-credibility poster of
/// `network`. `records` are the observation-period tweets used for the
/// follower and bot-score means.
pub fn compute_metrics<T: Scalar, R: AsRef<TweetRecord> + Sync>(network: &RetweetNetwork, records: &[R]) -> Vec<AccountMetrics<T>> {
    let mut by_author: BTreeMap<&str, Vec<&TweetRecord>> = BTreeMap::new();
    for r in records {
        let r = r.as_ref();
        by_author.entry(r.author_id.as_str()).or_default().push(r);
    }
    let posts = network.post_counts_by_author();
    let posters: Vec<&String> = network.posters().iter().collect();
    posters
        .into_par_iter()
        .map(|id| {
            let counts = posts.get(id).map(Vec::as_slice).unwrap_or(&[]);
            let tweets = by_author.get(id.as_str()).map(Vec::as_slice).unwrap_or(&[]);
            AccountMetrics {
                account_id: id.clone(),
                fib_index: fib_index(counts),
                influence: influence(network, id),
                popularity: popularity(tweets.iter().copied()),
                bot_score: bot_score(tweets.iter().copied()),
                n_misinfo_posts: counts.len() as u64,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    /// Descending Influence, then ascending account id.
    InfluenceThenId,
    /// Ascending account id.
    IdAscending,
}

impl TiePolicy {
    pub fn describe(self) -> &'static str {
        match self {
            TiePolicy::InfluenceThenId => "ties broken by descending influence, then ascending account id",
            TiePolicy::IdAscending => "ties broken by ascending account id",
        }
    }
}

/// Accounts ordered best (most suspect) first with their metric values.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking<T> {
    pub metric: MetricName,
    pub ordered_accounts: Vec<String>,
    /// `values[k]` is the metric value of `ordered_accounts[k]`.
    pub values: Vec<T>,
    pub tie_policy: TiePolicy,
    /// Accounts left out because the metric was absent.
    pub excluded: usize,
}

impl<T: Scalar> Ranking<T> {
    pub fn len(&self) -> usize {
        self.ordered_accounts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordered_accounts.is_empty()
    }

    /// Ranking in the given order, for callers that already sorted.
    pub fn from_order(metric: MetricName, ordered: Vec<(String, T)>, tie_policy: TiePolicy) -> Self {
        let (ordered_accounts, values) = ordered.into_iter().unzip();
        Self { metric, ordered_accounts, values, tie_policy, excluded: 0 }
    }

    /// CSV `rank,account_id,value`, rank 1 first.
    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["rank", "account_id", "value"])?;
        for (k, (id, v)) in self.ordered_accounts.iter().zip(&self.values).enumerate() {
            wtr.write_record([(k + 1).to_string(), id.clone(), v.to_string()])?;
        }
        wtr.flush()
    }
}

/// Sorts accounts by descending metric value. Accounts without the metric
/// are excluded and counted. Ties fall back to descending Influence and
/// then ascending account id.
pub fn rank_accounts<T: Scalar>(metrics: &[AccountMetrics<T>], by: MetricName) -> Ranking<T> {
    let mut eligible: Vec<&AccountMetrics<T>> = metrics.iter().filter(|m| m.value(by).is_some()).collect();
    let excluded = metrics.len() - eligible.len();
    eligible.sort_by(|a, b| {
        a.cmp_desc(b, by)
            .then_with(|| b.influence.cmp(&a.influence))
            .then_with(|| a.account_id.cmp(&b.account_id))
    });
    let mut r = Ranking::from_order(
        by,
        eligible
            .into_iter()
            .map(|m| (m.account_id.clone(), m.value(by).expect("filtered")))
            .collect(),
        TiePolicy::InfluenceThenId,
    );
    r.excluded = excluded;
    r
}

fn opt_to_string<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

/// CSV with header `account_id,fib_index,influence,popularity,bot_score,n_misinfo_posts`;
/// absent values are empty fields. Rows are in account-id order.
pub fn write_metrics_csv<T: Scalar, W: Write>(metrics: &[AccountMetrics<T>], w: W) -> io::Result<()> {
    let mut rows: Vec<&AccountMetrics<T>> = metrics.iter().collect();
    rows.sort_by(|a, b| a.account_id.cmp(&b.account_id));
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["account_id", "fib_index", "influence", "popularity", "bot_score", "n_misinfo_posts"])?;
    for m in rows {
        wtr.write_record([
            m.account_id.clone(),
            m.fib_index.to_string(),
            m.influence.to_string(),
            opt_to_string(&m.popularity),
            opt_to_string(&m.bot_score),
            m.n_misinfo_posts.to_string(),
        ])?;
    }
    wtr.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    /// Tries every f from 0..=n.
    fn fib_brute(counts: &[u64]) -> u64 {
        (0..=counts.len() as u64)
            .filter(|&f| counts.iter().filter(|&&c| c >= f).count() as u64 >= f)
            .max()
            .unwrap()
    }

    #[test]
    fn hundred_posts_of_hundred() {
        assert_eq!(fib_index(&[100; 100]), 100);
    }

    #[test]
    fn one_viral_post_has_fib_one() {
        assert_eq!(fib_index(&[10_000]), 1);
    }

    #[test]
    fn brute_force_fixture() {
        assert_eq!(fib_brute(&[5, 4, 3, 1, 1]), 3);
        assert_eq!(fib_index(&[5, 4, 3, 1, 1]), 3);
        assert_eq!(fib_index(&[]), 0);
        assert_eq!(fib_index(&[0, 0, 0]), 0);
    }

    proptest! {
        #[test]
        fn fib_matches_brute(counts in prop::collection::vec(0u64..60, 0..60)) {
            prop_assert_eq!(fib_index(&counts), fib_brute(&counts));
        }

        #[test]
        fn fib_constant_list(c in 0u64..300, n in 0usize..300) {
            prop_assert_eq!(fib_index(&vec![c; n]), c.min(n as u64));
        }

        #[test]
        fn fib_monotone_and_permutation_invariant(
            counts in prop::collection::vec(0u64..50, 0..50),
            extra in 0u64..100,
            seed in any::<u64>(),
        ) {
            let f = fib_index(&counts);
            let mut more = counts.clone();
            more.push(extra);
            prop_assert!(fib_index(&more) >= f);
            if !counts.is_empty() {
                let mut bumped = counts.clone();
                let i = (seed as usize) % counts.len();
                bumped[i] += 1;
                prop_assert!(fib_index(&bumped) >= f);
            }
            let mut shuffled = counts.clone();
            rand::seq::SliceRandom::shuffle(&mut shuffled[..], &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(fib_index(&shuffled), f);
            prop_assert!(f <= counts.len() as u64);
            prop_assert!(f <= counts.iter().copied().max().unwrap_or(0));
            if f >= 1 {
                prop_assert!(counts.iter().sum::<u64>() >= f * f);
            }
        }
    }

    fn tweet(followers: Option<u64>, bot: Option<f64>) -> TweetRecord {
        TweetRecord {
            tweet_id: "t".into(),
            author_id: "a".into(),
            timestamp: 1,
            retweet_of: None,
            urls: vec![],
            follower_count: followers,
            bot_score: bot,
            toxicity: None,
            text_lang: None,
            text: None,
        }
    }

    #[test]
    fn popularity_means() {
        let t = [tweet(Some(100), None), tweet(Some(200), None), tweet(None, None)];
        assert_eq!(popularity::<f64, _>(&t), Some(150.0));
        assert_eq!(popularity::<f64, _>(&[tweet(Some(7), None)]), Some(7.0));
        assert_eq!(popularity::<f64, _>(&[tweet(None, None)]), None);
    }

    #[test]
    fn popularity_matches_exact_integer_mean() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(1..400);
            let snaps: Vec<u64> = (0..n).map(|_| rng.gen_range(0..50_000_000u64)).collect();
            let tweets: Vec<_> = snaps.iter().map(|&s| tweet(Some(s), None)).collect();
            // u128 sum is exact; a single rounding happens in the division.
            let exact = snaps.iter().map(|&s| s as u128).sum::<u128>() as f64 / n as f64;
            let got: f64 = popularity(&tweets).unwrap();
            assert!(((got - exact) / exact.max(1.0)).abs() < 1e-9, "{got} vs {exact}");
        }
    }

    #[test]
    fn bot_score_means() {
        let t = [tweet(None, Some(0.2)), tweet(None, Some(0.4))];
        assert!((bot_score::<f64, _>(&t).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(bot_score::<f32, _>(&[tweet(None, None)]), None);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let t: Vec<_> = (0..rng.gen_range(1..20)).map(|_| tweet(None, Some(rng.gen::<f64>()))).collect();
            let b: f64 = bot_score(&t).unwrap();
            assert!((0.0..=1.0).contains(&b));
        }
    }

    fn m(id: &str, fib: u64, infl: u64) -> AccountMetrics<f64> {
        AccountMetrics { account_id: id.into(), fib_index: fib, influence: infl, popularity: None, bot_score: None, n_misinfo_posts: fib }
    }

    #[test]
    fn ranking_orders_and_breaks_ties() {
        let r = rank_accounts(&[m("a", 3, 0), m("b", 5, 0)], MetricName::Fib);
        assert_eq!(r.ordered_accounts, vec!["b", "a"]);
        let r = rank_accounts(&[m("b", 3, 2), m("a", 3, 10)], MetricName::Fib);
        assert_eq!(r.ordered_accounts, vec!["a", "b"]);
        let r = rank_accounts(&[m("b", 3, 2), m("a", 3, 2)], MetricName::Fib);
        assert_eq!(r.ordered_accounts, vec!["a", "b"]);
        assert!(rank_accounts::<f64>(&[], MetricName::Influence).is_empty());
    }

    #[test]
    fn missing_values_are_excluded() {
        let mut a = m("a", 1, 1);
        a.popularity = Some(10.0);
        let r = rank_accounts(&[a, m("b", 2, 2)], MetricName::Popularity);
        assert_eq!(r.ordered_accounts, vec!["a"]);
        assert_eq!(r.excluded, 1);
    }

    #[test]
    fn ranking_agrees_with_full_sort_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let ms: Vec<AccountMetrics<f64>> = (0..1000)
            .map(|i| {
                let mut a = m(&format!("u{i:04}"), rng.gen_range(0..8), rng.gen_range(0..30));
                a.popularity = rng.gen_bool(0.9).then(|| rng.gen_range(0..20) as f64);
                a
            })
            .collect();
        for by in MetricName::PREDICTIVE {
            let r = rank_accounts(&ms, by);
            // Oracle: sort keyed tuples (negated metric, negated influence, id).
            let mut keys: Vec<(i64, i64, String)> = ms
                .iter()
                .filter_map(|a| {
                    let v = a.value(by)?;
                    Some((-(v as i64), -(a.influence as i64), a.account_id.clone()))
                })
                .collect();
            keys.sort();
            let oracle: Vec<String> = keys.into_iter().map(|k| k.2).collect();
            if by == MetricName::BotScore {
                assert!(r.is_empty());
                assert_eq!(r.excluded, 1000);
            } else {
                assert_eq!(r.ordered_accounts, oracle, "{by}");
            }
            assert!(r.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn metric_names_round_trip() {
        for name in [MetricName::Fib, MetricName::Influence, MetricName::Popularity, MetricName::BotScore, MetricName::Optimal] {
            assert_eq!(name.as_str().parse::<MetricName>().unwrap(), name);
        }
        assert!("pagerank".parse::<MetricName>().is_err());
    }

    #[test]
    fn metrics_csv_layout() {
        let mut a = m("b", 1, 4);
        a.popularity = Some(2.5);
        let mut buf = Vec::new();
        write_metrics_csv(&[a, m("a", 0, 0)], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "account_id,fib_index,influence,popularity,bot_score,n_misinfo_posts\na,0,0,,,0\nb,1,4,2.5,,1\n"
        );
    }
}
