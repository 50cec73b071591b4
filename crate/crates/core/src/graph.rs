//! Weighted directed retweet network of low-credibility content.
//!
//! Edge `(i, j)` carries the number of times `j` retweeted any of `i`'s
//! low-credibility posts. Per-post retweet counts are kept alongside the
//! edges so that FIB-index inputs and out-strength come from the same pass.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{self, Write};

use rayon::prelude::*;

use crate::ingest::LabeledRecord;

/// Low-credibility label of original posts keyed by tweet id.
#[derive(Debug, Clone, Default)]
pub struct OriginalLabels(HashMap<String, bool>);

impl OriginalLabels {
    pub fn from_records<'a, I: IntoIterator<Item = &'a LabeledRecord>>(records: I) -> Self {
        Self(
            records
                .into_iter()
                .filter(|r| r.record.is_original())
                .map(|r| (r.record.tweet_id.clone(), r.low_credibility))
                .collect(),
        )
    }

    pub fn get(&self, tweet_id: &str) -> Option<bool> {
        self.0.get(tweet_id).copied()
    }
}

/// Retweets earned by one low-credibility original post.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostCount {
    pub author_id: String,
    pub retweets: u64,
}

/// Accumulates a network; shards built independently combine with
/// [`NetworkBuilder::merge`].
#[derive(Debug, Clone, Default)]
pub struct NetworkBuilder {
    retweeters: BTreeSet<String>,
    edges: BTreeMap<(String, String), u64>,
    posters: BTreeSet<String>,
    posts: BTreeMap<(String, String), PostCount>,
    self_retweets: u64,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one labeled record. A retweet counts when the original post is
    /// known to be low-credibility from `originals`; if the original is not
    /// in `originals` the retweet's own label stands in for it.
    pub fn add(&mut self, rec: &LabeledRecord, originals: &OriginalLabels) {
        let r = &rec.record;
        match &r.retweet_of {
            None => {
                if rec.low_credibility {
                    self.posters.insert(r.author_id.clone());
                    self.posts
                        .entry((r.author_id.clone(), r.tweet_id.clone()))
                        .or_insert_with(|| PostCount { author_id: r.author_id.clone(), retweets: 0 });
                }
            }
            Some(orig) => {
                if !originals.get(&orig.tweet_id).unwrap_or(rec.low_credibility) {
                    return;
                }
                if orig.author_id == r.author_id {
                    self.self_retweets += 1;
                    return;
                }
                self.posters.insert(orig.author_id.clone());
                self.retweeters.insert(r.author_id.clone());
                *self.edges.entry((orig.author_id.clone(), r.author_id.clone())).or_insert(0) += 1;
                self.posts
                    .entry((orig.author_id.clone(), orig.tweet_id.clone()))
                    .or_insert_with(|| PostCount { author_id: orig.author_id.clone(), retweets: 0 })
                    .retweets += 1;
            }
        }
    }

    pub fn merge(mut self, other: NetworkBuilder) -> NetworkBuilder {
        self.retweeters.extend(other.retweeters);
        self.posters.extend(other.posters);
        for (k, w) in other.edges {
            *self.edges.entry(k).or_insert(0) += w;
        }
        for (id, pc) in other.posts {
            self.posts
                .entry(id)
                .and_modify(|p| p.retweets += pc.retweets)
                .or_insert(pc);
        }
        self.self_retweets += other.self_retweets;
        self
    }

    pub fn finish(self) -> RetweetNetwork {
        let mut out_strength: BTreeMap<String, u64> = BTreeMap::new();
        for ((poster, _), w) in &self.edges {
            *out_strength.entry(poster.clone()).or_insert(0) += w;
        }
        let total_weight = self.edges.values().sum();
        let mut nodes = self.posters.clone();
        nodes.extend(self.retweeters);
        RetweetNetwork {
            nodes,
            edges: self.edges,
            posters: self.posters,
            posts: self.posts,
            out_strength,
            total_weight,
            self_retweets: self.self_retweets,
        }
    }
}

/// Immutable misinformation retweet network for one period.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RetweetNetwork {
    nodes: BTreeSet<String>,
    edges: BTreeMap<(String, String), u64>,
    posters: BTreeSet<String>,
    posts: BTreeMap<(String, String), PostCount>,
    out_strength: BTreeMap<String, u64>,
    total_weight: u64,
    self_retweets: u64,
}

/// Builds the network of one period, taking original-post labels from the
/// originals present in `records`.
pub fn build_network(records: &[LabeledRecord]) -> RetweetNetwork {
    build_network_with(records, &OriginalLabels::from_records(records))
}

/// Builds the network in parallel shards using externally supplied
/// original-post labels (e.g. indexed over the whole corpus).
pub fn build_network_with(records: &[LabeledRecord], originals: &OriginalLabels) -> RetweetNetwork {
    records
        .par_chunks(4096)
        .map(|chunk| {
            let mut b = NetworkBuilder::new();
            for r in chunk {
                b.add(r, originals);
            }
            b
        })
        .reduce(NetworkBuilder::new, NetworkBuilder::merge)
        .finish()
}

impl RetweetNetwork {
    /// Σ_j w_ij; zero for unknown accounts.
    pub fn out_strength(&self, account: &str) -> u64 {
        self.out_strength.get(account).copied().unwrap_or(0)
    }

    pub fn total_weight(&self) -> u64 {
        self.total_weight
    }

    pub fn weight(&self, poster: &str, retweeter: &str) -> u64 {
        self.edges.get(&(poster.to_string(), retweeter.to_string())).copied().unwrap_or(0)
    }

    /// Edges in lexicographic `(poster, retweeter)` order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, u64)> {
        self.edges.iter().map(|((p, r), w)| (p.as_str(), r.as_str(), *w))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_map(&self) -> &BTreeMap<(String, String), u64> {
        &self.edges
    }

    pub fn posters(&self) -> &BTreeSet<String> {
        &self.posters
    }

    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    /// All accounts, including pure retweeters.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Accounts that originated low-credibility content in the period.
    pub fn poster_count(&self) -> usize {
        self.posters.len()
    }

    pub fn self_retweets(&self) -> u64 {
        self.self_retweets
    }

    /// Out-strength of every account with at least one out-edge.
    pub fn strengths(&self) -> &BTreeMap<String, u64> {
        &self.out_strength
    }

    /// Per-post retweet counts of each poster's low-credibility posts, posts
    /// with zero retweets included. Counts are in tweet-id order.
    /// Posts are keyed by (author, tweet id).
    pub fn post_counts_by_author(&self) -> BTreeMap<String, Vec<u64>> {
        let mut out: BTreeMap<String, Vec<u64>> = BTreeMap::new();
        for pc in self.posts.values() {
            out.entry(pc.author_id.clone()).or_default().push(pc.retweets);
        }
        out
    }

    pub fn post_count(&self, author_id: &str, tweet_id: &str) -> Option<&PostCount> {
        self.posts.get(&(author_id.to_string(), tweet_id.to_string()))
    }

    /// CSV `poster_id,retweeter_id,weight` with a header row.
    pub fn write_edges_csv<W: Write>(&self, w: W) -> io::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["poster_id", "retweeter_id", "weight"])?;
        for (p, r, weight) in self.edges() {
            wtr.write_record([p, r, &weight.to_string()])?;
        }
        wtr.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{RetweetRef, TweetRecord};
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn original(id: &str, author: &str, low: bool) -> LabeledRecord {
        LabeledRecord {
            record: TweetRecord {
                tweet_id: id.into(),
                author_id: author.into(),
                timestamp: 10,
                retweet_of: None,
                urls: vec![],
                follower_count: None,
                bot_score: None,
                toxicity: None,
                text_lang: None,
                text: None,
            },
            low_credibility: low,
        }
    }

    fn retweet(id: &str, by: &str, of: &str, of_author: &str, low: bool) -> LabeledRecord {
        let mut r = original(id, by, low);
        r.record.retweet_of = Some(RetweetRef { tweet_id: of.into(), author_id: of_author.into() });
        r
    }

    #[test]
    fn repeated_retweets_accumulate() {
        let recs = vec![
            original("p", "i", true),
            retweet("r1", "j", "p", "i", true),
            retweet("r2", "j", "p", "i", true),
            retweet("r3", "j", "p", "i", true),
        ];
        let net = build_network(&recs);
        assert_eq!(net.weight("i", "j"), 3);
        assert_eq!(net.total_weight(), 3);
        assert_eq!(net.post_count("i", "p").unwrap().retweets, 3);
    }

    #[test]
    fn credible_original_gives_no_edge() {
        // Original label wins over the retweet's own label.
        let recs = vec![original("p", "i", false), retweet("r1", "j", "p", "i", true)];
        let net = build_network(&recs);
        assert_eq!(net.edge_count(), 0);
        assert!(net.posters().is_empty());
    }

    #[test]
    fn out_of_period_original_falls_back_to_retweet_label() {
        let net = build_network(&[retweet("r1", "j", "old", "i", true)]);
        assert_eq!(net.weight("i", "j"), 1);
        assert!(net.posters().contains("i"));
    }

    #[test]
    fn zero_retweet_post_registers_poster_and_self_retweets_are_skipped() {
        let recs = vec![original("p", "i", true), retweet("r", "i", "p", "i", true)];
        let net = build_network(&recs);
        assert!(net.posters().contains("i"));
        assert_eq!(net.total_weight(), 0);
        assert_eq!(net.self_retweets(), 1);
        assert_eq!(net.post_counts_by_author()["i"], vec![0]);
    }

    #[test]
    fn out_strength_sums_and_absent_is_zero() {
        let recs = vec![
            retweet("1", "a", "p", "i", true),
            retweet("2", "a", "p", "i", true),
            retweet("3", "b", "q", "i", true),
        ];
        let net = build_network(&recs);
        assert_eq!(net.out_strength("i"), 3);
        assert_eq!(net.out_strength("nobody"), 0);
        assert_eq!(net.node_count(), 3);
        assert_eq!(net.poster_count(), 1);
    }

    #[test]
    fn csv_export_is_sorted_with_header() {
        let recs = vec![
            retweet("1", "z", "p", "b", true),
            retweet("2", "a", "p", "b", true),
            retweet("3", "c", "q", "a", true),
        ];
        let mut buf = Vec::new();
        build_network(&recs).write_edges_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "poster_id,retweeter_id,weight\na,c,1\nb,a,1\nb,z,1\n"
        );
    }

    fn arb_records() -> impl Strategy<Value = Vec<LabeledRecord>> {
        prop::collection::vec((0u8..6, 0u8..8, 0u8..6, any::<bool>()), 0..120).prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (post, by, author, low))| {
                    retweet(&format!("r{i}"), &format!("u{by}"), &format!("p{post}"), &format!("u{author}"), low)
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn strength_matches_edge_scan(recs in arb_records()) {
            let net = build_network(&recs);
            let mut brute: BTreeMap<&str, u64> = BTreeMap::new();
            for (p, _, w) in net.edges() {
                *brute.entry(p).or_insert(0) += w;
            }
            for n in net.nodes() {
                prop_assert_eq!(net.out_strength(n), brute.get(n.as_str()).copied().unwrap_or(0));
            }
            let sum: u64 = net.nodes().iter().map(|n| net.out_strength(n)).sum();
            prop_assert_eq!(sum, net.total_weight());
            for (p, r, w) in net.edges() {
                prop_assert!(w >= 1 && p != r && net.posters().contains(p));
            }
        }

        #[test]
        fn order_independent(recs in arb_records(), seed in any::<u64>()) {
            let mut shuffled = recs.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(build_network(&recs), build_network(&shuffled));
        }
    }
}
