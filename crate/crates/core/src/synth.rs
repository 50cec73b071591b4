//! Seeded synthetic corpora with planted superspreaders and ground truth.
//!
//! Ordinary accounts post low-credibility links with power-law activity and
//! power-law retweet counts. Planted superspreaders post consistently and
//! earn many retweets per post in both periods. Planted residual accounts
//! post low-credibility content only in the evaluation period, so their
//! share of evaluation retweets is the floor no observation-period ranking
//! can remove. Generation is single-threaded and fully determined by the
//! config.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Poisson, Zipf};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{create_text, DomainList, Interval, PeriodSplit, RetweetRef, TweetRecord};

const DAY: i64 = 86_400;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub seed: u64,
    /// Ordinary accounts, planted superspreaders included.
    pub n_accounts: usize,
    pub n_superspreaders: usize,
    /// Accounts with one or two heavily retweeted posts per period.
    pub n_viral_accounts: usize,
    /// Accounts posting low-credibility content only in the evaluation period.
    pub n_residual_accounts: usize,
    /// Power-law exponent of low-credibility posts per ordinary account.
    pub activity_exponent: f64,
    /// Power-law exponent of retweets per ordinary post.
    pub retweet_exponent: f64,
    /// Fraction of ordinary accounts that ever post low-credibility links.
    pub poster_fraction: f64,
    pub lowcred_domain_count: usize,
    pub credible_domain_count: usize,
    /// Target share of evaluation retweets originated by residual accounts.
    pub planted_residual: f64,
    pub superspreader_posts_per_day: f64,
    pub superspreader_mean_retweets: f64,
    pub viral_mean_retweets: f64,
    /// Fraction of records placed before the observation period.
    pub straggler_fraction: f64,
    /// Probability that a retweet event is a self-retweet.
    pub self_retweet_rate: f64,
    /// Epoch seconds at which the observation period starts.
    pub start: i64,
    pub observation_days: u32,
    pub evaluation_days: u32,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            n_accounts: 1000,
            n_superspreaders: 10,
            n_viral_accounts: 5,
            n_residual_accounts: 40,
            activity_exponent: 2.5,
            retweet_exponent: 2.5,
            poster_fraction: 0.3,
            lowcred_domain_count: 40,
            credible_domain_count: 60,
            planted_residual: 0.13,
            superspreader_posts_per_day: 0.25,
            superspreader_mean_retweets: 40.0,
            viral_mean_retweets: 120.0,
            straggler_fraction: 0.01,
            self_retweet_rate: 0.005,
            start: 1_577_836_800,
            observation_days: 60,
            evaluation_days: 240,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid generator config: {0}")]
pub struct ConfigError(pub String);

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: &str| Err(ConfigError(m.to_string()));
        if self.n_accounts < 2 {
            return fail("n_accounts must be at least 2");
        }
        if self.n_superspreaders + self.n_viral_accounts > self.n_accounts {
            return fail("superspreaders and viral accounts exceed n_accounts");
        }
        if !(0.0..1.0).contains(&self.planted_residual) {
            return fail("planted_residual must lie in [0, 1)");
        }
        if self.planted_residual > 0.0 && self.n_residual_accounts == 0 {
            return fail("planted_residual > 0 needs residual accounts");
        }
        if self.activity_exponent <= 1.0 || self.retweet_exponent <= 1.0 {
            return fail("power-law exponents must exceed 1");
        }
        if self.lowcred_domain_count == 0 || self.credible_domain_count == 0 {
            return fail("domain counts must be positive");
        }
        if self.observation_days == 0 || self.evaluation_days == 0 {
            return fail("period lengths must be positive");
        }
        if self.start <= (self.observation_days as i64).max(30) * DAY {
            return fail("start too early for straggler records");
        }
        for (name, v) in [
            ("poster_fraction", self.poster_fraction),
            ("straggler_fraction", self.straggler_fraction),
            ("self_retweet_rate", self.self_retweet_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ConfigError(format!("{name} must lie in [0, 1]")));
            }
        }
        if self.superspreader_posts_per_day < 0.0 || self.superspreader_mean_retweets < 0.0 || self.viral_mean_retweets < 0.0 {
            return fail("rates must be non-negative");
        }
        Ok(())
    }

    pub fn split(&self) -> PeriodSplit {
        let obs_end = self.start + self.observation_days as i64 * DAY;
        PeriodSplit {
            observation: Interval::new(self.start, obs_end),
            evaluation: Interval::new(obs_end, obs_end + self.evaluation_days as i64 * DAY),
        }
    }
}

/// Ground truth for one period.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PeriodTruth {
    pub records: usize,
    /// `(poster, retweeter, weight)` in lexicographic order.
    pub edges: Vec<(String, String, u64)>,
    /// Per-post retweet counts (descending) for every low-credibility poster.
    pub fib_inputs: BTreeMap<String, Vec<u64>>,
    pub influence: BTreeMap<String, u64>,
    pub total_weight: u64,
    pub self_retweets: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub config: GeneratorConfig,
    pub split: PeriodSplit,
    pub superspreaders: Vec<String>,
    pub viral_accounts: Vec<String>,
    pub residual_accounts: Vec<String>,
    pub observation: PeriodTruth,
    pub evaluation: PeriodTruth,
    /// Evaluation-period share of every low-credibility poster.
    pub shares: BTreeMap<String, f64>,
    /// Realized share of evaluation retweets by accounts without
    /// observation-period low-credibility posts.
    pub residual_fraction: f64,
    pub dropped_records: usize,
    pub total_records: usize,
    pub lowcred_domains: Vec<String>,
}

pub struct SynthCorpus {
    /// Sorted by `(timestamp, tweet_id)`.
    pub records: Vec<TweetRecord>,
    pub truth: GroundTruth,
    pub domains: DomainList,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Ordinary,
    Superspreader,
    Viral,
    Residual,
}

struct Account {
    id: String,
    role: Role,
    /// Low-credibility posts per 60 days.
    activity: f64,
    /// Multiplier on retweets per post.
    strength: f64,
    followers: f64,
    bot: f64,
    english: bool,
    /// Probability that a non-low-credibility original carries a link.
    credible_link_rate: f64,
}

struct Gen {
    rng: ChaCha8Rng,
    next_id: u64,
    records: Vec<TweetRecord>,
    lowcred: Vec<String>,
    credible: Vec<String>,
}

impl Gen {
    fn tweet_id(&mut self) -> String {
        self.next_id += 1;
        format!("t{:09}", self.next_id)
    }

    fn url(&mut self, domain: &str) -> String {
        let n: u32 = self.rng.gen_range(1..100_000);
        match self.rng.gen_range(0..4) {
            0 => format!("https://www.{domain}/article/{n}"),
            1 => format!("http://{}/story?id={n}", domain.to_uppercase()),
            2 => format!("https://news.{domain}/{n}"),
            _ => format!("https://{domain}/p/{n}"),
        }
    }

    fn lowcred_url(&mut self) -> String {
        let d = self.lowcred.choose(&mut self.rng).expect("nonempty").clone();
        self.url(&d)
    }

    fn credible_url(&mut self) -> String {
        let d = self.credible.choose(&mut self.rng).expect("nonempty").clone();
        self.url(&d)
    }

    fn snapshot(&mut self, a: &Account) -> TweetRecord {
        let followers = (a.followers * self.rng.gen_range(0.95..1.05)).round() as u64;
        let bot = self.rng.gen_bool(0.95).then(|| (a.bot + self.rng.gen_range(-0.05..0.05)).clamp(0.0, 1.0));
        TweetRecord {
            tweet_id: String::new(),
            author_id: a.id.clone(),
            timestamp: 0,
            retweet_of: None,
            urls: vec![],
            follower_count: Some(followers),
            bot_score: bot.map(round4),
            toxicity: None,
            text_lang: Some(if a.english { "en" } else { "es" }.to_string()),
            text: None,
        }
    }

    fn original(&mut self, a: &Account, ts: i64, urls: Vec<String>) -> TweetRecord {
        let mut r = self.snapshot(a);
        r.tweet_id = self.tweet_id();
        r.timestamp = ts;
        r.urls = urls;
        if a.english && self.rng.gen_bool(0.9) {
            let base: f64 = if a.role == Role::Superspreader { 0.25 } else { 0.15 };
            r.toxicity = Some(round4((base + self.rng.gen_range(-0.12..0.3)).clamp(0.0, 1.0)));
        }
        r
    }

    fn retweet(&mut self, by: &Account, of: &TweetRecord, ts: i64) -> TweetRecord {
        let mut r = self.snapshot(by);
        r.tweet_id = self.tweet_id();
        r.timestamp = ts;
        r.retweet_of = Some(RetweetRef { tweet_id: of.tweet_id.clone(), author_id: of.author_id.clone() });
        r.urls = of.urls.clone();
        r.text_lang = of.text_lang.clone();
        r
    }
}

fn round4(v: f64) -> f64 {
    (v * 10_000.0).round() / 10_000.0
}

struct PeriodAccumulator {
    edges: BTreeMap<(String, String), u64>,
    posts: BTreeMap<String, Vec<u64>>,
    records: usize,
    self_retweets: u64,
}

impl PeriodAccumulator {
    fn new() -> Self {
        Self { edges: BTreeMap::new(), posts: BTreeMap::new(), records: 0, self_retweets: 0 }
    }

    fn finish(self) -> PeriodTruth {
        let mut influence: BTreeMap<String, u64> = self.posts.keys().map(|a| (a.clone(), 0)).collect();
        for ((p, _), w) in &self.edges {
            *influence.entry(p.clone()).or_insert(0) += w;
        }
        let fib_inputs = self
            .posts
            .into_iter()
            .map(|(a, mut v)| {
                v.sort_unstable_by(|x, y| y.cmp(x));
                (a, v)
            })
            .collect();
        PeriodTruth {
            records: self.records,
            total_weight: self.edges.values().sum(),
            edges: self.edges.into_iter().map(|((p, r), w)| (p, r, w)).collect(),
            fib_inputs,
            influence,
            self_retweets: self.self_retweets,
        }
    }
}

/// Generates a corpus and its ground truth.
pub fn generate(config: &GeneratorConfig) -> Result<SynthCorpus, ConfigError> {
    config.validate()?;
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        next_id: 0,
        records: Vec::new(),
        lowcred: (0..config.lowcred_domain_count)
            .map(|i| if i % 5 == 4 { format!("lowcred{i}.co.uk") } else { format!("lowcred{i}.com") })
            .collect(),
        credible: (0..config.credible_domain_count).map(|i| format!("reliable{i}.org")).collect(),
    };
    let rng = &mut g.rng;

    let activity = Zipf::new(10_000, config.activity_exponent).map_err(|e| ConfigError(e.to_string()))?;
    let retweets = Zipf::new(10_000, config.retweet_exponent).map_err(|e| ConfigError(e.to_string()))?;
    let followers = LogNormal::new(6.0, 1.8).expect("valid lognormal");

    // Roles are assigned to a shuffled slice of account indices.
    let mut roles = vec![Role::Ordinary; config.n_accounts];
    let mut idx: Vec<usize> = (0..config.n_accounts).collect();
    idx.shuffle(rng);
    for &i in &idx[..config.n_superspreaders] {
        roles[i] = Role::Superspreader;
    }
    for &i in &idx[config.n_superspreaders..config.n_superspreaders + config.n_viral_accounts] {
        roles[i] = Role::Viral;
    }
    roles.extend(std::iter::repeat(Role::Residual).take(config.n_residual_accounts));

    let width = (roles.len().max(2) - 1).to_string().len();
    let accounts: Vec<Account> = roles
        .iter()
        .enumerate()
        .map(|(i, &role)| {
            let poster = match role {
                Role::Ordinary => rng.gen_bool(config.poster_fraction),
                _ => true,
            };
            let (activity, strength) = match role {
                Role::Ordinary if poster => (activity.sample(rng), 1.0),
                Role::Ordinary => (0.0, 1.0),
                Role::Superspreader => (config.superspreader_posts_per_day * 60.0, rng.gen_range(0.6..1.8)),
                Role::Viral => (rng.gen_range(1.0..2.5), rng.gen_range(0.7..1.3)),
                Role::Residual => (0.0, 1.0),
            };
            let mut f: f64 = followers.sample(rng);
            if role == Role::Superspreader {
                f *= rng.gen_range(1.0..20.0);
            }
            Account {
                id: format!("u{i:0width$}"),
                role,
                activity,
                strength,
                followers: f.min(5e7),
                bot: rng.gen_range(0.0..0.6f64).powi(2) + if rng.gen_bool(0.05) { 0.5 } else { 0.0 },
                english: rng.gen_bool(0.9),
                credible_link_rate: match role {
                    Role::Superspreader => rng.gen_range(0.2..0.9),
                    _ => rng.gen_range(0.1..0.8),
                },
            }
        })
        .collect();

    let split = config.split();
    let mut obs = PeriodAccumulator::new();
    let mut eval = PeriodAccumulator::new();
    let mut residual_posts = Vec::new();

    for (period, interval, days) in [
        (0usize, split.observation, config.observation_days),
        (1, split.evaluation, config.evaluation_days),
    ] {
        let scale = f64::from(days) / 60.0;
        for ai in 0..accounts.len() {
            let a = &accounts[ai];
            if a.role == Role::Residual {
                continue;
            }
            let n_posts = match a.role {
                Role::Superspreader | Role::Viral => {
                    let lambda = a.activity * scale;
                    if lambda > 0.0 {
                        Poisson::new(lambda).expect("positive rate").sample(&mut g.rng) as u64
                    } else {
                        0
                    }
                }
                _ => (a.activity * scale * g.rng.gen_range(0.5..1.5)).round() as u64,
            };
            // Only accounts already active in the observation period post
            // low-credibility content later; everyone else is residual.
            let n_posts = if period == 1 && !obs.posts.contains_key(&a.id) { 0 } else { n_posts };
            for _ in 0..n_posts {
                let rt_count = match a.role {
                    Role::Superspreader => {
                        (config.superspreader_mean_retweets * a.strength * g.rng.gen_range(0.5..1.5)).round() as u64
                    }
                    Role::Viral => (config.viral_mean_retweets * a.strength * g.rng.gen_range(0.3..1.7)).round() as u64,
                    _ => retweets.sample(&mut g.rng) as u64 - 1,
                };
                emit_post(&mut g, &accounts, ai, interval, rt_count, config, if period == 0 { &mut obs } else { &mut eval });
            }
            // Background: credible originals and a few retweets of them.
            let n_background = g.rng.gen_range(0..4) * days.div_ceil(60) as usize;
            for _ in 0..n_background {
                let ts = g.rng.gen_range(interval.start..interval.end);
                let urls = if g.rng.gen_bool(a.credible_link_rate) { vec![g.credible_url()] } else { vec![] };
                let rec = g.original(a, ts, urls);
                let n_rt = g.rng.gen_range(0..3);
                for _ in 0..n_rt {
                    let by = g.rng.gen_range(0..accounts.len());
                    let rts = g.rng.gen_range(ts..interval.end);
                    let rt = g.retweet(&accounts[by], &rec, rts);
                    g.records.push(rt);
                }
                g.records.push(rec);
                if period == 0 { obs.records += 1 + n_rt } else { eval.records += 1 + n_rt }
            }
        }
        if period == 1 {
            // Plant the residual mass on evaluation-only posters.
            let covered: u64 = eval.edges.values().sum();
            let target = if config.planted_residual > 0.0 {
                (config.planted_residual / (1.0 - config.planted_residual) * covered as f64).round() as u64
            } else {
                0
            };
            let residual_ids: Vec<usize> = (0..accounts.len()).filter(|&i| accounts[i].role == Role::Residual).collect();
            if !residual_ids.is_empty() {
                let weights: Vec<f64> = residual_ids.iter().map(|_| g.rng.gen_range(0.2..1.0f64).powi(3)).collect();
                let wsum: f64 = weights.iter().sum();
                let mut left = target;
                for (k, &ai) in residual_ids.iter().enumerate() {
                    let share = if k + 1 == residual_ids.len() { left } else { ((target as f64) * weights[k] / wsum).floor() as u64 };
                    let share = share.min(left);
                    left -= share;
                    // Split each account's share over 1..=4 posts.
                    let n = g.rng.gen_range(1..=4u64);
                    for p in 0..n {
                        let c = share / n + u64::from(p < share % n);
                        residual_posts.push((ai, c));
                    }
                }
            }
            for &(ai, c) in &residual_posts {
                emit_post_exact(&mut g, &accounts, ai, interval, c, &mut eval);
            }
        }
    }

    // Stragglers before the observation period.
    let n_straggle = ((g.records.len() as f64) * config.straggler_fraction).round() as usize;
    for _ in 0..n_straggle {
        let ai = g.rng.gen_range(0..accounts.len());
        let ts = split.observation.start - g.rng.gen_range(1..30 * DAY);
        let url = g.credible_url();
        let rec = g.original(&accounts[ai], ts, vec![url]);
        g.records.push(rec);
    }

    let mut records = std::mem::take(&mut g.records);
    records.sort_by(|a, b| (a.timestamp, &a.tweet_id).cmp(&(b.timestamp, &b.tweet_id)));

    let observation = obs.finish();
    let evaluation = eval.finish();
    let total = evaluation.total_weight;
    let shares: BTreeMap<String, f64> =
        evaluation.influence.iter().map(|(a, &w)| (a.clone(), w as f64 / total.max(1) as f64)).collect();
    let obs_posters: BTreeSet<&String> = observation.fib_inputs.keys().collect();
    let residual_weight: u64 =
        evaluation.influence.iter().filter(|(a, _)| !obs_posters.contains(a)).map(|(_, &w)| w).sum();

    let ids_with = |role: Role| accounts.iter().filter(|a| a.role == role).map(|a| a.id.clone()).collect::<Vec<_>>();
    let mut domains = DomainList::new("synthetic low-credibility list");
    for d in &g.lowcred {
        domains.insert(d).expect("generated domains are valid");
    }
    let truth = GroundTruth {
        config: config.clone(),
        split,
        superspreaders: ids_with(Role::Superspreader),
        viral_accounts: ids_with(Role::Viral),
        residual_accounts: ids_with(Role::Residual),
        residual_fraction: if total == 0 { 0.0 } else { residual_weight as f64 / total as f64 },
        observation,
        evaluation,
        shares,
        dropped_records: n_straggle,
        total_records: records.len(),
        lowcred_domains: domains.iter().map(str::to_string).collect(),
    };
    Ok(SynthCorpus { records, truth, domains })
}

fn pick_retweeter(g: &mut Gen, n: usize, author: usize, self_rate: f64) -> usize {
    if g.rng.gen_bool(self_rate) {
        return author;
    }
    loop {
        let r = g.rng.gen_range(0..n);
        if r != author {
            return r;
        }
    }
}

/// One low-credibility original with `rt_count` retweets by others (plus
/// occasional self-retweets, which are recorded but excluded from truth).
fn emit_post(g: &mut Gen, accounts: &[Account], ai: usize, interval: Interval, rt_count: u64, config: &GeneratorConfig, acc: &mut PeriodAccumulator) {
    let ts = g.rng.gen_range(interval.start..interval.end);
    let mut urls = vec![g.lowcred_url()];
    if g.rng.gen_bool(0.2) {
        urls.push(g.credible_url());
    }
    urls.shuffle(&mut g.rng);
    let post = g.original(&accounts[ai], ts, urls);
    let author = accounts[ai].id.clone();
    let mut earned = 0u64;
    let mut emitted = 1;
    while earned < rt_count {
        let by = pick_retweeter(g, accounts.len(), ai, config.self_retweet_rate);
        let rts = g.rng.gen_range(ts..interval.end);
        let rt = g.retweet(&accounts[by], &post, rts);
        g.records.push(rt);
        emitted += 1;
        if by == ai {
            acc.self_retweets += 1;
        } else {
            earned += 1;
            *acc.edges.entry((author.clone(), accounts[by].id.clone())).or_insert(0) += 1;
        }
    }
    acc.posts.entry(author).or_default().push(rt_count);
    acc.records += emitted;
    g.records.push(post);
}

fn emit_post_exact(g: &mut Gen, accounts: &[Account], ai: usize, interval: Interval, rt_count: u64, acc: &mut PeriodAccumulator) {
    let ts = g.rng.gen_range(interval.start..interval.end);
    let url = g.lowcred_url();
    let post = g.original(&accounts[ai], ts, vec![url]);
    let author = accounts[ai].id.clone();
    for _ in 0..rt_count {
        let by = pick_retweeter(g, accounts.len(), ai, 0.0);
        let rts = g.rng.gen_range(ts..interval.end);
        let rt = g.retweet(&accounts[by], &post, rts);
        g.records.push(rt);
        *acc.edges.entry((author.clone(), accounts[by].id.clone())).or_insert(0) += 1;
    }
    acc.posts.entry(author).or_default().push(rt_count);
    acc.records += 1 + rt_count as usize;
    g.records.push(post);
}

impl SynthCorpus {
    /// Writes `corpus.jsonl` (or `.jsonl.gz` when `gzip`), `ground_truth.json`
    /// and `domains.txt` into `dir`.
    pub fn write_to(&self, dir: &Path, gzip: bool) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let name = if gzip { "corpus.jsonl.gz" } else { "corpus.jsonl" };
        let mut w = create_text(&dir.join(name)).map_err(std::io::Error::other)?;
        for r in &self.records {
            writeln!(w, "{}", r.to_json_line())?;
        }
        w.flush()?;
        drop(w);
        fs::write(dir.join("ground_truth.json"), serde_json::to_string_pretty(&self.truth)? + "\n")?;
        fs::write(dir.join("domains.txt"), self.domains.to_text())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GeneratorConfig {
        GeneratorConfig { n_accounts: 120, n_residual_accounts: 8, evaluation_days: 120, ..Default::default() }
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        let lines = |c: &SynthCorpus| c.records.iter().map(TweetRecord::to_json_line).collect::<Vec<_>>();
        assert_eq!(lines(&a), lines(&b));
        assert_eq!(serde_json::to_string(&a.truth).unwrap(), serde_json::to_string(&b.truth).unwrap());
        let c = generate(&GeneratorConfig { seed: 2, ..small() }).unwrap();
        assert_ne!(lines(&a), lines(&c));
    }

    #[test]
    fn no_superspreaders() {
        let c = generate(&GeneratorConfig { n_superspreaders: 0, ..small() }).unwrap();
        assert!(c.truth.superspreaders.is_empty());
    }

    #[test]
    fn infeasible_configs() {
        assert!(generate(&GeneratorConfig { planted_residual: 1.0, ..small() }).is_err());
        assert!(generate(&GeneratorConfig { planted_residual: 0.1, n_residual_accounts: 0, ..small() }).is_err());
        assert!(generate(&GeneratorConfig { n_superspreaders: 200, ..small() }).is_err());
        assert!(generate(&GeneratorConfig { activity_exponent: 1.0, ..small() }).is_err());
    }

    #[test]
    fn records_validate_and_periods_count() {
        let c = generate(&small()).unwrap();
        let split = c.truth.split;
        let (mut o, mut e, mut d) = (0, 0, 0);
        for r in &c.records {
            r.validate().unwrap();
            match split.assign(r.timestamp) {
                Some(crate::ingest::Period::Observation) => o += 1,
                Some(crate::ingest::Period::Evaluation) => e += 1,
                None => d += 1,
            }
        }
        assert_eq!((o, e, d), (c.truth.observation.records, c.truth.evaluation.records, c.truth.dropped_records));
        assert_eq!(o + e + d, c.truth.total_records);
    }

    #[test]
    fn residual_is_planted() {
        let c = generate(&GeneratorConfig::default()).unwrap();
        assert!((c.truth.residual_fraction - 0.13).abs() < 0.02, "{}", c.truth.residual_fraction);
        let sum: f64 = c.truth.shares.values().sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }
}
