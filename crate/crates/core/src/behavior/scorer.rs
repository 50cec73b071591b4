//! Toxicity scoring backends.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::ingest::TweetRecord;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("scorer request failed for tweet {tweet_id}: {reason}")]
    Request { tweet_id: String, reason: String },
    #[error("tweet {0} has no text to score")]
    MissingText(String),
    #[error("score cache {}: {source}", path.display())]
    Cache {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("score cache {}, line {line}: bad entry", path.display())]
    CacheFormat { path: PathBuf, line: usize },
}

/// Produces a toxicity probability in [0, 1] for a tweet, or `None` when
/// the tweet cannot be scored.
pub trait ToxicityScorer: Send + Sync {
    fn score(&self, record: &TweetRecord) -> Result<Option<f64>, ScoreError>;
}

/// Uses the `toxicity` field already present on the record.
#[derive(Debug, Clone, Copy, Default)]
pub struct RecordScorer;

impl ToxicityScorer for RecordScorer {
    fn score(&self, record: &TweetRecord) -> Result<Option<f64>, ScoreError> {
        Ok(record.toxicity)
    }
}

/// Deterministic pseudo-score derived from the tweet id (FNV-1a), for
/// offline runs and tests.
#[derive(Debug, Clone, Copy, Default)]
pub struct OfflineStubScorer {
    pub salt: u64,
}

impl ToxicityScorer for OfflineStubScorer {
    fn score(&self, record: &TweetRecord) -> Result<Option<f64>, ScoreError> {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ self.salt;
        for b in record.tweet_id.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        Ok(Some((h >> 11) as f64 / (1u64 << 53) as f64))
    }
}

/// Wraps a scorer with a tweet-id keyed cache persisted as TSV
/// (`tweet_id<TAB>score`, empty score for unscorable tweets).
pub struct CachedScorer<S> {
    inner: S,
    path: PathBuf,
    cache: Mutex<BTreeMap<String, Option<f64>>>,
}

impl<S: ToxicityScorer> CachedScorer<S> {
    pub fn open(inner: S, path: impl Into<PathBuf>) -> Result<Self, ScoreError> {
        let path = path.into();
        let mut cache = BTreeMap::new();
        if path.exists() {
            let text = fs::read_to_string(&path).map_err(|source| ScoreError::Cache { path: path.clone(), source })?;
            for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.is_empty()) {
                let bad = || ScoreError::CacheFormat { path: path.clone(), line: i + 1 };
                let (id, score) = line.split_once('\t').ok_or_else(bad)?;
                let score = if score.is_empty() { None } else { Some(score.parse::<f64>().map_err(|_| bad())?) };
                cache.insert(id.to_string(), score);
            }
        }
        Ok(Self { inner, path, cache: Mutex::new(cache) })
    }

    pub fn len(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn save(&self) -> Result<(), ScoreError> {
        let cache = self.cache.lock().expect("cache lock");
        let mut out = String::new();
        for (id, s) in cache.iter() {
            out.push_str(id);
            out.push('\t');
            if let Some(s) = s {
                out.push_str(&s.to_string());
            }
            out.push('\n');
        }
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|source| ScoreError::Cache { path: self.path.clone(), source })?;
        }
        fs::write(&self.path, out).map_err(|source| ScoreError::Cache { path: self.path.clone(), source })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl<S: ToxicityScorer> ToxicityScorer for CachedScorer<S> {
    fn score(&self, record: &TweetRecord) -> Result<Option<f64>, ScoreError> {
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&record.tweet_id) {
            return Ok(*hit);
        }
        let s = self.inner.score(record)?;
        self.cache.lock().expect("cache lock").insert(record.tweet_id.clone(), s);
        Ok(s)
    }
}

/// Enforces a minimum spacing between requests across threads.
#[derive(Debug)]
pub struct RateLimiter {
    interval: Duration,
    next: Mutex<Instant>,
}

impl RateLimiter {
    pub fn per_second(max_requests: f64) -> Self {
        Self::with_interval(Duration::from_secs_f64(1.0 / max_requests.max(1e-9)))
    }

    pub fn with_interval(interval: Duration) -> Self {
        Self { interval, next: Mutex::new(Instant::now()) }
    }

    /// Blocks until the caller may issue the next request.
    pub fn acquire(&self) {
        let wait = {
            let mut next = self.next.lock().expect("rate limiter lock");
            let now = Instant::now();
            let slot = (*next).max(now);
            *next = slot + self.interval;
            slot - now
        };
        if !wait.is_zero() {
            thread::sleep(wait);
        }
    }
}

#[cfg(feature = "live")]
pub use live::PerspectiveScorer;

#[cfg(feature = "live")]
mod live {
    use super::*;
    use serde_json::json;

    /// Client for the Perspective comment-analysis API (TOXICITY attribute).
    pub struct PerspectiveScorer {
        client: reqwest::blocking::Client,
        api_key: String,
        endpoint: String,
        limiter: RateLimiter,
    }

    impl PerspectiveScorer {
        pub const ENDPOINT: &'static str = "https://commentanalyzer.googleapis.com/v1alpha1/comments:analyze";

        pub fn new(api_key: String, max_requests_per_second: f64) -> Self {
            Self {
                client: reqwest::blocking::Client::builder()
                    .timeout(Duration::from_secs(30))
                    .build()
                    .expect("http client"),
                api_key,
                endpoint: Self::ENDPOINT.to_string(),
                limiter: RateLimiter::per_second(max_requests_per_second),
            }
        }
    }

    impl ToxicityScorer for PerspectiveScorer {
        fn score(&self, record: &TweetRecord) -> Result<Option<f64>, ScoreError> {
            let text = record.text.as_deref().ok_or_else(|| ScoreError::MissingText(record.tweet_id.clone()))?;
            self.limiter.acquire();
            let err = |reason: String| ScoreError::Request { tweet_id: record.tweet_id.clone(), reason };
            let body = json!({
                "comment": { "text": text },
                "languages": ["en"],
                "requestedAttributes": { "TOXICITY": {} },
            });
            let resp: serde_json::Value = self
                .client
                .post(&self.endpoint)
                .query(&[("key", &self.api_key)])
                .json(&body)
                .send()
                .and_then(|r| r.error_for_status())
                .and_then(|r| r.json())
                .map_err(|e| err(e.to_string()))?;
            Ok(resp["attributeScores"]["TOXICITY"]["summaryScore"]["value"].as_f64())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tweet(id: &str) -> TweetRecord {
        TweetRecord {
            tweet_id: id.into(),
            author_id: "a".into(),
            timestamp: 1,
            retweet_of: None,
            urls: vec![],
            follower_count: None,
            bot_score: None,
            toxicity: Some(0.25),
            text_lang: Some("en".into()),
            text: None,
        }
    }

    #[test]
    fn stub_is_deterministic_and_bounded() {
        let s = OfflineStubScorer::default();
        for i in 0..500 {
            let t = tweet(&format!("t{i}"));
            let a = s.score(&t).unwrap().unwrap();
            assert_eq!(Some(a), s.score(&t).unwrap());
            assert!((0.0..1.0).contains(&a));
        }
        assert_ne!(s.score(&tweet("x")).unwrap(), OfflineStubScorer { salt: 1 }.score(&tweet("x")).unwrap());
    }

    struct Counting(std::sync::atomic::AtomicUsize);
    impl ToxicityScorer for Counting {
        fn score(&self, r: &TweetRecord) -> Result<Option<f64>, ScoreError> {
            self.0.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
            Ok((r.tweet_id != "none").then_some(0.5))
        }
    }

    #[test]
    fn cache_persists_and_short_circuits() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache/tox.tsv");
        let c = CachedScorer::open(Counting(Default::default()), &path).unwrap();
        assert_eq!(c.score(&tweet("a")).unwrap(), Some(0.5));
        assert_eq!(c.score(&tweet("a")).unwrap(), Some(0.5));
        assert_eq!(c.score(&tweet("none")).unwrap(), None);
        assert_eq!(c.inner.0.load(std::sync::atomic::Ordering::SeqCst), 2);
        c.save().unwrap();
        let reopened = CachedScorer::open(Counting(Default::default()), &path).unwrap();
        assert_eq!(reopened.len(), 2);
        assert_eq!(reopened.score(&tweet("none")).unwrap(), None);
        assert_eq!(reopened.inner.0.load(std::sync::atomic::Ordering::SeqCst), 0);
    }

    #[test]
    fn record_scorer_reads_field() {
        assert_eq!(RecordScorer.score(&tweet("a")).unwrap(), Some(0.25));
    }

    #[test]
    fn rate_limiter_spaces_requests() {
        let rl = RateLimiter::with_interval(Duration::from_millis(15));
        let start = Instant::now();
        for _ in 0..4 {
            rl.acquire();
        }
        assert!(start.elapsed() >= Duration::from_millis(45));
    }
}
