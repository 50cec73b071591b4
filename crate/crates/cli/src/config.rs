//! Run configuration: one TOML file, overridden field by field from flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use superspreader_core::behavior::TopRule;
use superspreader_core::ingest::{Interval, PeriodSplit};
use superspreader_core::stats::{MonteCarlo, TestConfig, DEFAULT_EXACT_BOUND};
use superspreader_core::synth::GeneratorConfig;
use superspreader_core::MetricName;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ScorerMode {
    #[default]
    OfflineStub,
    Cached,
    Live,
}

/// Observation and evaluation windows in epoch seconds, half-open.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodConfig {
    pub observation_start: Option<i64>,
    pub observation_end: Option<i64>,
    pub evaluation_start: Option<i64>,
    pub evaluation_end: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    pub corpus: Vec<PathBuf>,
    pub domains: Option<PathBuf>,
    /// TSV of `short_url<TAB>target` used to expand shortened links offline.
    pub shorteners: Option<PathBuf>,
    /// Skip malformed corpus lines instead of failing.
    pub lenient: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DismantleConfig {
    /// Write every n-th curve point (the last point is always written).
    pub curve_every: usize,
}

impl Default for DismantleConfig {
    fn default() -> Self {
        Self { curve_every: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    pub exact_bound: usize,
    /// Monte-Carlo permutations beyond `exact_bound`; asymptotic when absent.
    pub permutations: Option<usize>,
    pub alpha: f64,
}

impl Default for StatsConfig {
    fn default() -> Self {
        Self { exact_bound: DEFAULT_EXACT_BOUND, permutations: None, alpha: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub a: MetricName,
    pub b: MetricName,
    /// Largest prefix; defaults to the shorter curve.
    pub max_k: Option<usize>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { a: MetricName::Fib, b: MetricName::Influence, max_k: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CharacterizeConfig {
    pub scorer: ScorerMode,
    pub score_cache: Option<PathBuf>,
    pub requests_per_second: f64,
    /// CSV `account_id,status,verified`.
    pub status: Option<PathBuf>,
    /// CSV `account_id,category,political_affiliation`.
    pub annotations: Option<PathBuf>,
    pub follower_threshold: u64,
    /// Length of the link-sharing window, counted from the earliest record.
    pub ratio_window_days: u32,
}

impl Default for CharacterizeConfig {
    fn default() -> Self {
        Self {
            scorer: ScorerMode::OfflineStub,
            score_cache: None,
            requests_per_second: 1.0,
            status: None,
            annotations: None,
            follower_threshold: 100_000,
            ratio_window_days: 91,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub output: PathBuf,
    pub workers: Option<usize>,
    pub metrics: Vec<MetricName>,
    pub top: TopRule,
    pub input: InputConfig,
    pub period: PeriodConfig,
    pub dismantle: DismantleConfig,
    pub scan: ScanConfig,
    pub stats: StatsConfig,
    pub characterize: CharacterizeConfig,
    /// Generator settings; its seed is replaced by the top-level seed.
    pub synth: GeneratorConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            output: PathBuf::from("out"),
            workers: None,
            metrics: MetricName::PREDICTIVE.to_vec(),
            top: TopRule::TopN { n: 10 },
            input: InputConfig::default(),
            period: PeriodConfig::default(),
            dismantle: DismantleConfig::default(),
            scan: ScanConfig::default(),
            stats: StatsConfig::default(),
            characterize: CharacterizeConfig::default(),
            synth: GeneratorConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn split(&self) -> Result<PeriodSplit, CliError> {
        let p = &self.period;
        let need = |v: Option<i64>, name: &str| v.ok_or_else(|| CliError::usage(format!("period.{name} is not set")));
        let split = PeriodSplit {
            observation: Interval::new(need(p.observation_start, "observation_start")?, need(p.observation_end, "observation_end")?),
            evaluation: Interval::new(need(p.evaluation_start, "evaluation_start")?, need(p.evaluation_end, "evaluation_end")?),
        };
        split.validate().map_err(|e| CliError::usage(format!("period: {e}")))?;
        Ok(split)
    }

    pub fn test_config(&self) -> TestConfig {
        TestConfig {
            exact_bound: self.stats.exact_bound,
            monte_carlo: self.stats.permutations.map(|permutations| MonteCarlo { permutations, seed: self.seed }),
        }
    }

    pub fn generator(&self) -> GeneratorConfig {
        GeneratorConfig { seed: self.seed, ..self.synth.clone() }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if i64::try_from(self.seed).is_err() || i64::try_from(self.synth.seed).is_err() {
            return Err(CliError::usage(format!("seed must be at most {}", i64::MAX)));
        }
        if self.metrics.is_empty() {
            return Err(CliError::usage("metrics list is empty"));
        }
        if self.workers == Some(0) {
            return Err(CliError::usage("workers must be positive"));
        }
        if let TopRule::TopPercentPositive { percent } = self.top {
            if !(percent > 0.0 && percent <= 100.0) {
                return Err(CliError::usage(format!("top percent {percent} outside (0, 100]")));
            }
        }
        if !(self.stats.alpha > 0.0 && self.stats.alpha < 1.0) {
            return Err(CliError::usage("stats.alpha must lie in (0, 1)"));
        }
        let rps = self.characterize.requests_per_second;
        if rps.is_nan() || rps <= 0.0 {
            return Err(CliError::usage("characterize.requests_per_second must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_round_trips() {
        let c = PipelineConfig::default();
        assert_eq!(toml::from_str::<PipelineConfig>(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let c: PipelineConfig = toml::from_str("seed = 9\n[period]\nobservation_start = 1\nobservation_end = 2\nevaluation_start = 2\nevaluation_end = 5\n").unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.split().unwrap().evaluation, Interval::new(2, 5));
        assert_eq!(c.metrics, MetricName::PREDICTIVE.to_vec());
    }

    #[test]
    fn seed_beyond_toml_range_rejected() {
        let c = PipelineConfig { seed: u64::MAX, ..PipelineConfig::default() };
        assert_eq!(c.validate().unwrap_err().exit_code(), 1);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<PipelineConfig>("sed = 1\n").is_err());
    }

    #[test]
    fn missing_period_is_usage_error() {
        let e = PipelineConfig::default().split().unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }

    fn arb_metric() -> impl Strategy<Value = MetricName> {
        prop::sample::select(vec![MetricName::Fib, MetricName::Influence, MetricName::Popularity, MetricName::BotScore])
    }

    proptest! {
        #[test]
        fn round_trips(
            seed in 0..=i64::MAX as u64,
            workers in prop::option::of(1usize..64),
            metrics in prop::collection::vec(arb_metric(), 1..4),
            n in 0usize..1000,
            percent in prop::option::of(0.01f64..100.0),
            corpus in prop::collection::vec("[a-z]{1,8}\\.jsonl", 0..3),
            obs in prop::option::of((0i64..1_000_000, 1i64..1_000_000)),
            permutations in prop::option::of(1usize..100_000),
            residual in 0.0f64..0.9,
            scorer in prop::sample::select(vec![ScorerMode::OfflineStub, ScorerMode::Cached, ScorerMode::Live]),
        ) {
            let mut c = PipelineConfig { seed, workers, metrics, ..Default::default() };
            c.top = match percent { Some(percent) => TopRule::TopPercentPositive { percent }, None => TopRule::TopN { n } };
            c.input.corpus = corpus.into_iter().map(PathBuf::from).collect();
            if let Some((s, len)) = obs {
                c.period = PeriodConfig { observation_start: Some(s), observation_end: Some(s + len), evaluation_start: Some(s + len), evaluation_end: None };
            }
            c.stats.permutations = permutations;
            c.synth.planted_residual = residual;
            c.characterize.scorer = scorer;
            let back: PipelineConfig = toml::from_str(&c.to_toml()).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(back.hash(), c.hash());
        }
    }
}
