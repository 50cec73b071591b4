//! Identification and characterization of superspreaders of
//! low-credibility content in retweet-event corpora.
//!
//! The pipeline reads tweet events, labels posts linking to listed
//! low-credibility domains, builds per-period retweet networks, ranks the
//! observation-period posters by FIB-index, Influence, Popularity and Bot
//! Score, and scores each ranking by how much evaluation-period
//! misinformation its head accounts for.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.

pub mod behavior;
pub mod dismantle;
pub mod graph;
pub mod ingest;
pub mod metrics;
pub mod pipeline;
pub mod scalar;
pub mod stats;
pub mod synth;

pub use scalar::Scalar;

/// Default real type.
pub type Real = f64;

pub type AccountMetrics = metrics::AccountMetrics<Real>;
pub type Ranking = metrics::Ranking<Real>;
pub type MisinfoShare = dismantle::MisinfoShare<Real>;
pub type DismantlingCurve = dismantle::DismantlingCurve<Real>;
pub type TestResult = stats::TestResult<Real>;
pub type ScanPoint = stats::ScanPoint<Real>;
pub type Correlation = stats::Correlation<Real>;
pub type AccountProfile = behavior::AccountProfile<Real>;
pub type Analysis = pipeline::Analysis<Real>;

/// Single-precision variants.
pub mod single {
    pub type AccountMetrics = crate::metrics::AccountMetrics<f32>;
    pub type Ranking = crate::metrics::Ranking<f32>;
    pub type DismantlingCurve = crate::dismantle::DismantlingCurve<f32>;
    pub type TestResult = crate::stats::TestResult<f32>;
}

pub use graph::RetweetNetwork;
pub use ingest::{DomainList, PeriodSplit, TweetRecord};
pub use metrics::MetricName;
