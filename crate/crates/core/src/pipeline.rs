//! End-to-end analysis: label, split, build networks, rank, dismantle.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::dismantle::{dismantling_curve, optimal_ranking, residual_floor, DismantleError, DismantlingCurve};
use crate::graph::{build_network_with, OriginalLabels, RetweetNetwork};
use crate::ingest::{split_periods, LabeledRecord, Labeler, PeriodError, PeriodSplit, TweetRecord};
use crate::metrics::{compute_metrics, rank_accounts, AccountMetrics, MetricName, Ranking};
use crate::scalar::Scalar;
use crate::stats::{prefix_cvm_scan, ScanPoint, StatsError, TestConfig};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Period(#[from] PeriodError),
    #[error(transparent)]
    Dismantle(#[from] DismantleError),
    #[error("no curve for metric {0}")]
    MissingCurve(MetricName),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

pub struct Analysis<T> {
    pub split: PeriodSplit,
    pub observation_records: Vec<LabeledRecord>,
    pub evaluation_records: Vec<LabeledRecord>,
    pub dropped_records: usize,
    pub observation: RetweetNetwork,
    pub evaluation: RetweetNetwork,
    /// Observation-period low-credibility posters.
    pub candidates: BTreeSet<String>,
    pub metrics: Vec<AccountMetrics<T>>,
    /// One ranking per predictive metric, in [`MetricName::PREDICTIVE`] order.
    pub rankings: Vec<Ranking<T>>,
    pub optimal: Ranking<T>,
    /// Predictive curves followed by the optimal curve; empty when the
    /// evaluation period has no low-credibility retweets.
    pub curves: Vec<DismantlingCurve<T>>,
    pub residual_floor: Option<T>,
}

impl<T: Scalar> Analysis<T> {
    pub fn run(records: Vec<TweetRecord>, labeler: &Labeler<'_>, split: PeriodSplit) -> Result<Self, PipelineError> {
        split.validate()?;
        let labeled = labeler.label_all(records);
        Self::from_labeled(labeled, split)
    }

    /// Retweets take the label of their original wherever the original is
    /// in the corpus, including originals outside both periods.
    pub fn from_labeled(labeled: Vec<LabeledRecord>, split: PeriodSplit) -> Result<Self, PipelineError> {
        split.validate()?;
        let originals = OriginalLabels::from_records(&labeled);
        let parts = split_periods(labeled, &split, |r: &LabeledRecord| r.record.timestamp);
        let observation = build_network_with(&parts.observation, &originals);
        let evaluation = build_network_with(&parts.evaluation, &originals);
        let candidates = observation.posters().clone();

        let metrics = compute_metrics::<T, _>(&observation, &parts.observation);
        let rankings: Vec<Ranking<T>> = MetricName::PREDICTIVE.iter().map(|&m| rank_accounts(&metrics, m)).collect();
        let optimal = optimal_ranking(&evaluation, &candidates);
        let (curves, residual_floor) = if evaluation.total_weight() == 0 {
            (Vec::new(), None)
        } else {
            let curves = rankings
                .iter()
                .chain(std::iter::once(&optimal))
                .map(|r| dismantling_curve(r, &evaluation))
                .collect::<Result<Vec<_>, _>>()?;
            (curves, Some(residual_floor(&evaluation, &candidates)?))
        };
        Ok(Self {
            split,
            observation_records: parts.observation,
            evaluation_records: parts.evaluation,
            dropped_records: parts.dropped,
            observation,
            evaluation,
            candidates,
            metrics,
            rankings,
            optimal,
            curves,
            residual_floor,
        })
    }

    pub fn ranking(&self, metric: MetricName) -> Option<&Ranking<T>> {
        if metric == MetricName::Optimal {
            return Some(&self.optimal);
        }
        self.rankings.iter().find(|r| r.metric == metric)
    }

    pub fn curve(&self, metric: MetricName) -> Option<&DismantlingCurve<T>> {
        self.curves.iter().find(|c| c.metric == metric)
    }

    /// Two-sample CvM on growing prefixes of two curves' removal increments.
    pub fn scan(&self, a: MetricName, b: MetricName, max_k: usize, config: &TestConfig) -> Result<Vec<ScanPoint<T>>, PipelineError> {
        let ca = self.curve(a).ok_or(PipelineError::MissingCurve(a))?;
        let cb = self.curve(b).ok_or(PipelineError::MissingCurve(b))?;
        Ok(prefix_cvm_scan(ca, cb, max_k, config)?)
    }
}
