use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::record::TweetRecord;

/// Half-open UTC interval `[start, end)` in epoch seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub start: i64,
    pub end: i64,
}

impl Interval {
    pub fn new(start: i64, end: i64) -> Self {
        Self { start, end }
    }

    pub fn contains(&self, ts: i64) -> bool {
        self.start <= ts && ts < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PeriodError {
    #[error("{0} interval is empty or reversed")]
    Empty(&'static str),
    #[error("observation period must end before the evaluation period starts")]
    Overlap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodSplit {
    pub observation: Interval,
    pub evaluation: Interval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Period {
    Observation,
    Evaluation,
}

impl PeriodSplit {
    pub fn new(observation: Interval, evaluation: Interval) -> Result<Self, PeriodError> {
        let split = Self { observation, evaluation };
        split.validate()?;
        Ok(split)
    }

    pub fn validate(&self) -> Result<(), PeriodError> {
        if self.observation.start >= self.observation.end {
            return Err(PeriodError::Empty("observation"));
        }
        if self.evaluation.start >= self.evaluation.end {
            return Err(PeriodError::Empty("evaluation"));
        }
        if self.observation.end > self.evaluation.start {
            return Err(PeriodError::Overlap);
        }
        Ok(())
    }

    pub fn assign(&self, ts: i64) -> Option<Period> {
        if self.observation.contains(ts) {
            Some(Period::Observation)
        } else if self.evaluation.contains(ts) {
            Some(Period::Evaluation)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SplitOutcome<R> {
    pub observation: Vec<R>,
    pub evaluation: Vec<R>,
    /// Records falling outside both periods.
    pub dropped: usize,
}

/// Routes each record by timestamp. Input order is kept within each stream.
pub fn split_periods<R, I>(records: I, split: &PeriodSplit, timestamp: impl Fn(&R) -> i64) -> SplitOutcome<R>
where
    I: IntoIterator<Item = R>,
{
    let mut out = SplitOutcome { observation: Vec::new(), evaluation: Vec::new(), dropped: 0 };
    for r in records {
        match split.assign(timestamp(&r)) {
            Some(Period::Observation) => out.observation.push(r),
            Some(Period::Evaluation) => out.evaluation.push(r),
            None => out.dropped += 1,
        }
    }
    out
}

/// [`split_periods`] for plain tweet records.
pub fn split_records<I: IntoIterator<Item = TweetRecord>>(records: I, split: &PeriodSplit) -> SplitOutcome<TweetRecord> {
    split_periods(records, split, |r| r.timestamp)
}
