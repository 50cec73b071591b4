//! Characterization of selected superspreaders: sharing ratio, toxicity,
//! and suspension/prominence breakdowns.

mod scorer;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{self, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{Labeler, TweetRecord};
use crate::metrics::Ranking;
use crate::scalar::{mean, Scalar};

pub use scorer::{CachedScorer, OfflineStubScorer, RateLimiter, RecordScorer, ScoreError, ToxicityScorer};
#[cfg(feature = "live")]
pub use scorer::PerspectiveScorer;

/// Account classification scheme used for manual annotation.
pub const CATEGORIES: [&str; 16] = [
    "Elected official",
    "Public service",
    "Media outlet",
    "Journalist (hard news)",
    "Journalist (soft news)",
    "Journalist (broadcast news)",
    "Journalist (new media)",
    "Media affiliated",
    "Public intellectual",
    "Political",
    "Entertainer",
    "Sports related",
    "Religious leader",
    "Organization",
    "Other",
    "Deactivated/suspended",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AccountStatus {
    Active,
    Suspended,
    Deleted,
    #[default]
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoliticalAffiliation {
    Left,
    Right,
}

macro_rules! text_enum {
    ($t:ty { $($v:ident => $s:literal),* $(,)? }) => {
        impl $t {
            pub fn as_str(self) -> &'static str {
                match self { $(<$t>::$v => $s),* }
            }
        }
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
        impl FromStr for $t {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($s => Ok(<$t>::$v),)*
                    other => Err(format!("unrecognised value {other:?}")),
                }
            }
        }
    };
}

text_enum!(AccountStatus { Active => "active", Suspended => "suspended", Deleted => "deleted", Unknown => "unknown" });
text_enum!(PoliticalAffiliation { Left => "left", Right => "right" });

#[derive(Debug, Clone, PartialEq)]
pub struct AccountProfile<T> {
    pub account_id: String,
    pub r_m: Option<T>,
    pub mean_toxicity: Option<T>,
    pub n_links_total: u64,
    pub n_links_lowcred: u64,
    pub verified: Option<bool>,
    pub status: AccountStatus,
    pub followers: u64,
    pub category: Option<String>,
    pub political_affiliation: Option<PoliticalAffiliation>,
}

/// Fraction of low-credibility links; `None` without links.
pub fn sharing_ratio<T: Scalar>(links: &[(String, bool)]) -> Option<T> {
    if links.is_empty() {
        return None;
    }
    let low = links.iter().filter(|(_, l)| *l).count();
    Some(T::of_usize(low) / T::of_usize(links.len()))
}

/// Mean toxicity over an account's scored English original tweets.
pub fn mean_toxicity<'a, T: Scalar, I>(tweets: I, scorer: &dyn ToxicityScorer) -> Result<Option<T>, ScoreError>
where
    I: IntoIterator<Item = &'a TweetRecord>,
{
    let mut scores = Vec::new();
    for t in tweets.into_iter().filter(|t| t.is_original() && t.is_english()) {
        if let Some(s) = scorer.score(t)? {
            scores.push(T::of(s));
        }
    }
    Ok(mean(scores))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum TopRule {
    /// The top `percent`% of accounts whose metric value is positive,
    /// rounded to the nearest whole account (at least one when any exist).
    TopPercentPositive { percent: f64 },
    TopN { n: usize },
}

impl TopRule {
    /// Number of accounts the rule selects from `ranking`.
    pub fn size<T: Scalar>(&self, ranking: &Ranking<T>) -> usize {
        match *self {
            TopRule::TopN { n } => n.min(ranking.len()),
            TopRule::TopPercentPositive { percent } => {
                let positive = ranking.values.iter().filter(|v| **v > T::zero()).count();
                if positive == 0 {
                    0
                } else {
                    ((positive as f64 * percent / 100.0).round() as usize).clamp(1, positive)
                }
            }
        }
    }
}

/// Head of the ranking selected by `rule`, in rank order.
pub fn select_top<T: Scalar>(ranking: &Ranking<T>, rule: TopRule) -> Vec<String> {
    ranking.ordered_accounts[..rule.size(ranking)].to_vec()
}

/// Unique accounts across several selected heads.
pub fn union_heads<'a, I: IntoIterator<Item = &'a [String]>>(heads: I) -> BTreeSet<String> {
    heads.into_iter().flatten().cloned().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GroupRate {
    pub accounts: usize,
    pub suspended: usize,
    pub pct_suspended: f64,
}

impl GroupRate {
    fn finish(mut self) -> Self {
        self.pct_suspended = pct(self.suspended, self.accounts);
        self
    }
}

/// Suspension against verified status and follower count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProminenceTable {
    pub follower_threshold: u64,
    pub accounts: usize,
    /// Accounts with unknown status, left out of every count below.
    pub excluded_unknown_status: usize,
    pub suspended: usize,
    pub suspended_verified: usize,
    /// Suspended accounts whose verified flag is unknown.
    pub suspended_verified_unknown: usize,
    pub pct_suspended_verified: f64,
    /// Accounts with more than `follower_threshold` followers.
    pub above_threshold: GroupRate,
    pub at_or_below_threshold: GroupRate,
}

fn pct(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

pub fn prominence_crosstab<T>(profiles: &[AccountProfile<T>], follower_threshold: u64) -> ProminenceTable {
    let mut t = ProminenceTable {
        follower_threshold,
        accounts: profiles.len(),
        excluded_unknown_status: 0,
        suspended: 0,
        suspended_verified: 0,
        suspended_verified_unknown: 0,
        pct_suspended_verified: 0.0,
        above_threshold: GroupRate::default(),
        at_or_below_threshold: GroupRate::default(),
    };
    for p in profiles {
        if p.status == AccountStatus::Unknown {
            t.excluded_unknown_status += 1;
            continue;
        }
        let suspended = p.status == AccountStatus::Suspended;
        if suspended {
            t.suspended += 1;
            match p.verified {
                Some(true) => t.suspended_verified += 1,
                Some(false) => {}
                None => t.suspended_verified_unknown += 1,
            }
        }
        let g = if p.followers > follower_threshold { &mut t.above_threshold } else { &mut t.at_or_below_threshold };
        g.accounts += 1;
        g.suspended += usize::from(suspended);
    }
    t.pct_suspended_verified = pct(t.suspended_verified, t.suspended - t.suspended_verified_unknown);
    t.above_threshold = t.above_threshold.finish();
    t.at_or_below_threshold = t.at_or_below_threshold.finish();
    t
}

#[derive(Debug, Error)]
pub enum BehaviorError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: {reason}")]
    Row { row: usize, reason: String },
    #[error(transparent)]
    Score(#[from] ScoreError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StatusEntry {
    pub status: AccountStatus,
    pub verified: Option<bool>,
}

fn parse_bool(s: &str) -> Result<Option<bool>, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "" => Ok(None),
        "true" | "1" | "yes" => Ok(Some(true)),
        "false" | "0" | "no" => Ok(Some(false)),
        other => Err(format!("bad boolean {other:?}")),
    }
}

/// Reads `account_id,status,verified` (with header).
pub fn read_status_csv<R: Read>(r: R) -> Result<BTreeMap<String, StatusEntry>, BehaviorError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let mut out = BTreeMap::new();
    for (i, row) in rdr.deserialize::<(String, String, String)>().enumerate() {
        let (id, status, verified) = row?;
        let row_err = |reason| BehaviorError::Row { row: i + 2, reason };
        let status = status.parse().map_err(row_err)?;
        let verified = parse_bool(&verified).map_err(|reason| BehaviorError::Row { row: i + 2, reason })?;
        out.insert(id, StatusEntry { status, verified });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Annotation {
    pub category: Option<String>,
    pub political_affiliation: Option<PoliticalAffiliation>,
}

/// Reads `account_id,category,political_affiliation` (with header).
/// Categories must be one of [`CATEGORIES`] (case-insensitive).
pub fn read_annotation_csv<R: Read>(r: R) -> Result<BTreeMap<String, Annotation>, BehaviorError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let mut out = BTreeMap::new();
    for (i, row) in rdr.deserialize::<(String, String, String)>().enumerate() {
        let (id, category, affiliation) = row?;
        let row_no = i + 2;
        let category = if category.is_empty() {
            None
        } else {
            let canonical = CATEGORIES
                .iter()
                .find(|c| c.eq_ignore_ascii_case(&category))
                .ok_or_else(|| BehaviorError::Row { row: row_no, reason: format!("unknown category {category:?}") })?;
            Some(canonical.to_string())
        };
        let political_affiliation = if affiliation.is_empty() {
            None
        } else {
            Some(affiliation.parse().map_err(|reason| BehaviorError::Row { row: row_no, reason })?)
        };
        out.insert(id, Annotation { category, political_affiliation });
    }
    Ok(out)
}

/// Inputs for [`build_profiles`].
pub struct ProfileInputs<'a> {
    /// Tweets inside the sharing-ratio window.
    pub ratio_records: &'a [TweetRecord],
    /// Tweets whose toxicity is averaged (originals only are used).
    pub toxicity_records: &'a [TweetRecord],
    pub labeler: &'a Labeler<'a>,
    pub scorer: &'a dyn ToxicityScorer,
    pub statuses: &'a BTreeMap<String, StatusEntry>,
    pub annotations: &'a BTreeMap<String, Annotation>,
}

fn group_by_author(records: &[TweetRecord]) -> BTreeMap<&str, Vec<&TweetRecord>> {
    let mut m: BTreeMap<&str, Vec<&TweetRecord>> = BTreeMap::new();
    for r in records {
        m.entry(r.author_id.as_str()).or_default().push(r);
    }
    m
}

/// Builds one profile per account, in the given order. Followers come from
/// the latest snapshot among the account's tweets (0 when none).
pub fn build_profiles<T: Scalar>(accounts: &[String], inputs: &ProfileInputs<'_>) -> Result<Vec<AccountProfile<T>>, BehaviorError> {
    let ratio = group_by_author(inputs.ratio_records);
    let tox = group_by_author(inputs.toxicity_records);
    let empty = Vec::new();
    accounts
        .iter()
        .map(|id| {
            let window = ratio.get(id.as_str()).unwrap_or(&empty);
            let links: Vec<(String, bool)> = window.iter().flat_map(|r| inputs.labeler.links(r)).collect();
            let all = tox.get(id.as_str()).unwrap_or(&empty);
            let followers = window
                .iter()
                .chain(all.iter())
                .filter_map(|r| r.follower_count.map(|f| (r.timestamp, f)))
                .max()
                .map_or(0, |(_, f)| f);
            let status = inputs.statuses.get(id).copied().unwrap_or_default();
            let ann = inputs.annotations.get(id).cloned().unwrap_or_default();
            Ok(AccountProfile {
                account_id: id.clone(),
                r_m: sharing_ratio(&links),
                mean_toxicity: mean_toxicity(all.iter().copied(), inputs.scorer)?,
                n_links_total: links.len() as u64,
                n_links_lowcred: links.iter().filter(|(_, l)| *l).count() as u64,
                verified: status.verified,
                status: status.status,
                followers,
                category: ann.category,
                political_affiliation: ann.political_affiliation,
            })
        })
        .collect()
}

pub fn write_profiles_csv<T: Scalar, W: Write>(profiles: &[AccountProfile<T>], w: W) -> io::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record([
        "account_id",
        "r_m",
        "mean_toxicity",
        "n_links_total",
        "n_links_lowcred",
        "verified",
        "status",
        "followers",
        "category",
        "political_affiliation",
    ])?;
    let opt = |v: Option<String>| v.unwrap_or_default();
    for p in profiles {
        wtr.write_record([
            p.account_id.clone(),
            opt(p.r_m.map(|v| v.to_string())),
            opt(p.mean_toxicity.map(|v| v.to_string())),
            p.n_links_total.to_string(),
            p.n_links_lowcred.to_string(),
            opt(p.verified.map(|v| v.to_string())),
            p.status.to_string(),
            p.followers.to_string(),
            opt(p.category.clone()),
            opt(p.political_affiliation.map(|a| a.to_string())),
        ])?;
    }
    wtr.flush()
}
