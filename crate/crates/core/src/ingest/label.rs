use rayon::prelude::*;

use super::counters::IngestCounters;
use super::domain::{extract_registrable_domain, DomainList};
use super::expand::LinkExpander;
use super::record::TweetRecord;

/// A record together with its low-credibility label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRecord {
    pub record: TweetRecord,
    pub low_credibility: bool,
}

impl AsRef<TweetRecord> for LabeledRecord {
    fn as_ref(&self) -> &TweetRecord {
        &self.record
    }
}

/// True iff at least one URL of `record` has a registrable domain in `list`.
/// Unparseable URLs are ignored.
pub fn label_low_credibility(record: &TweetRecord, list: &DomainList) -> bool {
    record
        .urls
        .iter()
        .filter_map(|u| extract_registrable_domain(u).ok())
        .any(|d| list.contains(&d))
}

/// Labels records against a domain list, optionally expanding short links
/// first, and reports skipped URLs to the shared counters.
pub struct Labeler<'a> {
    list: &'a DomainList,
    expander: Option<LinkExpander<'a>>,
    counters: &'a IngestCounters,
}

impl<'a> Labeler<'a> {
    pub fn new(list: &'a DomainList, counters: &'a IngestCounters) -> Self {
        Self { list, expander: None, counters }
    }

    pub fn with_expander(mut self, expander: LinkExpander<'a>) -> Self {
        self.expander = Some(expander);
        self
    }

    pub fn list(&self) -> &DomainList {
        self.list
    }

    /// Registrable domains of every parseable link in `record`, in URL order.
    pub fn domains(&self, record: &TweetRecord) -> Vec<String> {
        record
            .urls
            .iter()
            .filter_map(|u| {
                let url = match &self.expander {
                    Some(e) => e.expand(u, self.counters),
                    None => u.clone(),
                };
                match extract_registrable_domain(&url) {
                    Ok(d) => Some(d),
                    Err(_) => {
                        IngestCounters::bump(&self.counters.urls_skipped);
                        None
                    }
                }
            })
            .collect()
    }

    /// `(domain, is_low_credibility)` for every parseable link.
    pub fn links(&self, record: &TweetRecord) -> Vec<(String, bool)> {
        self.domains(record)
            .into_iter()
            .map(|d| {
                let low = self.list.contains(&d);
                (d, low)
            })
            .collect()
    }

    pub fn is_low_credibility(&self, record: &TweetRecord) -> bool {
        self.domains(record).iter().any(|d| self.list.contains(d))
    }

    pub fn label(&self, record: TweetRecord) -> LabeledRecord {
        let low_credibility = self.is_low_credibility(&record);
        LabeledRecord { record, low_credibility }
    }

    /// Labels a batch in parallel, preserving input order.
    pub fn label_all(&self, records: Vec<TweetRecord>) -> Vec<LabeledRecord> {
        records.into_par_iter().map(|r| self.label(r)).collect()
    }
}
