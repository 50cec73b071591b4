//! Short-link expansion through an injected resolver.

use std::collections::{BTreeSet, HashMap, HashSet};

use thiserror::Error;

use super::counters::IngestCounters;
use super::domain::extract_registrable_domain;

pub const DEFAULT_HOP_LIMIT: usize = 5;

/// Shortener domains recognised when no explicit set is configured.
pub const DEFAULT_SHORTENERS: &[&str] = &[
    "bit.ly", "buff.ly", "dlvr.it", "goo.gl", "ift.tt", "is.gd", "ow.ly", "tinyurl.com",
    "trib.al", "t.co",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("resolver timed out on {0}")]
    Timeout(String),
    #[error("resolver failed on {url}: {reason}")]
    Failed { url: String, reason: String },
}

/// Follows a single redirect. `Ok(None)` means the resolver knows no further
/// hop for `url`.
pub trait LinkResolver: Send + Sync {
    fn next_hop(&self, url: &str) -> Result<Option<String>, ResolveError>;
}

fn strip_scheme(url: &str) -> &str {
    url.split_once("://").map_or(url, |(_, rest)| rest)
}

/// Resolver backed by a fixed short-URL → expanded-URL map.
#[derive(Debug, Clone, Default)]
pub struct OfflineResolver {
    map: HashMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("shortener map line {line}: expected two tab-separated columns")]
pub struct ShortenerMapError {
    pub line: usize,
}

impl OfflineResolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, short: &str, expanded: &str) {
        self.map.insert(strip_scheme(short.trim()).to_string(), expanded.trim().to_string());
    }

    /// Two-column TSV: short URL, expanded URL. Blank lines and `#` comments
    /// are skipped.
    pub fn from_tsv(text: &str) -> Result<Self, ShortenerMapError> {
        let mut r = Self::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            match line.split('\t').collect::<Vec<_>>().as_slice() {
                [short, expanded] if !short.trim().is_empty() && !expanded.trim().is_empty() => {
                    r.insert(short, expanded)
                }
                _ => return Err(ShortenerMapError { line: i + 1 }),
            }
        }
        Ok(r)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

impl LinkResolver for OfflineResolver {
    fn next_hop(&self, url: &str) -> Result<Option<String>, ResolveError> {
        Ok(self.map.get(strip_scheme(url.trim())).cloned())
    }
}

/// Registrable domains of link-shortening services.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShortenerSet(BTreeSet<String>);

impl Default for ShortenerSet {
    fn default() -> Self {
        Self(DEFAULT_SHORTENERS.iter().map(|s| s.to_string()).collect())
    }
}

impl ShortenerSet {
    pub fn new<I: IntoIterator<Item = S>, S: AsRef<str>>(domains: I) -> Self {
        Self(
            domains
                .into_iter()
                .filter_map(|d| extract_registrable_domain(d.as_ref()).ok())
                .collect(),
        )
    }

    pub fn is_shortened(&self, url: &str) -> bool {
        extract_registrable_domain(url).is_ok_and(|d| self.0.contains(&d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionOutcome {
    /// Not a shortener link.
    Unchanged,
    Expanded { hops: usize },
    /// Unknown link, resolver error, loop or hop limit; original returned.
    Failed,
}

/// Expands `url` by following `resolver` while the current link is on a
/// shortener domain, up to `hop_limit` redirects.
pub fn expand_short_link(
    url: &str,
    resolver: &dyn LinkResolver,
    shorteners: &ShortenerSet,
    hop_limit: usize,
) -> (String, ExpansionOutcome) {
    if !shorteners.is_shortened(url) {
        return (url.to_string(), ExpansionOutcome::Unchanged);
    }
    let failed = || (url.to_string(), ExpansionOutcome::Failed);
    let mut seen = HashSet::new();
    let mut current = url.to_string();
    let mut hops = 0;
    while shorteners.is_shortened(&current) {
        if hops == hop_limit || !seen.insert(strip_scheme(&current).to_string()) {
            return failed();
        }
        match resolver.next_hop(&current) {
            Ok(Some(next)) => {
                current = next;
                hops += 1;
            }
            Ok(None) | Err(_) => return failed(),
        }
    }
    (current, ExpansionOutcome::Expanded { hops })
}

/// Resolver plus shortener set plus the counters expansion reports to.
pub struct LinkExpander<'a> {
    pub resolver: &'a dyn LinkResolver,
    pub shorteners: ShortenerSet,
    pub hop_limit: usize,
}

impl<'a> LinkExpander<'a> {
    pub fn new(resolver: &'a dyn LinkResolver) -> Self {
        Self { resolver, shorteners: ShortenerSet::default(), hop_limit: DEFAULT_HOP_LIMIT }
    }

    pub fn expand(&self, url: &str, counters: &IngestCounters) -> String {
        let (out, outcome) = expand_short_link(url, self.resolver, &self.shorteners, self.hop_limit);
        match outcome {
            ExpansionOutcome::Unchanged => {}
            ExpansionOutcome::Expanded { .. } => IngestCounters::bump(&counters.links_expanded),
            ExpansionOutcome::Failed => IngestCounters::bump(&counters.expansion_failures),
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shorteners() -> ShortenerSet {
        ShortenerSet::new(["sho.rt", "bit.ly"])
    }

    #[test]
    fn non_shortener_is_unchanged() {
        let r = OfflineResolver::new();
        let (u, o) = expand_short_link("http://example.com/a", &r, &shorteners(), 5);
        assert_eq!(u, "http://example.com/a");
        assert_eq!(o, ExpansionOutcome::Unchanged);
    }

    #[test]
    fn fixture_map_expands() {
        let r = OfflineResolver::from_tsv("# fixture\nsho.rt/a\thttp://breaking911.com/x\n").unwrap();
        let (u, o) = expand_short_link("https://sho.rt/a", &r, &shorteners(), 5);
        assert_eq!(u, "http://breaking911.com/x");
        assert_eq!(o, ExpansionOutcome::Expanded { hops: 1 });
    }

    #[test]
    fn chains_follow_until_non_shortener() {
        let r = OfflineResolver::from_tsv("sho.rt/a\thttp://bit.ly/b\nbit.ly/b\thttp://site.org/\n").unwrap();
        let (u, o) = expand_short_link("http://sho.rt/a", &r, &shorteners(), 5);
        assert_eq!(u, "http://site.org/");
        assert_eq!(o, ExpansionOutcome::Expanded { hops: 2 });
    }

    #[test]
    fn hop_limit_and_loops_fail_with_counter() {
        let mut tsv = String::new();
        for i in 0..10 {
            tsv.push_str(&format!("sho.rt/{i}\thttp://sho.rt/{}\n", i + 1));
        }
        tsv.push_str("sho.rt/10\thttp://end.com/\n");
        let r = OfflineResolver::from_tsv(&tsv).unwrap();
        let counters = IngestCounters::default();
        let exp = LinkExpander { resolver: &r, shorteners: shorteners(), hop_limit: 3 };
        assert_eq!(exp.expand("http://sho.rt/0", &counters), "http://sho.rt/0");
        assert_eq!(counters.snapshot().expansion_failures, 1);

        let cyc = OfflineResolver::from_tsv("sho.rt/x\thttp://sho.rt/y\nsho.rt/y\thttp://sho.rt/x\n").unwrap();
        let (u, o) = expand_short_link("http://sho.rt/x", &cyc, &shorteners(), 50);
        assert_eq!((u.as_str(), o), ("http://sho.rt/x", ExpansionOutcome::Failed));
    }

    #[test]
    fn unknown_short_link_fails() {
        let (u, o) = expand_short_link("http://bit.ly/zzz", &OfflineResolver::new(), &shorteners(), 5);
        assert_eq!(u, "http://bit.ly/zzz");
        assert_eq!(o, ExpansionOutcome::Failed);
    }

    #[test]
    fn bad_tsv_line() {
        assert_eq!(OfflineResolver::from_tsv("a\tb\nonly-one\n").unwrap_err().line, 2);
    }
}
