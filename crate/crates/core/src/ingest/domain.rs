//! Registrable-domain extraction and low-credibility domain lists.

use std::collections::BTreeSet;

use thiserror::Error;
use url::{Host, Url};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("unparseable url {0:?}")]
    Unparseable(String),
    #[error("url {0:?} has no host name")]
    NoHost(String),
    #[error("host {0:?} has no registrable domain")]
    NoRegistrableDomain(String),
}

/// Returns the lowercase registrable domain of `url` using the bundled
/// public-suffix snapshot. Bare hosts without a scheme are accepted.
pub fn extract_registrable_domain(url: &str) -> Result<String, DomainError> {
    let trimmed = url.trim();
    if trimmed.is_empty() {
        return Err(DomainError::Unparseable(url.to_string()));
    }
    let parsed = if trimmed.contains("://") {
        Url::parse(trimmed)
    } else {
        Url::parse(&format!("http://{trimmed}"))
    }
    .map_err(|_| DomainError::Unparseable(url.to_string()))?;

    let host = match parsed.host() {
        Some(Host::Domain(d)) => d.to_ascii_lowercase(),
        Some(Host::Ipv4(_)) | Some(Host::Ipv6(_)) | None => {
            return Err(DomainError::NoHost(url.to_string()))
        }
    };
    let host = host.trim_end_matches('.');
    let domain = psl::domain_str(host)
        .ok_or_else(|| DomainError::NoRegistrableDomain(host.to_string()))?;
    Ok(domain.strip_prefix("www.").unwrap_or(domain).to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("domain list {source_name}, line {line}: {error}")]
pub struct DomainListError {
    pub source_name: String,
    pub line: usize,
    pub error: DomainError,
}

/// Normalized set of low-credibility registrable domains.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DomainList {
    domains: BTreeSet<String>,
    source_name: String,
}

impl DomainList {
    pub fn new(source_name: impl Into<String>) -> Self {
        Self { domains: BTreeSet::new(), source_name: source_name.into() }
    }

    /// Parses the plain-text format: one domain per line, `#` comments and
    /// blank lines ignored.
    pub fn from_text(source_name: impl Into<String>, text: &str) -> Result<Self, DomainListError> {
        let mut list = Self::new(source_name);
        for (i, raw) in text.lines().enumerate() {
            let entry = raw.split('#').next().unwrap_or("").trim();
            if entry.is_empty() {
                continue;
            }
            list.insert(entry).map_err(|error| DomainListError {
                source_name: list.source_name.clone(),
                line: i + 1,
                error,
            })?;
        }
        Ok(list)
    }

    /// Adds an entry after normalizing it to its registrable domain.
    pub fn insert(&mut self, entry: &str) -> Result<(), DomainError> {
        let domain = extract_registrable_domain(entry)?;
        self.domains.insert(domain);
        Ok(())
    }

    /// Exact-match lookup on an already-normalized registrable domain.
    pub fn contains(&self, domain: &str) -> bool {
        self.domains.contains(domain)
    }

    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }

    pub fn source_name(&self) -> &str {
        &self.source_name
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.domains.iter().map(String::as_str)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# {}\n", self.source_name);
        for d in &self.domains {
            out.push_str(d);
            out.push('\n');
        }
        out
    }
}
