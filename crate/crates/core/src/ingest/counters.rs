use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

/// Shared ingest counters; safe to bump from parallel workers.
#[derive(Debug, Default)]
pub struct IngestCounters {
    pub urls_skipped: AtomicU64,
    pub links_expanded: AtomicU64,
    pub expansion_failures: AtomicU64,
}

impl IngestCounters {
    pub fn bump(c: &AtomicU64) {
        c.fetch_add(1, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> CounterSnapshot {
        CounterSnapshot {
            urls_skipped: self.urls_skipped.load(Ordering::Relaxed),
            links_expanded: self.links_expanded.load(Ordering::Relaxed),
            expansion_failures: self.expansion_failures.load(Ordering::Relaxed),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterSnapshot {
    pub urls_skipped: u64,
    pub links_expanded: u64,
    pub expansion_failures: u64,
}
