//! Corpus ingestion: record parsing, domain extraction, low-credibility
//! labeling and the observation/evaluation split.

mod counters;
mod domain;
mod expand;
mod io;
mod label;
mod period;
mod record;

pub use counters::{CounterSnapshot, IngestCounters};
pub use domain::{extract_registrable_domain, DomainError, DomainList, DomainListError};
pub use expand::{
    expand_short_link, ExpansionOutcome, LinkExpander, LinkResolver, OfflineResolver,
    ResolveError, ShortenerMapError, ShortenerSet, DEFAULT_HOP_LIMIT, DEFAULT_SHORTENERS,
};
pub use io::{
    create_text, load_domain_list, load_shortener_map, open_text, read_corpus,
    read_corpus_lenient, read_text, write_corpus, CorpusRead, IngestError,
};
pub use label::{label_low_credibility, LabeledRecord, Labeler};
pub use period::{split_periods, split_records, Interval, Period, PeriodError, PeriodSplit, SplitOutcome};
pub use record::{parse_record, RecordError, RetweetRef, TweetRecord};
