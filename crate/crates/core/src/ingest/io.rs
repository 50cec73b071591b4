//! Corpus and list file readers. Paths ending in `.gz` are decompressed.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use rayon::prelude::*;
use thiserror::Error;

use super::domain::{DomainList, DomainListError};
use super::expand::{OfflineResolver, ShortenerMapError};
use super::record::{parse_record, RecordError, TweetRecord};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}: {source}", path.display())]
    Record {
        path: PathBuf,
        #[source]
        source: RecordError,
    },
    #[error(transparent)]
    DomainList(#[from] DomainListError),
    #[error("{}: {source}", path.display())]
    ShortenerMap {
        path: PathBuf,
        #[source]
        source: ShortenerMapError,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> IngestError + '_ {
    move |source| IngestError::Io { path: path.to_path_buf(), source }
}

fn is_gzip(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("gz"))
}

/// Opens `path` for buffered reading, transparently gunzipping `.gz` files.
pub fn open_text(path: &Path) -> Result<Box<dyn BufRead + Send>, IngestError> {
    let f = File::open(path).map_err(io_err(path))?;
    Ok(if is_gzip(path) {
        Box::new(BufReader::new(GzDecoder::new(f)))
    } else {
        Box::new(BufReader::new(f))
    })
}

pub fn read_text(path: &Path) -> Result<String, IngestError> {
    let mut s = String::new();
    open_text(path)?.read_to_string(&mut s).map_err(io_err(path))?;
    Ok(s)
}

/// Creates `path` for writing, gzip-compressing when it ends in `.gz`.
pub fn create_text(path: &Path) -> Result<Box<dyn Write>, IngestError> {
    let f = File::create(path).map_err(io_err(path))?;
    Ok(if is_gzip(path) {
        Box::new(BufWriter::new(GzEncoder::new(f, Compression::fast())))
    } else {
        Box::new(BufWriter::new(f))
    })
}

/// Result of a lenient read: good records plus the per-line errors.
#[derive(Debug, Default)]
pub struct CorpusRead {
    pub records: Vec<TweetRecord>,
    pub errors: Vec<RecordError>,
    pub lines: usize,
}

fn parse_lines(lines: Vec<String>) -> Vec<Result<TweetRecord, RecordError>> {
    lines
        .into_par_iter()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_record(&l, i + 1))
        .collect()
}

fn read_lines(path: &Path) -> Result<Vec<String>, IngestError> {
    open_text(path)?.lines().collect::<Result<_, _>>().map_err(io_err(path))
}

/// Reads a line-delimited JSON corpus, keeping malformed lines as errors.
pub fn read_corpus_lenient(path: &Path) -> Result<CorpusRead, IngestError> {
    let lines = read_lines(path)?;
    let n = lines.len();
    let mut out = CorpusRead { lines: n, ..Default::default() };
    for r in parse_lines(lines) {
        match r {
            Ok(rec) => out.records.push(rec),
            Err(e) => out.errors.push(e),
        }
    }
    Ok(out)
}

/// Reads a corpus, failing on the first malformed or invalid line.
pub fn read_corpus(path: &Path) -> Result<Vec<TweetRecord>, IngestError> {
    parse_lines(read_lines(path)?)
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|source| IngestError::Record { path: path.to_path_buf(), source })
}

pub fn write_corpus(path: &Path, records: &[TweetRecord]) -> Result<(), IngestError> {
    let mut w = create_text(path)?;
    for r in records {
        writeln!(w, "{}", r.to_json_line()).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn load_domain_list(path: &Path) -> Result<DomainList, IngestError> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(DomainList::from_text(name, &read_text(path)?)?)
}

pub fn load_shortener_map(path: &Path) -> Result<OfflineResolver, IngestError> {
    OfflineResolver::from_tsv(&read_text(path)?)
        .map_err(|source| IngestError::ShortenerMap { path: path.to_path_buf(), source })
}
