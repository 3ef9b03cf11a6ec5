//! Streaming Matrix Market reader over any `BufRead`.
//!
//! One line buffer is reused for the whole file, so memory does not grow
//! with the number of entries.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rooflens_core::matrix::{MatrixMarketCounter, MtxError};
use rooflens_core::SparseMatrixStats;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Mtx(#[from] MtxError),
}

pub fn parse_stats<R: BufRead>(mut reader: R) -> Result<SparseMatrixStats, IngestError> {
    let mut counter = MatrixMarketCounter::new();
    let mut line = String::with_capacity(128);
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        counter.feed_line(&line)?;
    }
    Ok(counter.finish()?)
}

pub fn parse_stats_file(path: &Path) -> Result<SparseMatrixStats, IngestError> {
    parse_stats(BufReader::with_capacity(1 << 16, File::open(path)?))
}
