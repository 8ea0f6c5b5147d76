//! Range verification over contiguous chunks of starting indices, with an
//! optional crash-safe checkpoint.
//!
//! Chunks are evaluated in waves on a dedicated thread pool and merged by
//! chunk index, so the report does not depend on the thread count. When a
//! checkpoint path is given, two files are maintained:
//!
//! * `<path>`: a JSONL header line with the run parameters followed by one
//!   `{"chunk","max_k","max_n","exhausted"}` line per completed chunk. The
//!   file is rewritten through a temporary file and renamed after each wave.
//! * `<path>.records`: the records of every completed chunk, ascending by
//!   `n`. Lines past the last checkpointed chunk are dropped on resume.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primes::PrimeTable;
use crate::search::{check_length_bound, MinLenOutcome, MinLenRecord, Searcher};

pub const DEFAULT_CHUNK_SIZE: usize = 4096;
/// Extra primes beyond `to + k_cap - 1` when a table is sized for a run.
pub const DEFAULT_HEADROOM: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyParams {
    pub from: usize,
    pub to: usize,
    pub k_cap: usize,
    pub chunk_size: usize,
}

impl VerifyParams {
    pub fn new(from: usize, to: usize, k_cap: usize) -> Self {
        VerifyParams {
            from,
            to,
            k_cap,
            chunk_size: DEFAULT_CHUNK_SIZE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.from == 0 {
            return Err(Error::domain("range start must be at least 1"));
        }
        if self.from > self.to {
            return Err(Error::domain(format!(
                "empty range: from {} > to {}",
                self.from, self.to
            )));
        }
        check_length_bound("k_cap", self.k_cap)?;
        if self.chunk_size == 0 {
            return Err(Error::domain("chunk size must be at least 1"));
        }
        Ok(())
    }

    /// Number of primes the table must hold.
    pub fn required_primes(&self) -> usize {
        self.to + self.k_cap - 1
    }

    pub fn chunk_count(&self) -> usize {
        (self.to - self.from) / self.chunk_size + 1
    }

    fn chunk_bounds(&self, index: usize) -> (usize, usize) {
        let lo = self.from + index * self.chunk_size;
        let hi = (lo + self.chunk_size - 1).min(self.to);
        (lo, hi)
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub parallelism: usize,
    pub checkpoint: Option<PathBuf>,
    /// Stop with [`Error::Interrupted`] once this many chunks are complete.
    pub halt_after_chunks: Option<usize>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            parallelism: 1,
            checkpoint: None,
            halt_after_chunks: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub params: VerifyParams,
    /// One record per searched `n`, ascending.
    pub records: Vec<MinLenRecord>,
    /// Largest `k_min`; ties go to the smallest `n`.
    pub max_record: Option<MinLenRecord>,
    /// Starting indices for which no odd `k <= k_cap` worked.
    pub counterexamples: Vec<usize>,
    /// `n = 1`, when in range: every odd-length sum from 2 is even.
    pub parity_excluded: Vec<usize>,
}

impl VerifyReport {
    /// The `count` records with the largest `k_min`, ties broken by smaller `n`.
    pub fn top_records(&self, count: usize) -> Vec<MinLenRecord> {
        let mut sorted = self.records.clone();
        sorted.sort_by(|a, b| b.k_min.cmp(&a.k_min).then(a.n.cmp(&b.n)));
        sorted.truncate(count);
        sorted
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct ChunkResult {
    records: Vec<MinLenRecord>,
    exhausted: Vec<usize>,
}

impl ChunkResult {
    fn entry(&self, chunk: usize) -> ChunkEntry {
        let best = max_record(&self.records);
        ChunkEntry {
            chunk,
            max_k: best.map_or(0, |r| r.k_min),
            max_n: best.map_or(0, |r| r.n),
            exhausted: self.exhausted.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct ChunkEntry {
    chunk: usize,
    max_k: usize,
    max_n: usize,
    exhausted: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Header {
    from: usize,
    to: usize,
    k_cap: usize,
    chunk_size: usize,
    primality: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct HeaderLine {
    header: Header,
}

fn max_record(records: &[MinLenRecord]) -> Option<MinLenRecord> {
    records
        .iter()
        .copied()
        .reduce(|best, r| if r.k_min > best.k_min { r } else { best })
}

impl Searcher<'_> {
    pub fn verify_range(&self, params: &VerifyParams, options: &VerifyOptions) -> Result<VerifyReport> {
        params.validate()?;
        if options.parallelism == 0 {
            return Err(Error::domain("parallelism must be at least 1"));
        }
        let needed = params.required_primes();
        if needed > self.table().count() {
            return Err(Error::Range {
                n: params.to,
                k: params.k_cap,
                needed,
                count: self.table().count(),
            });
        }

        let header = Header {
            from: params.from,
            to: params.to,
            k_cap: params.k_cap,
            chunk_size: params.chunk_size,
            primality: self.test().name().to_string(),
        };
        let mut store = match &options.checkpoint {
            Some(path) => Some(CheckpointStore::open(path, header, params)?),
            None => None,
        };
        let mut done: Vec<ChunkResult> = store.as_mut().map(|s| s.take_loaded()).unwrap_or_default();

        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.parallelism)
            .build()
            .map_err(|e| Error::domain(format!("thread pool: {e}")))?;
        let total = params.chunk_count();
        let wave = options.parallelism * 4;
        let stop = options.halt_after_chunks.unwrap_or(usize::MAX).min(total);

        while done.len() < stop {
            let start = done.len();
            let end = (start + wave).min(stop);
            let results: Vec<ChunkResult> = pool.install(|| {
                (start..end)
                    .into_par_iter()
                    .map(|c| self.run_chunk(params, c))
                    .collect()
            });
            if let Some(store) = store.as_mut() {
                store.commit(start, &results)?;
            }
            done.extend(results);
        }
        if done.len() < total {
            return Err(Error::Interrupted {
                completed_chunks: done.len(),
            });
        }

        let mut records = Vec::with_capacity(params.to - params.from + 1);
        let mut counterexamples = Vec::new();
        for chunk in done {
            records.extend(chunk.records);
            counterexamples.extend(chunk.exhausted);
        }
        Ok(VerifyReport {
            params: params.clone(),
            max_record: max_record(&records),
            records,
            counterexamples,
            parity_excluded: if params.from == 1 { vec![1] } else { Vec::new() },
        })
    }

    fn run_chunk(&self, params: &VerifyParams, index: usize) -> ChunkResult {
        let (lo, hi) = params.chunk_bounds(index);
        let mut out = ChunkResult {
            records: Vec::with_capacity(hi - lo + 1),
            exhausted: Vec::new(),
        };
        for n in lo.max(2)..=hi {
            match self.minimal_unchecked(n, params.k_cap) {
                MinLenOutcome::Found(r) => out.records.push(r),
                MinLenOutcome::Exhausted { n, .. } => out.exhausted.push(n),
            }
        }
        out
    }
}

pub fn verify_range(table: &PrimeTable, params: &VerifyParams, options: &VerifyOptions) -> Result<VerifyReport> {
    Searcher::new(table).verify_range(params, options)
}

/// Companion file holding the records of checkpointed chunks.
pub fn records_path(checkpoint: &Path) -> PathBuf {
    let mut name = checkpoint.as_os_str().to_owned();
    name.push(".records");
    PathBuf::from(name)
}

struct CheckpointStore {
    path: PathBuf,
    records_path: PathBuf,
    header_line: String,
    entry_lines: Vec<String>,
    loaded: Vec<ChunkResult>,
}

impl CheckpointStore {
    fn open(path: &Path, header: Header, params: &VerifyParams) -> Result<Self> {
        let header_line = serde_json::to_string(&HeaderLine { header: header.clone() }).expect("header serializes");
        let mut store = CheckpointStore {
            path: path.to_path_buf(),
            records_path: records_path(path),
            header_line,
            entry_lines: Vec::new(),
            loaded: Vec::new(),
        };
        if path.exists() {
            store.load(&header, params)?;
        } else {
            write_atomic(&store.records_path, b"")?;
            store.flush()?;
        }
        Ok(store)
    }

    fn take_loaded(&mut self) -> Vec<ChunkResult> {
        std::mem::take(&mut self.loaded)
    }

    fn corrupt(&self, path: &Path, line: usize, reason: impl Into<String>) -> Error {
        Error::CheckpointCorrupt {
            path: path.to_path_buf(),
            line,
            reason: reason.into(),
        }
    }

    fn load(&mut self, header: &Header, params: &VerifyParams) -> Result<()> {
        let file = File::open(&self.path).map_err(|e| Error::io(&self.path, e))?;
        let mut entries = Vec::new();
        let mut saw_header = false;
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(&self.path, e))?;
            let line_no = i + 1;
            if i == 0 {
                let found: HeaderLine = serde_json::from_str(&line)
                    .map_err(|e| self.corrupt(&self.path, line_no, format!("bad header: {e}")))?;
                if &found.header != header {
                    return Err(Error::CheckpointMismatch {
                        path: self.path.clone(),
                        reason: format!(
                            "checkpoint has {}, this run has {}",
                            serde_json::to_string(&found.header).unwrap_or_default(),
                            serde_json::to_string(header).unwrap_or_default()
                        ),
                    });
                }
                saw_header = true;
                continue;
            }
            let entry: ChunkEntry = serde_json::from_str(&line)
                .map_err(|e| self.corrupt(&self.path, line_no, format!("bad chunk entry: {e}")))?;
            let expected = entries.len();
            if entry.chunk != expected || expected >= params.chunk_count() {
                return Err(self.corrupt(
                    &self.path,
                    line_no,
                    format!("expected chunk {expected}, found {}", entry.chunk),
                ));
            }
            entries.push((line_no, entry, line));
        }
        if !saw_header {
            return Err(self.corrupt(&self.path, 1, "missing header"));
        }

        let covered_to = entries
            .last()
            .map(|(_, e, _)| params.chunk_bounds(e.chunk).1)
            .unwrap_or(0);
        let mut records: Vec<MinLenRecord> = Vec::new();
        if self.records_path.exists() {
            let file = File::open(&self.records_path).map_err(|e| Error::io(&self.records_path, e))?;
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| Error::io(&self.records_path, e))?;
                let rec: MinLenRecord = match serde_json::from_str(&line) {
                    Ok(r) => r,
                    // a torn final write past the checkpointed chunks is expected after a crash
                    Err(_) if records.last().map_or(covered_to == 0, |r| r.n >= covered_to) => break,
                    Err(e) => return Err(self.corrupt(&self.records_path, i + 1, format!("bad record: {e}"))),
                };
                if rec.n > covered_to {
                    break;
                }
                if records.last().is_some_and(|r| r.n >= rec.n) || rec.n < params.from {
                    return Err(self.corrupt(&self.records_path, i + 1, "records out of order"));
                }
                records.push(rec);
            }
        }

        let mut rest = records.as_slice();
        for (line_no, entry, text) in entries {
            let (lo, hi) = params.chunk_bounds(entry.chunk);
            let split = rest.partition_point(|r| r.n <= hi);
            let (chunk_records, tail) = rest.split_at(split);
            rest = tail;
            let chunk = ChunkResult {
                records: chunk_records.to_vec(),
                exhausted: entry.exhausted.clone(),
            };
            let excluded = usize::from(lo == 1);
            if chunk.entry(entry.chunk) != entry
                || chunk.records.len() + chunk.exhausted.len() + excluded != hi - lo + 1
            {
                return Err(self.corrupt(
                    &self.path,
                    line_no,
                    format!("chunk {} does not match its records", entry.chunk),
                ));
            }
            self.entry_lines.push(text);
            self.loaded.push(chunk);
        }

        let mut buf = Vec::new();
        for r in &records {
            push_json_line(&mut buf, r);
        }
        write_atomic(&self.records_path, &buf)?;
        Ok(())
    }

    fn commit(&mut self, first_chunk: usize, results: &[ChunkResult]) -> Result<()> {
        let mut buf = Vec::new();
        for chunk in results {
            for r in &chunk.records {
                push_json_line(&mut buf, r);
            }
        }
        let mut file = OpenOptions::new()
            .append(true)
            .open(&self.records_path)
            .map_err(|e| Error::io(&self.records_path, e))?;
        file.write_all(&buf)
            .and_then(|_| file.sync_data())
            .map_err(|e| Error::io(&self.records_path, e))?;
        for (i, chunk) in results.iter().enumerate() {
            let entry = chunk.entry(first_chunk + i);
            self.entry_lines
                .push(serde_json::to_string(&entry).expect("entry serializes"));
        }
        self.flush()
    }

    fn flush(&self) -> Result<()> {
        let mut text = String::with_capacity(64 * (self.entry_lines.len() + 1));
        text.push_str(&self.header_line);
        text.push('\n');
        for line in &self.entry_lines {
            text.push_str(line);
            text.push('\n');
        }
        write_atomic(&self.path, text.as_bytes())
    }
}

fn push_json_line<T: Serialize>(buf: &mut Vec<u8>, value: &T) {
    serde_json::to_writer(&mut *buf, value).expect("record serializes");
    buf.push(b'\n');
}

/// Write-temp-then-rename.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut file = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    file.write_all(bytes)
        .and_then(|_| file.sync_all())
        .map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
