//! Run artifacts: record streams, K-sets, histograms, heuristic tables, and
//! the run manifest with content digests.
//!
//! Floats in CSV and tables use 6 significant digits; JSONL keeps exact
//! integers only.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use crate::error::{Error, Result};
use crate::heuristics::{empirical_min_length_stats, HeuristicReport, MinLengthModel};
use crate::modular::ModularHistogram;
use crate::search::{AdmissibleLengths, MinLenRecord};

pub const DIGEST_ALGORITHM: &str = "sha256";

/// Lower-case hex SHA-256 of some content.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Digest(pub String);

impl Digest {
    pub fn of(bytes: &[u8]) -> Self {
        Digest(hex::encode(Sha256::digest(bytes)))
    }

    pub fn of_file(path: &Path) -> Result<Self> {
        let mut file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut hasher = Sha256::new();
        std::io::copy(&mut file, &mut hasher).map_err(|e| Error::io(path, e))?;
        Ok(Digest(hex::encode(hasher.finalize())))
    }
}

impl std::fmt::Display for Digest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// `%g`-style rendering with 6 significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        trim_zeros(format!("{:.*}", (5 - exp) as usize, x))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

/// Writes `bytes` to `path` and returns their digest.
pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<Digest> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    Ok(Digest::of(bytes))
}

pub fn records_jsonl(records: &[MinLenRecord]) -> Vec<u8> {
    let mut buf = Vec::with_capacity(records.len() * 56);
    for r in records {
        serde_json::to_writer(&mut buf, r).expect("record serializes");
        buf.push(b'\n');
    }
    buf
}

/// One JSON object per line, ascending `n`.
pub fn write_records(records: &[MinLenRecord], path: &Path) -> Result<Digest> {
    if records.windows(2).any(|w| w[0].n >= w[1].n) {
        return Err(Error::domain("records must be strictly ascending by n"));
    }
    let bytes = records_jsonl(records);
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    out.write_all(&bytes)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))?;
    Ok(Digest::of(&bytes))
}

pub fn read_records(path: &Path) -> Result<Vec<MinLenRecord>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|e| Error::domain(format!("{}: line {}: {e}", path.display(), i + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

/// `n,p,k` with one row per admissible length.
pub fn lengths_csv(sets: &[AdmissibleLengths]) -> String {
    let mut s = String::from("n,p,k\n");
    for set in sets {
        for k in &set.lengths {
            let _ = writeln!(s, "{},{},{}", set.n, set.p_n, k);
        }
    }
    s
}

/// One compact JSON object per set.
pub fn lengths_json(sets: &[AdmissibleLengths]) -> String {
    let mut s = String::new();
    for set in sets {
        s.push_str(&serde_json::to_string(set).expect("k-set serializes"));
        s.push('\n');
    }
    s
}

pub fn histogram_csv(histograms: &[ModularHistogram]) -> String {
    let mut s = String::from("n,q,k_max,residue,count\n");
    for h in histograms {
        for (r, c) in h.counts.iter().enumerate() {
            let _ = writeln!(s, "{},{},{},{},{}", h.n, h.q, h.k_max, r, c);
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyRow {
    pub n: usize,
    pub l: u64,
    pub k_max: usize,
    pub freq: f64,
}

pub fn frequency_csv(rows: &[FrequencyRow]) -> String {
    let mut s = String::from("n,l,k_max,freq\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.n, r.l, r.k_max, fmt_sig(r.freq));
    }
    s
}

fn fmt_prime(p: f64) -> String {
    if p.fract() == 0.0 && p < 9.0e15 {
        format!("{}", p as u64)
    } else {
        fmt_sig(p)
    }
}

pub fn heuristic_csv(reports: &[HeuristicReport]) -> String {
    let mut s = String::from("p_n,expected_k_min,variance_k_min\n");
    for r in reports {
        let _ = writeln!(
            s,
            "{},{},{}",
            fmt_prime(r.p_n),
            fmt_sig(r.expected_k_min),
            fmt_sig(r.variance_k_min)
        );
    }
    s
}

/// Predicted-versus-observed `k_min` statistics for one decade of `p_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    /// Lower bound of the decade, a power of ten.
    pub bucket_lo: u64,
    pub count: usize,
    pub ln_mean_p: f64,
    pub mean_k_min: f64,
    pub predicted_mean: f64,
    pub ratio_mean: f64,
    pub variance_k_min: f64,
    pub predicted_variance: f64,
    pub ratio_variance: f64,
}

fn decade(p: u64) -> u64 {
    let mut lo = 1u64;
    while let Some(next) = lo.checked_mul(10) {
        if next > p {
            break;
        }
        lo = next;
    }
    lo
}

/// Buckets records by decade of `p_n`, ascending.
pub fn comparison_table(records: &[MinLenRecord], model: &dyn MinLengthModel) -> Result<Vec<ComparisonRow>> {
    if records.is_empty() {
        return Err(Error::domain("comparison table needs at least one record"));
    }
    let mut buckets: BTreeMap<u64, Vec<MinLenRecord>> = BTreeMap::new();
    for r in records {
        buckets.entry(decade(r.p_n)).or_default().push(*r);
    }
    buckets
        .into_iter()
        .map(|(bucket_lo, recs)| {
            let stats = empirical_min_length_stats(&recs)?;
            let predicted_mean = model.expected(stats.ln_mean_p);
            let predicted_variance = model.variance(stats.ln_mean_p);
            Ok(ComparisonRow {
                bucket_lo,
                count: stats.count,
                ln_mean_p: stats.ln_mean_p,
                mean_k_min: stats.mean_k_min,
                predicted_mean,
                ratio_mean: stats.mean_k_min / predicted_mean,
                variance_k_min: stats.variance_k_min,
                predicted_variance,
                ratio_variance: stats.variance_k_min / predicted_variance,
            })
        })
        .collect()
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut s = String::from(
        "p_decade,count,mean_k_min,predicted_mean,ratio_mean,variance_k_min,predicted_variance,ratio_variance\n",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.bucket_lo,
            r.count,
            fmt_sig(r.mean_k_min),
            fmt_sig(r.predicted_mean),
            fmt_sig(r.ratio_mean),
            fmt_sig(r.variance_k_min),
            fmt_sig(r.predicted_variance),
            fmt_sig(r.ratio_variance)
        );
    }
    s
}

pub fn render_comparison(rows: &[ComparisonRow], model: &dyn MinLengthModel) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "model: {}", model.name());
    let _ = writeln!(
        s,
        "{:>12} {:>8} {:>10} {:>10} {:>9} {:>11} {:>11} {:>9}",
        "p_decade", "count", "mean_k", "pred_mean", "ratio", "var_k", "pred_var", "ratio"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:>12} {:>8} {:>10} {:>10} {:>9} {:>11} {:>11} {:>9}",
            r.bucket_lo,
            r.count,
            fmt_sig(r.mean_k_min),
            fmt_sig(r.predicted_mean),
            fmt_sig(r.ratio_mean),
            fmt_sig(r.variance_k_min),
            fmt_sig(r.predicted_variance),
            fmt_sig(r.ratio_variance)
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub digest: Digest,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub counterexample_count: usize,
    pub counterexamples: Vec<usize>,
    pub max_record: Option<MinLenRecord>,
    pub files: Vec<FileDigest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub digest_algorithm: String,
    pub parameters: serde_json::Value,
    pub started_at: String,
    pub finished_at: String,
    pub outcome: Outcome,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<Digest> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        write_bytes(path, text.as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::domain(format!("{}: invalid manifest: {e}", path.display())))
    }

    /// Paths whose current content no longer matches the recorded digest.
    pub fn stale_files(&self) -> Result<Vec<PathBuf>> {
        let mut stale = Vec::new();
        for f in &self.outcome.files {
            match Digest::of_file(&f.path) {
                Ok(d) if d == f.digest => {}
                Ok(_) => stale.push(f.path.clone()),
                Err(Error::Io { source, .. }) if source.kind() == std::io::ErrorKind::NotFound => {
                    stale.push(f.path.clone())
                }
                Err(e) => return Err(e),
            }
        }
        Ok(stale)
    }
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}
