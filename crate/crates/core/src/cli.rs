//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or domain error, 2 a search found an
//! exhaustion (or a reproduction item failed), 3 internal or I/O failure.
//! Every error is reported as a single `error[<kind>]: <reason>` line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::heuristics::{empirical_min_length_stats, heuristic_min_length_stats, model_registry, DEFAULT_MODEL};
use crate::modular::{divisibility_frequency, modular_histogram_with, LengthParity};
use crate::primality::{primality_registry, PrimalityTest, DEFAULT_PRIMALITY};
use crate::primes::{build_table, is_prime, PrimeTable};
use crate::report::{self, fmt_sig, FileDigest, FrequencyRow, Outcome, RunManifest};
use crate::search::{
    check_length_bound, check_start, MinLenOutcome, MinLenRecord, Searcher, DEFAULT_K_CAP, DEFAULT_WINDOW,
};
use crate::sums::{consecutive_sum, SumQuery};
use crate::verify::{VerifyOptions, VerifyParams, DEFAULT_CHUNK_SIZE, DEFAULT_HEADROOM};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FOUND: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "primesums",
    version,
    about = "Prime sums of consecutive primes: search, verification and heuristics"
)]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "PRIMESUMS_THREADS")]
    threads: Option<usize>,

    /// Primality backend.
    #[arg(long, global = true, default_value = DEFAULT_PRIMALITY)]
    primality: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimal odd length for every n in a range.
    Verify(VerifyArgs),
    /// Minimal odd length for a single n.
    Minlen(MinlenArgs),
    /// All admissible odd lengths up to a window.
    Lengths(LengthsArgs),
    /// Residue histograms or divisibility frequencies.
    Modular(ModularArgs),
    /// Heuristic predictions, optionally against recorded results.
    Heuristic(HeuristicArgs),
    /// Re-check every published value and print PASS/FAIL per item.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    from: usize,
    #[arg(long, default_value_t = 1_000_000)]
    to: usize,
    #[arg(long, default_value_t = DEFAULT_K_CAP)]
    k_cap: usize,
    #[arg(long, default_value_t = DEFAULT_CHUNK_SIZE)]
    chunk_size: usize,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Records as JSONL.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Heuristic comparison table as CSV.
    #[arg(long)]
    comparison: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, default_value = DEFAULT_MODEL)]
    model: String,
    #[arg(long, hide = true)]
    halt_after_chunks: Option<usize>,
}

#[derive(Debug, Args)]
struct MinlenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_K_CAP)]
    k_cap: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LengthsFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct LengthsArgs {
    #[arg(long, required = true, num_args = 1.., value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
    #[arg(long, value_enum, default_value_t = LengthsFormat::Csv)]
    format: LengthsFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("modulus").required(true).args(["q", "l"])))]
struct ModularArgs {
    #[arg(long, required = true, num_args = 1.., value_delimiter = ',')]
    n: Vec<usize>,
    /// Moduli for residue histograms.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    q: Vec<u64>,
    /// Odd primes for divisibility frequencies.
    #[arg(long, num_args = 1.., value_delimiter = ',', conflicts_with = "q")]
    l: Vec<u64>,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    k_max: usize,
    /// Histogram even lengths instead of odd ones.
    #[arg(long, requires = "q")]
    even: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["p", "n", "records"])))]
struct HeuristicArgs {
    /// Starting prime.
    #[arg(long)]
    p: Option<u64>,
    /// Starting index; the prime is looked up.
    #[arg(long)]
    n: Option<usize>,
    /// Records JSONL from `verify --out`, compared against the model.
    #[arg(long)]
    records: Option<PathBuf>,
    /// Number of odd lengths in the no-solution product table.
    #[arg(long, default_value_t = 1000)]
    m: u64,
    #[arg(long, default_value = DEFAULT_MODEL)]
    model: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReproduceArgs {
    /// Skip the full one-million-prime verification.
    #[arg(long)]
    quick: bool,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            let _ = writeln!(err, "error[usage]: {}", first.trim_start_matches("error: "));
            return EXIT_USAGE;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let (code, kind) = classify(&e);
            let _ = writeln!(err, "error[{kind}]: {}", e.to_string().replace('\n', " "));
            code
        }
    }
}

fn classify(e: &Error) -> (i32, &'static str) {
    match e {
        Error::ParityObstruction => (EXIT_USAGE, "parity"),
        Error::Domain(_) => (EXIT_USAGE, "domain"),
        Error::UnknownStrategy { .. } => (EXIT_USAGE, "usage"),
        Error::Io { .. } => (EXIT_INTERNAL, "io"),
        Error::CheckpointCorrupt { .. } | Error::CheckpointMismatch { .. } => (EXIT_INTERNAL, "checkpoint"),
        Error::Interrupted { .. } => (EXIT_INTERNAL, "interrupted"),
        Error::PrefixOverflow { .. } | Error::IndexOutOfRange { .. } | Error::Range { .. } => {
            (EXIT_INTERNAL, "internal")
        }
    }
}

struct Context {
    threads: usize,
    test: Arc<dyn PrimalityTest>,
}

impl Context {
    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(|e| Error::domain(format!("thread pool: {e}")))
    }
}

fn table_for(max_index: usize) -> Result<PrimeTable> {
    build_table(max_index, DEFAULT_HEADROOM)
}

fn io_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let threads = match cli.threads {
        Some(0) => return Err(Error::domain("--threads must be at least 1")),
        Some(t) => t,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let ctx = Context {
        threads,
        test: primality_registry().get(&cli.primality)?,
    };
    match &cli.command {
        Command::Verify(a) => verify(&ctx, a, out),
        Command::Minlen(a) => minlen(&ctx, a, out),
        Command::Lengths(a) => lengths(&ctx, a, out),
        Command::Modular(a) => modular(&ctx, a, out),
        Command::Heuristic(a) => heuristic(a, out),
        Command::Reproduce(a) => reproduce(&ctx, a, out),
    }
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<Option<FileDigest>> {
    match path {
        Some(p) => {
            let digest = report::write_bytes(p, text.as_bytes())?;
            Ok(Some(FileDigest {
                path: p.to_path_buf(),
                digest,
            }))
        }
        None => {
            out.write_all(text.as_bytes()).map_err(io_err)?;
            Ok(None)
        }
    }
}

fn verify(ctx: &Context, a: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let started_at = report::timestamp();
    let params = VerifyParams {
        from: a.from,
        to: a.to,
        k_cap: a.k_cap,
        chunk_size: a.chunk_size,
    };
    params.validate()?;
    let model = model_registry().get(&a.model)?;
    let table = table_for(params.required_primes())?;
    let options = VerifyOptions {
        parallelism: ctx.threads,
        checkpoint: a.checkpoint.clone(),
        halt_after_chunks: a.halt_after_chunks,
    };
    let report = Searcher::with_test(&table, ctx.test.clone()).verify_range(&params, &options)?;

    let mut files = Vec::new();
    if let Some(path) = &a.out {
        let digest = report::write_records(&report.records, path)?;
        files.push(FileDigest {
            path: path.clone(),
            digest,
        });
    }

    let w = |out: &mut dyn Write, s: String| out.write_all(s.as_bytes()).map_err(io_err);
    w(
        out,
        format!("range            : n = {} ..= {}\n", params.from, params.to),
    )?;
    w(
        out,
        format!("{:<17}: {}\n", format!("p_{}", params.to), table.nth(params.to)?),
    )?;
    w(out, format!("k_cap            : {}\n", params.k_cap))?;
    w(out, format!("records          : {}\n", report.records.len()))?;
    if !report.parity_excluded.is_empty() {
        w(
            out,
            "parity-excluded  : n = 1 (every odd-length sum from 2 is even)\n".to_string(),
        )?;
    }
    w(out, format!("counterexamples  : {}\n", report.counterexamples.len()))?;
    for n in &report.counterexamples {
        w(out, format!("  exhausted n = {n} (no odd k <= {})\n", params.k_cap))?;
    }
    for (label, r) in ["max k_min        ", "runner-up k_min  "]
        .iter()
        .zip(distinct_top(&report.top_records(usize::MAX)))
    {
        w(
            out,
            format!("{label}: {} at n = {} (p = {}, sum = {})\n", r.k_min, r.n, r.p_n, r.sum),
        )?;
    }

    if !report.records.is_empty() {
        let rows = report::comparison_table(&report.records, model.as_ref())?;
        w(out, "\n".to_string())?;
        w(out, report::render_comparison(&rows, model.as_ref()))?;
        if let Some(path) = &a.comparison {
            let digest = report::write_bytes(path, report::comparison_csv(&rows).as_bytes())?;
            files.push(FileDigest {
                path: path.clone(),
                digest,
            });
        }
    }

    if let Some(path) = &a.manifest {
        let manifest = RunManifest {
            digest_algorithm: report::DIGEST_ALGORITHM.into(),
            parameters: serde_json::json!({
                "subcommand": "verify",
                "from": params.from,
                "to": params.to,
                "k_cap": params.k_cap,
                "chunk_size": params.chunk_size,
                "threads": ctx.threads,
                "primality": ctx.test.name(),
                "model": model.name(),
                "table_size": table.count(),
                "checkpoint": a.checkpoint,
            }),
            started_at,
            finished_at: report::timestamp(),
            outcome: Outcome {
                counterexample_count: report.counterexamples.len(),
                counterexamples: report.counterexamples.clone(),
                max_record: report.max_record,
                files,
            },
        };
        manifest.write(path)?;
    }

    Ok(if report.counterexamples.is_empty() {
        EXIT_OK
    } else {
        EXIT_FOUND
    })
}

/// First record of each of the two largest distinct `k_min` values.
fn distinct_top(sorted: &[MinLenRecord]) -> Vec<MinLenRecord> {
    let mut out: Vec<MinLenRecord> = Vec::new();
    for r in sorted {
        if out.last().is_none_or(|last| last.k_min != r.k_min) {
            out.push(*r);
            if out.len() == 2 {
                break;
            }
        }
    }
    out
}

fn minlen(ctx: &Context, a: &MinlenArgs, out: &mut dyn Write) -> Result<i32> {
    check_start(a.n)?;
    check_length_bound("k_cap", a.k_cap)?;
    let table = table_for(a.n + a.k_cap - 1)?;
    let searcher = Searcher::with_test(&table, ctx.test.clone());
    match searcher.minimal_odd_length(a.n, a.k_cap)? {
        MinLenOutcome::Found(r) => {
            let line = serde_json::to_string(&r).expect("record serializes");
            writeln!(out, "{line}").map_err(io_err)?;
            Ok(EXIT_OK)
        }
        MinLenOutcome::Exhausted { n, p_n, k_cap } => {
            writeln!(
                out,
                "exhausted: n = {n}, p = {p_n}, no odd k <= {k_cap} gives a prime sum"
            )
            .map_err(io_err)?;
            Ok(EXIT_FOUND)
        }
    }
}

fn lengths(ctx: &Context, a: &LengthsArgs, out: &mut dyn Write) -> Result<i32> {
    check_length_bound("window", a.window)?;
    for &n in &a.n {
        check_start(n)?;
    }
    let max_n = a.n.iter().copied().max().unwrap_or(2);
    let table = table_for(max_n + a.window - 1)?;
    let searcher = Searcher::with_test(&table, ctx.test.clone());
    let sets = ctx.pool()?.install(|| {
        a.n.par_iter()
            .map(|&n| searcher.admissible_lengths(n, a.window))
            .collect::<Result<Vec<_>>>()
    })?;
    let text = match a.format {
        LengthsFormat::Csv => report::lengths_csv(&sets),
        LengthsFormat::Json => report::lengths_json(&sets),
    };
    emit(out, a.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn modular(ctx: &Context, a: &ModularArgs, out: &mut dyn Write) -> Result<i32> {
    check_length_bound("k_max", a.k_max)?;
    for &n in &a.n {
        check_start(n)?;
    }
    for &l in &a.l {
        if l == 2 || !is_prime(l) {
            return Err(Error::domain(format!("--l must be an odd prime, got {l}")));
        }
    }
    for &q in &a.q {
        if q < 2 {
            return Err(Error::domain(format!("--q must be at least 2, got {q}")));
        }
    }
    let max_n = a.n.iter().copied().max().unwrap_or(2);
    let table = table_for(max_n + a.k_max - 1)?;
    let pool = ctx.pool()?;
    if !a.q.is_empty() {
        let parity = if a.even { LengthParity::Even } else { LengthParity::Odd };
        let jobs: Vec<(usize, u64)> = a.n.iter().flat_map(|&n| a.q.iter().map(move |&q| (n, q))).collect();
        let hists = pool.install(|| {
            jobs.par_iter()
                .map(|&(n, q)| modular_histogram_with(&table, n, q, a.k_max, parity))
                .collect::<Result<Vec<_>>>()
        })?;
        emit(out, a.out.as_deref(), &report::histogram_csv(&hists))?;
        if a.out.is_some() {
            for h in &hists {
                let spread = h.spread().map_or("-".to_string(), fmt_sig);
                writeln!(out, "n = {}, q = {}: max/min nonempty bucket = {spread}", h.n, h.q).map_err(io_err)?;
            }
        }
    } else {
        let jobs: Vec<(usize, u64)> = a.n.iter().flat_map(|&n| a.l.iter().map(move |&l| (n, l))).collect();
        let rows = pool.install(|| {
            jobs.par_iter()
                .map(|&(n, l)| {
                    divisibility_frequency(&table, n, l, a.k_max).map(|freq| FrequencyRow {
                        n,
                        l,
                        k_max: a.k_max,
                        freq,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })?;
        emit(out, a.out.as_deref(), &report::frequency_csv(&rows))?;
    }
    Ok(EXIT_OK)
}

fn heuristic(a: &HeuristicArgs, out: &mut dyn Write) -> Result<i32> {
    let model = model_registry().get(&a.model)?;
    if let Some(path) = &a.records {
        let records = report::read_records(path)?;
        let stats = empirical_min_length_stats(&records)?;
        let rows = report::comparison_table(&records, model.as_ref())?;
        let mut text = String::new();
        text.push_str(&format!(
            "records {}  mean k_min {}  variance {}  mean/ln p {}  var/(ln p)^2 {}  sd/mean {}  geometric TV {}\n\n",
            stats.count,
            fmt_sig(stats.mean_k_min),
            fmt_sig(stats.variance_k_min),
            fmt_sig(stats.ratio_mean),
            fmt_sig(stats.ratio_variance),
            fmt_sig(stats.dispersion),
            fmt_sig(stats.geometric_tv)
        ));
        text.push_str(&report::render_comparison(&rows, model.as_ref()));
        out.write_all(text.as_bytes()).map_err(io_err)?;
        if let Some(csv) = &a.out {
            report::write_bytes(csv, report::comparison_csv(&rows).as_bytes())?;
        }
        return Ok(EXIT_OK);
    }
    let p = match (a.p, a.n) {
        (Some(p), _) => p,
        (None, Some(n)) => table_for(n)?.nth(n)?,
        (None, None) => unreachable!("clap requires a source"),
    };
    let r = heuristic_min_length_stats(p as f64, a.m)?;
    let csv = report::heuristic_csv(std::slice::from_ref(&r));
    if let Some(path) = &a.out {
        report::write_bytes(path, csv.as_bytes())?;
    }
    let mut text = String::new();
    if a.out.is_none() {
        text.push_str(&csv);
        text.push('\n');
    }
    let ln_p = (p as f64).ln();
    text.push_str(&format!(
        "{} model: mean k_min {}, variance {}\n",
        model.name(),
        fmt_sig(model.expected(ln_p)),
        fmt_sig(model.variance(ln_p))
    ));
    text.push_str(&format!("{:>10} {:>14} {:>14}\n", "m", "P(no prime)", "ln P"));
    let mut m = 1u64;
    while m <= a.m {
        let i = (m - 1) as usize;
        text.push_str(&format!(
            "{:>10} {:>14} {:>14}\n",
            m,
            fmt_sig(r.no_solution_probs[i]),
            fmt_sig(r.ln_no_solution_probs[i])
        ));
        m *= 10;
    }
    out.write_all(text.as_bytes()).map_err(io_err)?;
    Ok(EXIT_OK)
}

struct Item {
    name: String,
    failure: Option<String>,
}

fn check(name: impl Into<String>, ok: bool, detail: impl FnOnce() -> String) -> Item {
    Item {
        name: name.into(),
        failure: (!ok).then(detail),
    }
}

/// Published K-set prefixes for odd lengths up to 999.
pub const PUBLISHED_K_SETS: [(usize, u64, &[usize], usize, usize); 5] = [
    (651511, 9788183, &[349, 379, 399, 405, 453, 483, 497, 499, 509], 999, 32),
    (2, 3, &[9, 15, 17, 53, 55, 61, 65, 71, 75], 977, 71),
    (3, 5, &[3, 5, 11, 17, 25, 35, 37, 73, 75], 997, 69),
    (4, 7, &[3, 5, 11, 15, 21, 23, 25, 27, 33], 993, 99),
    (448696, 6561461, &[299, 323, 339, 341, 347, 405, 439, 441, 551], 969, 31),
];

fn reproduce(ctx: &Context, a: &ReproduceArgs, out: &mut dyn Write) -> Result<i32> {
    let table = table_for(1_000_000 + 1000)?;
    let searcher = Searcher::with_test(&table, ctx.test.clone());
    let mut items = Vec::new();

    let p = table.nth(1_000_000)?;
    items.push(check("p_1000000 = 15485863", p == 15485863, || format!("got {p}")));
    let s = consecutive_sum(&table, SumQuery::new(1_000_000, 3))?;
    items.push(check(
        "S_3(p_1000000) = 46457647 and prime",
        s == 46457647 && ctx.test.is_prime(s),
        || format!("got {s}"),
    ));
    for (n, p, k, sum) in [
        (651511, 9788183, 349, 3417024811u64),
        (448696, 6561461, 299, 1962589843),
    ] {
        let got = searcher.minimal_odd_length(n, 1001)?;
        let ok = got.record().is_some_and(|r| r.p_n == p && r.k_min == k && r.sum == sum);
        items.push(check(format!("k_min(p_{n}) = {k}, S = {sum}"), ok, || {
            format!("got {got:?}")
        }));
    }
    for (n, p, prefix, last, size) in PUBLISHED_K_SETS {
        let set = searcher.admissible_lengths(n, 999)?;
        let got_prefix = &set.lengths[..prefix.len().min(set.lengths.len())];
        let ok = set.p_n == p && got_prefix == prefix && set.lengths.last() == Some(&last) && set.lengths.len() == size;
        items.push(check(
            format!("K(p_{n}) |K| = {size}, prefix and last element"),
            ok,
            || {
                let mut d = format!(
                    "|K| = {}, prefix {:?}, last {:?}",
                    set.lengths.len(),
                    got_prefix,
                    set.lengths.last()
                );
                if let Some(i) = (0..got_prefix.len()).find(|&i| got_prefix[i] != prefix[i]) {
                    let listed = prefix[i];
                    let s = consecutive_sum(&table, SumQuery::new(n, listed)).unwrap_or(0);
                    d.push_str(&format!(
                        "; listed {listed} at position {} but S_{listed} = {s} is {}",
                        i + 1,
                        if ctx.test.is_prime(s) { "prime" } else { "composite" }
                    ));
                }
                d
            },
        ));
    }
    if !a.quick {
        let params = VerifyParams::new(1, 1_000_000, 1001);
        let options = VerifyOptions {
            parallelism: ctx.threads,
            ..VerifyOptions::default()
        };
        let report = searcher.verify_range(&params, &options)?;
        items.push(check(
            "no counterexample for n <= 10^6",
            report.counterexamples.is_empty(),
            || format!("exhausted at {:?}", report.counterexamples),
        ));
        let top = distinct_top(&report.top_records(usize::MAX));
        let pair = |i: usize| top.get(i).map(|r| (r.n, r.k_min, r.sum));
        items.push(check(
            "longest chain n = 651511, k = 349",
            pair(0) == Some((651511, 349, 3417024811)),
            || format!("got {:?}", pair(0)),
        ));
        items.push(check(
            "next longest chain n = 448696, k = 299",
            pair(1) == Some((448696, 299, 1962589843)),
            || format!("got {:?}", pair(1)),
        ));
    }

    let mut failed = 0;
    for item in &items {
        match &item.failure {
            None => writeln!(out, "PASS  {}", item.name),
            Some(d) => {
                failed += 1;
                writeln!(out, "FAIL  {}: {d}", item.name)
            }
        }
        .map_err(io_err)?;
    }
    writeln!(out, "{} of {} items passed", items.len() - failed, items.len()).map_err(io_err)?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FOUND })
}
