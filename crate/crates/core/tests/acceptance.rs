//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if
//! any criterion fails.

use std::time::Instant;

use primesums::heuristics::{
    cramer_exponent, cramer_log_no_solution_table, cramer_no_solution_table, empirical_min_length_stats,
};
use primesums::modular::modular_histogram;
use primesums::report::records_jsonl;
use primesums::verify::{records_path, DEFAULT_HEADROOM};
use primesums::{
    admissible_lengths, build_table, consecutive_sum, is_prime, minimal_odd_length, verify_range, Error, MinLenRecord,
    PrimeTable, SumQuery, VerifyOptions, VerifyParams, VerifyReport,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn(&Ctx) -> Outcome);

struct Ctx {
    table: PrimeTable,
    full: VerifyReport,
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn full_params() -> VerifyParams {
    VerifyParams::new(1, 1_000_000, 1001)
}

fn trial_division(v: u64) -> bool {
    if v < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= v {
        if v.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// 1. Full verification over the first million primes.
fn criterion_1(ctx: &Ctx) -> Outcome {
    let p = ctx.table.nth(1_000_000).map_err(|e| e.to_string())?;
    ensure(p == 15_485_863, || format!("p_1000000 = {p}"))?;
    let r = &ctx.full;
    ensure(r.counterexamples.is_empty(), || {
        format!("exhausted at {:?}", r.counterexamples)
    })?;
    ensure(r.parity_excluded == vec![1], || {
        "n = 1 not reported as parity exclusion".into()
    })?;
    ensure(r.records.len() == 999_999, || format!("{} records", r.records.len()))?;
    Ok(format!("0 counterexamples over n <= 10^6, p_1000000 = {p}"))
}

/// 2. Longest and next-longest chains.
fn criterion_2(ctx: &Ctx) -> Outcome {
    let top = ctx.full.top_records(usize::MAX);
    let first = top[0];
    let second = *top.iter().find(|r| r.k_min < first.k_min).ok_or("single k_min value")?;
    let want1 = MinLenRecord {
        n: 651511,
        p_n: 9788183,
        k_min: 349,
        sum: 3417024811,
    };
    let want2 = MinLenRecord {
        n: 448696,
        p_n: 6561461,
        k_min: 299,
        sum: 1962589843,
    };
    ensure(first == want1, || format!("max record {first:?}"))?;
    ensure(top.iter().filter(|r| r.k_min == 349).count() == 1, || {
        "349 not unique".into()
    })?;
    ensure(second == want2, || format!("runner-up {second:?}"))?;
    ensure(ctx.full.max_record == Some(want1), || {
        "report max_record differs".into()
    })?;
    Ok("349 @ 651511 (3417024811), 299 @ 448696 (1962589843)".into())
}

/// 3. First-sum check at the millionth prime.
fn criterion_3(ctx: &Ctx) -> Outcome {
    let s = consecutive_sum(&ctx.table, SumQuery::new(1_000_000, 3)).map_err(|e| e.to_string())?;
    ensure(s == 46_457_647, || format!("S_3 = {s}"))?;
    ensure(is_prime(s), || "46457647 reported composite".into())?;
    Ok("S_3(p_1000000) = 46457647, prime".into())
}

/// 4. Published K-sets: cardinality and listed prefix, element for element.
fn criterion_4(ctx: &Ctx) -> Outcome {
    let published: [(usize, &[usize], usize); 5] = [
        (2, &[9, 15, 17, 53, 55, 61, 65, 71, 75], 71),
        (3, &[3, 5, 11, 17, 25, 35, 37, 73, 75], 69),
        (4, &[3, 5, 11, 15, 21, 23, 25, 27, 33], 99),
        (651511, &[349, 379, 399, 405, 453, 483, 497, 499, 509], 32),
        (448696, &[299, 323, 339, 341, 347, 405, 439, 441, 551], 31),
    ];
    let mut problems = Vec::new();
    for (n, prefix, size) in published {
        let k = admissible_lengths(&ctx.table, n, 999).map_err(|e| e.to_string())?;
        if k.lengths.len() != size {
            problems.push(format!("n={n}: |K| = {} (want {size})", k.lengths.len()));
        }
        let got = &k.lengths[..prefix.len()];
        if got != prefix {
            let i = (0..prefix.len()).find(|&i| got[i] != prefix[i]).unwrap();
            let listed = consecutive_sum(&ctx.table, SumQuery::new(n, prefix[i])).unwrap();
            problems.push(format!(
                "n={n}: element {} is {} but published {} (S_{} = {listed}, {})",
                i + 1,
                got[i],
                prefix[i],
                prefix[i],
                if is_prime(listed) { "prime" } else { "composite" }
            ));
        }
    }
    ensure(problems.is_empty(), || problems.join("; "))?;
    Ok("|K| = 71, 69, 99, 32, 31 with published prefixes".into())
}

/// 5. Oracle equivalence for primality and the minimal-length search.
fn criterion_5(ctx: &Ctx) -> Outcome {
    for v in 0..=1_000_000u64 {
        ensure(is_prime(v) == trial_division(v), || format!("is_prime({v}) disagrees"))?;
    }
    let primes = ctx.table.primes();
    for n in 2..=10_000usize {
        let mut naive = None;
        for k in (3..=1001usize).step_by(2) {
            let s: u64 = primes[n - 1..n - 1 + k].iter().sum();
            if trial_division(s) {
                naive = Some((k, s));
                break;
            }
        }
        let got = minimal_odd_length(&ctx.table, n, 1001).map_err(|e| e.to_string())?;
        let got = got.record().map(|r| (r.k_min, r.sum));
        ensure(got == naive, || format!("n = {n}: {got:?} vs brute force {naive:?}"))?;
    }
    Ok("is_prime == trial division on [0, 10^6]; k_min == brute force for n <= 10^4".into())
}

/// 6. Parity law.
fn criterion_6(ctx: &Ctx) -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0006);
    for _ in 0..10_000 {
        let n = rng.gen_range(2..=1_000_000usize);
        let k = 2 * rng.gen_range(1..=499usize) + 1;
        let s = consecutive_sum(&ctx.table, SumQuery::new(n, k)).map_err(|e| e.to_string())?;
        ensure(s % 2 == 1, || format!("S_{k}(p_{n}) = {s} is even"))?;
    }
    for k in (3..=999).step_by(2) {
        let s = consecutive_sum(&ctx.table, SumQuery::new(1, k)).map_err(|e| e.to_string())?;
        ensure(s % 2 == 0, || format!("S_{k}(2) = {s} is odd"))?;
    }
    ensure(
        matches!(minimal_odd_length(&ctx.table, 1, 1001), Err(Error::ParityObstruction)),
        || "n = 1 not rejected".into(),
    )?;
    Ok("10^4 random odd sums from n >= 2 odd; all odd sums from 2 even".into())
}

/// 7. Cramér product: strictly decreasing, log matches the exponential
///    approximation within 10% at m = 10^4. Monotonicity is checked on the
///    log-product because at p = 3 the product drops below the smallest f64.
fn criterion_7(_: &Ctx) -> Outcome {
    let mut notes = Vec::new();
    for p in [3.0f64, 15_485_863.0] {
        let logs = cramer_log_no_solution_table(p, 10_000);
        ensure(logs[0] < 0.0, || format!("p={p}: first factor not below 1"))?;
        ensure(logs.windows(2).all(|w| w[1] < w[0]), || {
            format!("p={p}: log-product not strictly decreasing")
        })?;
        let linear = cramer_no_solution_table(p, 10_000);
        ensure(linear.windows(2).all(|w| w[1] <= w[0]), || {
            format!("p={p}: product increases")
        })?;
        ensure(linear.iter().all(|&v| (0.0..1.0).contains(&v)), || {
            format!("p={p}: product outside [0, 1)")
        })?;
        let exponent = cramer_exponent(p, 10_000);
        let rel = (logs[9_999] + exponent).abs() / exponent;
        ensure(rel <= 0.10, || format!("p={p}: relative error {rel}"))?;
        notes.push(format!("p={p}: ln P = {:.2}, rel err {rel:.4}", logs[9_999]));
    }
    Ok(notes.join(", "))
}

/// 8. Heuristic-vs-empirical ratios over n in [10^5, 10^6].
fn criterion_8(ctx: &Ctx) -> Outcome {
    let slice: Vec<MinLenRecord> = ctx
        .full
        .records
        .iter()
        .filter(|r| (100_000..=1_000_000).contains(&r.n))
        .copied()
        .collect();
    let all = empirical_min_length_stats(&slice).map_err(|e| e.to_string())?;
    ensure((0.2..=5.0).contains(&all.ratio_mean), || {
        format!("mean/ln p = {}", all.ratio_mean)
    })?;
    ensure((0.2..=5.0).contains(&all.dispersion), || {
        format!("sd/mean = {}", all.dispersion)
    })?;

    let decade = |p: u64| (p as f64).log10().floor() as i32;
    let lo = decade(slice.first().unwrap().p_n);
    let hi = decade(slice.last().unwrap().p_n);
    let ratio_in = |d: i32| {
        let recs: Vec<_> = slice.iter().filter(|r| decade(r.p_n) == d).copied().collect();
        empirical_min_length_stats(&recs).map(|s| s.ratio_mean)
    };
    let r_lo = ratio_in(lo).map_err(|e| e.to_string())?;
    let r_hi = ratio_in(hi).map_err(|e| e.to_string())?;
    let factor = r_lo.max(r_hi) / r_lo.min(r_hi);
    ensure(factor < 2.0, || format!("decade ratios {r_lo} vs {r_hi}"))?;
    Ok(format!(
        "mean/ln p = {:.4}, decade 10^{lo}: {r_lo:.4}, 10^{hi}: {r_hi:.4} (x{factor:.3}), sd/mean = {:.4}",
        all.ratio_mean, all.dispersion
    ))
}

/// 9. Divisibility by small primes near 1/l.
fn criterion_9(ctx: &Ctx) -> Outcome {
    let mut notes = Vec::new();
    for l in [3u64, 5, 7] {
        for n in [10usize, 100, 1000] {
            let h = modular_histogram(&ctx.table, n, l, 99_999).map_err(|e| e.to_string())?;
            let freq = h.counts[0] as f64 / h.total() as f64;
            let target = 1.0 / l as f64;
            ensure((freq - target).abs() <= 0.5 * target, || {
                format!("l={l} n={n}: freq {freq} counts {:?}", h.counts)
            })?;
            notes.push(format!("l={l},n={n}:{:?}", h.counts));
        }
    }
    Ok(format!("all within 50% of 1/l; counts {}", notes.join(" ")))
}

/// 10. Byte-identical records across thread counts and kill/resume.
fn criterion_10(ctx: &Ctx) -> Outcome {
    let params = full_params();
    let reference = records_jsonl(&ctx.full.records);
    for threads in [4, 8] {
        let opts = VerifyOptions {
            parallelism: threads,
            ..VerifyOptions::default()
        };
        let r = verify_range(&ctx.table, &params, &opts).map_err(|e| e.to_string())?;
        ensure(records_jsonl(&r.records) == reference, || {
            format!("threads={threads} differs")
        })?;
        ensure(r == ctx.full, || format!("threads={threads} report differs"))?;
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let ckpt = dir.path().join("run.ckpt");
    let halted = VerifyOptions {
        parallelism: 4,
        checkpoint: Some(ckpt.clone()),
        halt_after_chunks: Some(101),
    };
    match verify_range(&ctx.table, &params, &halted) {
        Err(Error::Interrupted { completed_chunks: 101 }) => {}
        other => {
            return Err(format!(
                "expected interruption, got {:?}",
                other.map(|r| r.records.len())
            ))
        }
    }
    // a torn write past the last checkpointed chunk, as left by a crash
    let companion = records_path(&ckpt);
    let mut bytes = std::fs::read(&companion).map_err(|e| e.to_string())?;
    bytes.extend_from_slice(b"{\"n\":413697,\"p\":59");
    std::fs::write(&companion, bytes).map_err(|e| e.to_string())?;

    let resumed = VerifyOptions {
        parallelism: 8,
        checkpoint: Some(ckpt),
        halt_after_chunks: None,
    };
    let r = verify_range(&ctx.table, &params, &resumed).map_err(|e| e.to_string())?;
    ensure(records_jsonl(&r.records) == reference, || "resumed run differs".into())?;
    ensure(r == ctx.full, || "resumed report differs".into())?;
    let on_disk = std::fs::read(&companion).map_err(|e| e.to_string())?;
    ensure(on_disk == reference, || "checkpoint records file differs".into())?;
    Ok("threads 1/4/8 and halt-at-chunk-101 + resume byte-identical".into())
}

fn main() {
    let t0 = Instant::now();
    let params = full_params();
    let table = build_table(params.required_primes(), DEFAULT_HEADROOM).expect("table");
    let full = verify_range(&table, &params, &VerifyOptions::default()).expect("full verification");
    let ctx = Ctx { table, full };
    println!(
        "setup: {} primes, full verification in {:.1?}",
        ctx.table.count(),
        t0.elapsed()
    );

    let criteria: [Criterion; 10] = [
        ("full verification n <= 10^6", criterion_1),
        ("record chains", criterion_2),
        ("first-sum check", criterion_3),
        ("K-set cardinalities and prefixes", criterion_4),
        ("oracle equivalence", criterion_5),
        ("parity law", criterion_6),
        ("Cramer product behaviour", criterion_7),
        ("heuristic vs empirical ratios", criterion_8),
        ("divisibility frequency", criterion_9),
        ("determinism and resume", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        match check(&ctx) {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{:.1?}]", i + 1, t.elapsed()),
            Err(detail) => {
                println!("criterion {:>2} FAIL  {name}: {detail} [{:.1?}]", i + 1, t.elapsed());
                failed.push(i + 1);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
