//! Acceptance criteria 1-8. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use fconv::cyclicconv::{cyclic_convolve, default_bound, CrtBasis, PrimePlan};
use fconv::domain::{flatten, unflatten, FiniteDomain, FunctionTable, TensorFunction};
use fconv::engine::{convolve, convolve_with, work_count, work_count_exhaustive, EngineOptions};
use fconv::io::{parse_function_table, parse_partition};
use fconv::oracle::{naive_convolve, naive_cyclic_convolve};
use fconv::partition::{build_partition, validate_partition, CyclicPartition, PartitionOptions};
use fconv::query::{query, query_with_padding};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_function(rng: &mut ChaCha8Rng, d: usize) -> FunctionTable {
    let flat: Vec<usize> = (0..d * d).map(|_| rng.gen_range(0..d)).collect();
    FunctionTable::square(d, &flat).unwrap()
}

fn random_tensor(rng: &mut ChaCha8Rng, d: usize, n: usize, m: i128) -> TensorFunction {
    let values = (0..d.pow(n as u32)).map(|_| rng.gen_range(-m..=m)).collect();
    TensorFunction::new(FiniteDomain::numeric(d).unwrap(), n, values).unwrap()
}

/// Builds and validates a partition; returns it if its cost is within `limit`.
fn checked_partition(f: &FunctionTable, limit: usize) -> Result<CyclicPartition, String> {
    let p = build_partition(f, PartitionOptions::default()).map_err(|e| e.to_string())?;
    if let Err(v) = validate_partition(f, &p) {
        return Err(format!("invalid partition: {}", v[0]));
    }
    if p.cost() > limit {
        return Err(format!("cost {} > {limit}", p.cost()));
    }
    Ok(p)
}

struct Shared {
    partitions: Vec<CyclicPartition>,
}

fn criterion_1(shared: &mut Shared) -> Result<String, String> {
    let mut max_cost = [0usize; 2];
    for (slot, (d, limit)) in [(2usize, 3usize), (3, 8)].into_iter().enumerate() {
        let count = d.pow((d * d) as u32);
        for code in 0..count {
            let f = FunctionTable::from_fn(d, d, d, |a, b| (code / d.pow((a * d + b) as u32)) % d).unwrap();
            let p = checked_partition(&f, limit).map_err(|e| format!("|D|={d} f#{code}: {e}"))?;
            max_cost[slot] = max_cost[slot].max(p.cost());
            shared.partitions.push(p);
        }
    }
    Ok(format!("16 + 19683 functions valid; max cost {} (<= 3) and {} (<= 8)", max_cost[0], max_cost[1]))
}

fn criterion_2(shared: &mut Shared) -> Result<String, String> {
    let mut r = rng(2);
    let mut summary = Vec::new();
    for (d, count, limit) in [(4usize, 1000usize, 13usize), (5, 500, 21), (6, 200, 30)] {
        let mut max_cost = 0;
        for i in 0..count {
            let f = random_function(&mut r, d);
            let p = checked_partition(&f, limit).map_err(|e| format!("|D|={d} sample {i}: {e}"))?;
            max_cost = max_cost.max(p.cost());
            shared.partitions.push(p);
        }
        summary.push(format!("|D|={d}: {count} ok, max cost {max_cost} <= {limit}"));
    }
    Ok(summary.join("; "))
}

fn criterion_3() -> Result<String, String> {
    let mut r = rng(3);
    for i in 0..200 {
        let d = r.gen_range(2..=4);
        let n = r.gen_range(1..=4);
        let m = r.gen_range(1..=10);
        let f = random_function(&mut r, d);
        let p = build_partition(&f, PartitionOptions::default()).map_err(|e| e.to_string())?;
        let g = random_tensor(&mut r, d, n, m);
        let h = random_tensor(&mut r, d, n, m);
        let got = convolve(&f, &p, &g, &h).map_err(|e| e.to_string())?;
        let expected = naive_convolve(&f, &g, &h).map_err(|e| e.to_string())?;
        if got != expected {
            return Err(format!("instance {i} (|D|={d}, n={n}, M={m}) differs from oracle"));
        }
    }
    Ok("200 instances bit-exact".into())
}

/// Ordered radix vectors with entries >= 2 and product <= `limit`.
fn radix_vectors(limit: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![(vec![], 1usize)];
    while let Some((v, prod)) = frontier.pop() {
        for r in 2..=limit / prod {
            let mut w: Vec<usize> = v.clone();
            w.push(r);
            out.push(w.clone());
            frontier.push((w, prod * r));
        }
    }
    out.sort();
    out
}

fn criterion_4() -> Result<String, String> {
    let mut r = rng(4);
    let mut shapes = radix_vectors(64);
    // unit axes as well
    shapes.extend([vec![1], vec![1, 3], vec![4, 1, 2], vec![1, 1, 1]]);
    for radices in &shapes {
        let size: usize = radices.iter().product();
        for _ in 0..20 {
            let g: Vec<i128> = (0..size).map(|_| r.gen_range(-1000..=1000)).collect();
            let h: Vec<i128> = (0..size).map(|_| r.gen_range(-1000..=1000)).collect();
            let bound = default_bound(radices, &g, &h).map_err(|e| e.to_string())?;
            let got = cyclic_convolve(&g, &h, radices, bound).map_err(|e| e.to_string())?;
            if got != naive_cyclic_convolve(&g, &h, radices) {
                return Err(format!("radices {radices:?} disagree with the naive convolution"));
            }
        }
    }
    let plan = PrimePlan::new(&[6, 4], 1u128 << 90).map_err(|e| e.to_string())?;
    let basis = CrtBasis::new(&plan.primes).map_err(|e| e.to_string())?;
    let half = basis.product() / 2;
    for _ in 0..10_000 {
        let x: i128 = r.gen_range(-(half as i128)..=(half as i128));
        let residues: Vec<u64> = plan.primes.iter().map(|&p| x.rem_euclid(p as i128) as u64).collect();
        let back = basis.combine_signed(&residues);
        if back != x {
            return Err(format!("CRT round trip of {x} gave {back}"));
        }
    }
    Ok(format!("{} radix vectors x 20 exact; 10^4 CRT round trips over {} primes", shapes.len(), plan.primes.len()))
}

fn criterion_5() -> Result<String, String> {
    let mut r = rng(5);
    let mut parity = [0usize; 2];
    for i in 0..100 {
        let d = r.gen_range(2..=3);
        let n = r.gen_range(1..=4);
        let f = random_function(&mut r, d);
        let g = random_tensor(&mut r, d, n, 10);
        let h = random_tensor(&mut r, d, n, 10);
        let v: Vec<usize> = (0..n).map(|_| r.gen_range(0..d)).collect();
        let p = build_partition(&f, PartitionOptions::default()).map_err(|e| e.to_string())?;
        let full = convolve(&f, &p, &g, &h).map_err(|e| e.to_string())?;
        let expected = full.values()[flatten(&v, &vec![d; n]).unwrap()];
        let got = query(&f, &g, &h, &v).map_err(|e| e.to_string())?;
        if got != expected {
            return Err(format!("instance {i}: query {got} vs convolve {expected}"));
        }
        parity[n % 2] += 1;
    }
    for i in 0..20 {
        let d = r.gen_range(2..=3);
        let n = [1, 3][i % 2];
        let f = random_function(&mut r, d);
        let g = random_tensor(&mut r, d, n, 10);
        let h = random_tensor(&mut r, d, n, 10);
        let v = unflatten(r.gen_range(0..d.pow(n as u32)), &vec![d; n]).unwrap();
        let reference = query_with_padding(&f, &g, &h, &v, 0, 0).map_err(|e| e.to_string())?;
        for pad in 0..d {
            let got = query_with_padding(&f, &g, &h, &v, pad, pad).map_err(|e| e.to_string())?;
            if got != reference {
                return Err(format!("padding instance {i}: d={pad} gives {got}, d=0 gives {reference}"));
            }
        }
    }
    Ok(format!("100 queries exact ({} even n, {} odd n); 20 padding instances invariant", parity[0], parity[1]))
}

fn criterion_6(shared: &Shared) -> Result<String, String> {
    for (i, p) in shared.partitions.iter().enumerate() {
        let c = p.cost() as u128;
        for n in 0..=6u32 {
            let w = work_count(p, n as usize);
            if w != c.pow(n) {
                return Err(format!("partition {i}: work_count(n={n}) = {w} != {c}^{n}"));
            }
        }
        // full enumeration of [m]^n for the small arities
        for n in 0..=2u32 {
            if work_count_exhaustive(p, n as usize) != c.pow(n) {
                return Err(format!("partition {i}: type enumeration at n={n} != {c}^{n}"));
            }
        }
    }
    Ok(format!("{} partitions, n = 0..6", shared.partitions.len()))
}

fn fastest<T>(runs: usize, mut f: impl FnMut() -> T) -> (T, Duration) {
    let mut best = Duration::MAX;
    let mut out = None;
    for _ in 0..runs {
        let t = Instant::now();
        let r = f();
        best = best.min(t.elapsed());
        out = Some(r);
    }
    (out.unwrap(), best)
}

fn criterion_7() -> Result<String, String> {
    let f = FunctionTable::from_fn(2, 2, 2, |a, b| a ^ b).unwrap();
    let p = build_partition(&f, PartitionOptions::default()).map_err(|e| e.to_string())?;
    let n = 12;
    let mut r = rng(7);
    let g = random_tensor(&mut r, 2, n, 10);
    let h = random_tensor(&mut r, 2, n, 10);
    let work = work_count(&p, n);
    let pairs = 4u128.pow(n as u32);
    if work != 1 << 12 {
        return Err(format!("work_count {work} != 2^12"));
    }
    let ((engine_out, stats), t_engine) = fastest(5, || convolve_with(&f, &p, &g, &h, &EngineOptions::default()).unwrap());
    let (naive_out, t_naive) = fastest(3, || naive_convolve(&f, &g, &h).unwrap());
    if engine_out != naive_out {
        return Err("engine and naive outputs differ".into());
    }
    if stats.work != work {
        return Err(format!("engine performed {} units, expected {work}", stats.work));
    }
    let ratio = t_naive.as_secs_f64() / t_engine.as_secs_f64();
    let msg = format!(
        "work {work} vs {pairs} pairs; engine {:.3} ms, naive {:.3} ms ({ratio:.1}x)",
        t_engine.as_secs_f64() * 1e3,
        t_naive.as_secs_f64() * 1e3
    );
    if t_engine * 10 >= t_naive {
        return Err(msg);
    }
    Ok(msg)
}

fn criterion_8() -> Result<String, String> {
    let table = std::fs::read_to_string(format!("{FIXTURES}/worked_example.json")).map_err(|e| e.to_string())?;
    let f = parse_function_table(&table).map_err(|e| e.to_string())?;
    let built = build_partition(&f, PartitionOptions::default()).map_err(|e| e.to_string())?;
    validate_partition(&f, &built).map_err(|v| format!("built partition invalid: {}", v[0]))?;
    if built.cost() > 14 {
        return Err(format!("built cost {} > 14", built.cost()));
    }
    let doc = std::fs::read_to_string(format!("{FIXTURES}/worked_example_partition.json")).map_err(|e| e.to_string())?;
    let fixture = parse_partition(&doc, &f).map_err(|e| e.to_string())?;
    validate_partition(&f, &fixture).map_err(|v| format!("fixture invalid: {}", v[0]))?;
    if fixture.cost() != 14 {
        return Err(format!("fixture cost {} != 14", fixture.cost()));
    }
    Ok(format!("built cost {}; fixture cycle + in-star + path valid at cost {}", built.cost(), fixture.cost()))
}

fn report(index: usize, name: &str, run: impl FnOnce() -> Result<String, String>) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
        let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panicked: {}", msg.unwrap_or_default()))
    });
    let secs = start.elapsed().as_secs_f64();
    let (tag, detail) = match &outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    println!("criterion {index} {tag} [{secs:.1}s] {name}: {detail}");
    outcome.is_ok()
}

fn main() {
    let mut shared = Shared { partitions: Vec::new() };
    let results = [
        report(1, "exhaustive partition validity and bound", || criterion_1(&mut shared)),
        report(2, "sampled partition cost bound", || criterion_2(&mut shared)),
        report(3, "engine equals oracle", criterion_3),
        report(4, "cyclic convolution and CRT", criterion_4),
        report(5, "query equals engine", criterion_5),
        report(6, "work accounting identity", || criterion_6(&shared)),
        report(7, "engine beats naive on XOR, n = 12", criterion_7),
        report(8, "worked two-row example", criterion_8),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
