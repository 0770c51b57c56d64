//! The `fconv` command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cyclicconv::PrimePlan;
use crate::domain::{FiniteDomain, FunctionTable, TensorFunction};
use crate::engine::{convolve_with, type_plans, work_count, EngineOptions};
use crate::error::{Error, Result};
use crate::io::{self, DomainRef};
use crate::oracle::{naive_convolve, ORACLE_PAIR_LIMIT};
use crate::partition::{
    build_partition, build_representation_graph, partition_bound, validate_partition, CyclicPartition,
    PartitionOptions, RowPairing, SwapPolicy,
};
use crate::query::query_with_padding;

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "fconv", version, about = "Generalized f-convolution of integer tensors")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "FCONV_JOBS")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build (or check) a cyclic partition of a function table.
    Partition(PartitionArgs),
    /// Compute the full f-convolution of two tensors.
    Convolve(ConvolveArgs),
    /// Compute a single entry of the f-convolution.
    Query(QueryArgs),
    /// Compare the engine against the brute-force oracle.
    Verify(VerifyArgs),
    /// Time the engine against the brute-force oracle.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SwapArg {
    Auto,
    On,
    Off,
}

impl From<SwapArg> for SwapPolicy {
    fn from(s: SwapArg) -> Self {
        match s {
            SwapArg::Auto => SwapPolicy::Auto,
            SwapArg::On => SwapPolicy::On,
            SwapArg::Off => SwapPolicy::Off,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PairingArg {
    Consecutive,
    Greedy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Partition,
    Naive,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long, value_enum, default_value = "auto")]
    pub swap: SwapArg,
    #[arg(long, value_enum, default_value = "consecutive")]
    pub pairing: PairingArg,
}

impl BuildArgs {
    fn options(&self) -> PartitionOptions {
        PartitionOptions {
            swap: self.swap.into(),
            pairing: match self.pairing {
                PairingArg::Consecutive => RowPairing::Consecutive,
                PairingArg::Greedy => RowPairing::Greedy,
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    /// Function table JSON.
    pub function: PathBuf,
    /// Validate this partition JSON instead of building one.
    #[arg(long)]
    pub check: Option<PathBuf>,
    /// Write the representation graph of rows (0, 1) as Graphviz DOT.
    #[arg(long)]
    pub dot: Option<PathBuf>,
    #[command(flatten)]
    pub build: BuildArgs,
}

#[derive(Debug, Args)]
pub struct ConvolveArgs {
    pub function: PathBuf,
    /// Tensor over L^n.
    pub g: PathBuf,
    /// Tensor over R^n.
    pub h: PathBuf,
    /// Output file (default: stdout).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "partition")]
    pub method: Method,
    /// Print the partition and the prime plans to stderr.
    #[arg(long)]
    pub explain: bool,
    /// Use this partition JSON instead of building one.
    #[arg(long)]
    pub partition: Option<PathBuf>,
    #[command(flatten)]
    pub build: BuildArgs,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    pub function: PathBuf,
    pub g: PathBuf,
    pub h: PathBuf,
    /// Comma-separated labels of T.
    #[arg(long, allow_hyphen_values = true)]
    pub vector: String,
    /// Padding label of L for odd n (default: first label).
    #[arg(long)]
    pub pad_left: Option<String>,
    /// Padding label of R for odd n (default: first label).
    #[arg(long)]
    pub pad_right: Option<String>,
}

#[derive(Debug, Args)]
pub struct RunConfig {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Domain sizes |D| (comma separated).
    #[arg(long = "D", visible_alias = "d", value_delimiter = ',', default_value = "2")]
    pub sizes: Vec<usize>,
    /// Arities n (comma separated).
    #[arg(long = "n", value_delimiter = ',', default_value = "3")]
    pub arities: Vec<usize>,
    /// Value bound M: inputs are drawn from [-M, M].
    #[arg(long = "M", visible_alias = "m", default_value_t = 10)]
    pub max_value: u64,
    #[command(flatten)]
    pub build: BuildArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Function table JSON; random functions are used when omitted.
    pub function: Option<PathBuf>,
    /// Draw a random f on D x D -> D per trial.
    #[arg(long, conflicts_with = "function")]
    pub random: bool,
    /// Check every f : D x D -> D (|D| <= 3).
    #[arg(long, conflicts_with_all = ["function", "random"])]
    pub exhaustive: bool,
    #[command(flatten)]
    pub config: RunConfig,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BenchMethod {
    Both,
    Partition,
    Naive,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// `xor`, `add`, `random`, or a function table JSON path.
    #[arg(long, default_value = "xor")]
    pub function: String,
    #[arg(long, value_enum, default_value = "both")]
    pub method: BenchMethod,
    /// Timing repetitions; the minimum is reported.
    #[arg(long, default_value_t = 3)]
    pub repeat: usize,
    #[command(flatten)]
    pub config: RunConfig,
}

/// Runs the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{rendered}") } else { write!(err, "{rendered}") };
            return code;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            let _ = writeln!(err, "error: --jobs must be at least 1");
            return EXIT_USAGE;
        }
        pool = pool.num_threads(j);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker pool: {e}");
            return EXIT_USAGE;
        }
    };
    let result = pool.install(|| dispatch(&cli.command, out, err));
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Partition(a) => cmd_partition(a, out, err),
        Command::Convolve(a) => cmd_convolve(a, out, err),
        Command::Query(a) => cmd_query(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Bench(a) => cmd_bench(a, out),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn in_file<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn load_function(path: &Path) -> Result<FunctionTable> {
    in_file(path, io::parse_function_table(&read(path)?))
}

fn load_tensor(path: &Path, f: &FunctionTable, side: DomainRef) -> Result<TensorFunction> {
    in_file(path, io::parse_tensor(&read(path)?, f, Some(side)))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| Error::Internal(format!("write failed: {e}")))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn cmd_partition(a: &PartitionArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let f = load_function(&a.function)?;
    let options = a.build.options();
    let p = match &a.check {
        Some(path) => in_file(path, io::parse_partition(&read(path)?, &f))?,
        None => build_partition(&f, options)?,
    };
    let bound = partition_bound(&f, options.swap);
    let violations = validate_partition(&f, &p).err().unwrap_or_default();
    let mut report: serde_json::Value = serde_json::from_str(&io::partition_to_json(&f, &p)).expect("own output parses");
    report["bound"] = bound.into();
    report["valid"] = violations.is_empty().into();
    report["violations"] = violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().into();
    emit(out, &format!("{}\n", serde_json::to_string_pretty(&report).expect("serializable")))?;
    if let Some(dot) = &a.dot {
        if f.left().len() < 2 {
            return Err(Error::Argument("--dot needs |L| >= 2".into()));
        }
        let cols: Vec<usize> = (0..f.right().len()).collect();
        write_file(dot, &io::graph_to_dot(&f, &build_representation_graph(&f, 0, 1, &cols)?))?;
    }
    for v in &violations {
        let _ = writeln!(err, "violation: {v}");
    }
    if !violations.is_empty() || p.cost() > bound {
        return Ok(EXIT_MISMATCH);
    }
    Ok(EXIT_OK)
}

fn explain(f: &FunctionTable, p: &CyclicPartition, g: &TensorFunction, h: &TensorFunction) -> Result<String> {
    let mut s = String::new();
    let n = g.arity();
    let _ = writeln!(s, "partition: {} minors, cost {}, k = {:?}", p.len(), p.cost(), p.ks());
    let _ = writeln!(s, "types: {}^{n} enumerated, work_count {}", p.len(), work_count(p, n));
    let plans = type_plans(f, p, g, h)?;
    let _ = writeln!(s, "nonzero types: {}", plans.len());
    let mut seen = BTreeSet::new();
    for (_, radices, bound) in &plans {
        let plan = PrimePlan::cached(radices, *bound)?;
        if seen.insert((plan.radices.clone(), plan.bound)) {
            let _ = writeln!(
                s,
                "plan radices {:?} bound {}: primes {:?} roots {:?}",
                plan.radices, plan.bound, plan.primes, plan.roots
            );
        }
    }
    Ok(s)
}

fn cmd_convolve(a: &ConvolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let f = load_function(&a.function)?;
    let g = load_tensor(&a.g, &f, DomainRef::L)?;
    let h = load_tensor(&a.h, &f, DomainRef::R)?;
    let result = match a.method {
        Method::Naive => naive_convolve(&f, &g, &h)?,
        Method::Partition => {
            let p = match &a.partition {
                Some(path) => in_file(path, io::parse_partition(&read(path)?, &f))?,
                None => build_partition(&f, a.build.options())?,
            };
            if a.explain {
                let _ = write!(err, "{}", explain(&f, &p, &g, &h)?);
            }
            convolve_with(&f, &p, &g, &h, &EngineOptions::default())?.0
        }
    };
    let json = format!("{}\n", io::tensor_to_json(&result, DomainRef::T));
    match &a.out {
        Some(path) => write_file(path, &json)?,
        None => emit(out, &json)?,
    }
    Ok(EXIT_OK)
}

fn cmd_query(a: &QueryArgs, out: &mut dyn Write) -> Result<i32> {
    let f = load_function(&a.function)?;
    let g = load_tensor(&a.g, &f, DomainRef::L)?;
    let h = load_tensor(&a.h, &f, DomainRef::R)?;
    let v = io::parse_vector(&a.vector, f.target())?;
    let pad = |label: &Option<String>, dom: &FiniteDomain| -> Result<usize> {
        match label {
            None => Ok(0),
            Some(l) => dom.index_of(l).ok_or_else(|| Error::Parse(format!("padding label {l:?} not in its domain"))),
        }
    };
    let value = query_with_padding(&f, &g, &h, &v, pad(&a.pad_left, f.left())?, pad(&a.pad_right, f.right())?)?;
    emit(out, &format!("{value}\n"))?;
    Ok(EXIT_OK)
}

fn random_tensor(rng: &mut ChaCha8Rng, dom: &FiniteDomain, n: usize, m: u64) -> Result<TensorFunction> {
    let len = crate::domain::tensor_len(dom.len(), n)?;
    let m = m as i128;
    TensorFunction::new(dom.clone(), n, (0..len).map(|_| rng.gen_range(-m..=m)).collect())
}

fn random_function(rng: &mut ChaCha8Rng, d: usize) -> Result<FunctionTable> {
    let flat: Vec<usize> = (0..d * d).map(|_| rng.gen_range(0..d)).collect();
    FunctionTable::square(d, &flat)
}

struct TrialOutcome {
    ok: bool,
    note: String,
}

fn trial(
    f: &FunctionTable,
    n: usize,
    rng: &mut ChaCha8Rng,
    cfg: &RunConfig,
    engine: &EngineOptions,
) -> Result<TrialOutcome> {
    let options = cfg.build.options();
    let p = build_partition(f, options)?;
    let bound = partition_bound(f, options.swap);
    let mut problems = Vec::new();
    if let Err(v) = validate_partition(f, &p) {
        problems.push(format!("invalid partition: {}", v[0]));
    }
    if p.cost() > bound {
        problems.push(format!("cost {} exceeds bound {bound}", p.cost()));
    }
    let g = random_tensor(rng, f.left(), n, cfg.max_value)?;
    let h = random_tensor(rng, f.right(), n, cfg.max_value)?;
    let v: Vec<usize> = (0..n).map(|_| rng.gen_range(0..f.target().len())).collect();
    if problems.is_empty() {
        let expected = naive_convolve(f, &g, &h)?;
        let (got, _) = convolve_with(f, &p, &g, &h, engine)?;
        if let Some(i) = got.values().iter().zip(expected.values()).position(|(a, b)| a != b) {
            problems.push(format!("engine differs from oracle at cell {i}: {} vs {}", got.values()[i], expected.values()[i]));
        }
        let idx = crate::domain::flatten(&v, &vec![f.target().len(); n])?;
        let q = query_with_padding(f, &g, &h, &v, 0, 0)?;
        if q != expected.values()[idx] {
            problems.push(format!("query at {v:?} gives {q}, oracle {}", expected.values()[idx]));
        }
    }
    Ok(TrialOutcome {
        ok: problems.is_empty(),
        note: format!("cost {} bound {bound}{}{}", p.cost(), if problems.is_empty() { "" } else { ": " }, problems.join("; ")),
    })
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = &a.config;
    if cfg.trials == 0 {
        return Err(Error::Argument("--trials must be at least 1".into()));
    }
    let engine = EngineOptions { inject_fault: a.inject_fault, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = String::new();
    let _ = writeln!(report, "seed {}", cfg.seed);
    let (mut total, mut failed) = (0usize, 0usize);
    let mut record = |label: String, o: TrialOutcome, report: &mut String| {
        total += 1;
        if !o.ok {
            failed += 1;
            let _ = writeln!(report, "FAIL {label}: {}", o.note);
        }
    };
    if a.exhaustive {
        for &d in &cfg.sizes {
            if !(1..=3).contains(&d) {
                return Err(Error::Argument(format!("--exhaustive supports |D| <= 3, got {d}")));
            }
            let count = d.pow((d * d) as u32);
            for code in 0..count {
                let f = FunctionTable::from_fn(d, d, d, |x, y| (code / d.pow((x * d + y) as u32)) % d)?;
                for &n in &cfg.arities {
                    let o = trial(&f, n, &mut rng, cfg, &engine)?;
                    record(format!("D={d} f#{code} n={n}"), o, &mut report);
                }
            }
        }
    } else if let Some(path) = &a.function {
        let f = load_function(path)?;
        for &n in &cfg.arities {
            for t in 0..cfg.trials {
                let o = trial(&f, n, &mut rng, cfg, &engine)?;
                record(format!("n={n} trial {t}"), o, &mut report);
            }
        }
    } else {
        for &d in &cfg.sizes {
            if d == 0 {
                return Err(Error::Argument("|D| must be at least 1".into()));
            }
            for &n in &cfg.arities {
                for t in 0..cfg.trials {
                    let f = random_function(&mut rng, d)?;
                    let o = trial(&f, n, &mut rng, cfg, &engine)?;
                    record(format!("D={d} n={n} trial {t}"), o, &mut report);
                }
            }
        }
    }
    let _ = writeln!(report, "{} trials, {} passed, {} failed", total, total - failed, failed);
    emit(out, &report)?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_MISMATCH })
}

fn min_time<T>(repeat: usize, mut f: impl FnMut() -> Result<T>) -> Result<(T, Duration)> {
    let mut best = Duration::MAX;
    let mut last = None;
    for _ in 0..repeat.max(1) {
        let start = Instant::now();
        let r = f()?;
        best = best.min(start.elapsed());
        last = Some(r);
    }
    Ok((last.expect("at least one run"), best))
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = &a.config;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = String::new();
    let _ = writeln!(report, "seed {}", cfg.seed);
    let _ = writeln!(
        report,
        "{:<16} {:>3} {:>5} {:>14} {:>16} {:>12} {:>12}",
        "instance", "n", "cost", "work_count", "naive_pairs", "engine_ms", "naive_ms"
    );
    let mut mismatch = false;
    for &d in &cfg.sizes {
        let (name, f) = match a.function.as_str() {
            "xor" => ("xor", FunctionTable::from_fn(d, d, d, |x, y| (x ^ y) % d)?),
            "add" => ("add", FunctionTable::from_fn(d, d, d, |x, y| (x + y) % d)?),
            "random" => ("random", random_function(&mut rng, d)?),
            path => ("file", load_function(Path::new(path))?),
        };
        if name == "xor" && !d.is_power_of_two() {
            return Err(Error::Argument(format!("xor needs |D| a power of two, got {d}")));
        }
        let p = build_partition(&f, cfg.build.options())?;
        for &n in &cfg.arities {
            let g = random_tensor(&mut rng, f.left(), n, cfg.max_value)?;
            let h = random_tensor(&mut rng, f.right(), n, cfg.max_value)?;
            let pairs = (f.left().len() as u128).pow(n as u32) * (f.right().len() as u128).pow(n as u32);
            let engine = if a.method != BenchMethod::Naive {
                Some(min_time(a.repeat, || convolve_with(&f, &p, &g, &h, &EngineOptions::default()))?)
            } else {
                None
            };
            let naive = if a.method != BenchMethod::Partition && pairs <= ORACLE_PAIR_LIMIT {
                Some(min_time(a.repeat, || naive_convolve(&f, &g, &h))?)
            } else {
                None
            };
            if let (Some(((e, _), _)), Some((nv, _))) = (&engine, &naive) {
                mismatch |= e != nv;
            }
            let ms = |t: Option<Duration>| t.map_or("-".to_string(), |t| format!("{:.3}", t.as_secs_f64() * 1e3));
            let work = work_count(&p, n);
            let _ = writeln!(
                report,
                "{:<16} {:>3} {:>5} {:>14} {:>16} {:>12} {:>12}",
                format!("{name} |D|={d}"),
                n,
                p.cost(),
                work,
                pairs,
                ms(engine.as_ref().map(|e| e.1)),
                ms(naive.as_ref().map(|x| x.1)),
            );
        }
    }
    if mismatch {
        let _ = writeln!(report, "engine and naive outputs differ");
    }
    emit(out, &report)?;
    Ok(if mismatch { EXIT_MISMATCH } else { EXIT_OK })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(args.iter().copied(), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn verify_random_is_deterministic() {
        let args = ["fconv", "verify", "--random", "--D", "2", "--n", "3", "--trials", "10", "--seed", "42"];
        let (code, a, _) = run_capture(&args);
        assert_eq!(code, EXIT_OK, "{a}");
        assert!(a.starts_with("seed 42\n"));
        let (_, b, _) = run_capture(&args);
        assert_eq!(a, b);
    }

    #[test]
    fn injected_fault_is_detected() {
        let (code, out, _) = run_capture(&["fconv", "verify", "--random", "--trials", "2", "--inject-fault"]);
        assert_eq!(code, EXIT_MISMATCH);
        assert!(out.contains("FAIL"));
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_capture(&["fconv", "frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["fconv", "partition", "/nonexistent.json"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["fconv", "verify", "--trials", "0"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["fconv", "--help"]).0, EXIT_OK);
    }

    #[test]
    fn bench_reports_work() {
        let (code, out, _) =
            run_capture(&["fconv", "bench", "--D", "2", "--n", "4", "--repeat", "1", "--seed", "1"]);
        assert_eq!(code, EXIT_OK);
        let row = out.lines().nth(2).unwrap();
        let cols: Vec<&str> = row.split_whitespace().collect();
        // xor |D|=2 n cost work pairs
        assert_eq!(&cols[2..6], &["4", "2", "16", "256"]);
    }
}
