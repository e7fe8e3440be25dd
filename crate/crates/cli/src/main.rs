//! Command-line front end: reduce point sets, verify embeddings, generate
//! test instances, print the linear dimension lower bound, and sweep
//! benchmarks to CSV.
//!
//! Exit codes: 0 success; 1 bad input or I/O failure; 2 the run completed
//! but a guarantee was missed (error target not met, or verification found
//! violations).

mod formats;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lp_reduce::bound::{eps_isometric_moduli, linear_lower_bound};
use lp_reduce::embed::{reduce, verify, ReduceOutcome};
use lp_reduce::gen::{basis_set, haar_rotate, random_ball, walsh_set};
use lp_reduce::sampler::{SamplerConfig, SamplerMode};
use lp_reduce::{Error, PointSet};

#[derive(Parser)]
#[command(
    name = "lp-reduce",
    version,
    about = "Dimension reduction for finite point sets in weighted L_p spaces",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed a point set into few dimensions with a bounded additive error
    Reduce(ReduceArgs),
    /// Recheck an embedding file against its source point set
    Verify(VerifyArgs),
    /// Generate a test point set and write it to a file
    Gen(GenArgs),
    /// Print the dimension lower bound for linear near-isometric embeddings
    Bound(BoundArgs),
    /// Sweep reductions over a parameter grid and write results as CSV
    Bench(BenchArgs),
}

fn parse_mode(s: &str) -> Result<SamplerMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args)]
struct ReduceArgs {
    /// Input point set: .json, or .csv of value rows (see --uniform-weights)
    #[arg(long)]
    input: PathBuf,
    /// Target additive error on p-th-power distances
    #[arg(long)]
    eps: f64,
    /// Sampling mode: greedy, random, or adaptive
    #[arg(long, default_value = "greedy", value_parser = parse_mode)]
    mode: SamplerMode,
    /// Output dimension override (default: the worst-case formula value)
    #[arg(long)]
    d: Option<usize>,
    /// Dimension cap for adaptive mode (default: the worst-case formula value)
    #[arg(long)]
    d_cap: Option<usize>,
    /// RNG seed for random mode
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Redraw budget for random mode
    #[arg(long, default_value_t = 16)]
    max_retries: u32,
    /// Exponent p for CSV input (JSON files carry their own)
    #[arg(long)]
    p: Option<f64>,
    /// Treat CSV rows as values over equally weighted atoms
    #[arg(long)]
    uniform_weights: bool,
    /// Where to write the embedding JSON
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Source point set (.json)
    #[arg(long)]
    points: PathBuf,
    /// Embedding to check (.json)
    #[arg(long)]
    embedding: PathBuf,
    /// Error threshold for counting violations (default: the embedding's
    /// recorded achieved error)
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum GenKind {
    /// Uniform random points in the unit ball (needs --n; --atoms defaults to n²)
    Ball,
    /// Origin + basis vectors + normalized Walsh rows on 2^m atoms (needs --m)
    Walsh,
    /// Concentrated unit spikes, one per coordinate (needs --n)
    Basis,
}

#[derive(Args)]
struct GenArgs {
    /// What to generate
    #[arg(long, value_enum)]
    kind: GenKind,
    /// Number of points (ball, basis)
    #[arg(long)]
    n: Option<usize>,
    /// Number of atoms (ball; default n²)
    #[arg(long)]
    atoms: Option<usize>,
    /// Walsh doubling exponent: 2^m atoms, 2^(m+1)+1 points (walsh)
    #[arg(long)]
    m: Option<usize>,
    /// Exponent p of the space
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// RNG seed (ball, and --rotate)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Apply a random rotation after generating (p = 2 only)
    #[arg(long)]
    rotate: bool,
    /// Where to write the point-set JSON
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BoundArgs {
    /// Exponent p (any p ≥ 1 except 2)
    #[arg(long)]
    p: f64,
    /// Number of points, of the form 2^(m+1)+1
    #[arg(long)]
    n: usize,
    /// Additive error target in (0, 1)
    #[arg(long)]
    eps: f64,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated point counts
    #[arg(long, default_value = "8")]
    sizes: String,
    /// Comma-separated exponents
    #[arg(long, default_value = "1,2")]
    exponents: String,
    /// Comma-separated error targets
    #[arg(long, default_value = "0.25")]
    epsilons: String,
    /// Comma-separated modes (greedy, random, adaptive)
    #[arg(long, default_value = "greedy")]
    modes: String,
    /// Base RNG seed (instance generation and random mode)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Atom count per instance (default n² per size)
    #[arg(long)]
    atoms: Option<usize>,
    /// Apply a random rotation before reducing (p = 2 combos only)
    #[arg(long)]
    rotate: bool,
    /// Where to write the CSV of results
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Reduce(args) => cmd_reduce(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Bound(args) => cmd_bound(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

const GUARANTEE_MISSED: u8 = 2;

fn print_reduce_report(ps: &PointSet, out: &ReduceOutcome, elapsed_s: f64) {
    println!(
        "points: {}  atoms: {}  exponent: {}",
        ps.n_points(),
        ps.n_atoms(),
        ps.p()
    );
    println!("incompressibility: {}", out.incompressibility);
    match out.theoretical_dimension {
        Some(d) => println!("prescribed dimension: {d}"),
        None => println!("prescribed dimension: out of range for these parameters"),
    }
    println!("output dimension: {}", out.embedding.d);
    println!(
        "achieved additive error: {} (target {})",
        out.embedding.achieved_eps, out.target_epsilon
    );
    if out.epsilon_flagged {
        println!("note: target ≥ 1 is outside the guarantee's stated domain");
    }
    if out.used_exact_fallback {
        println!("note: adaptive cap exhausted; wrote the exact embedding instead");
    }
    println!("wall time: {elapsed_s:.3} s");
}

fn cmd_reduce(args: ReduceArgs) -> Result<ExitCode> {
    let ps = formats::read_point_set(&args.input, args.p, args.uniform_weights)?;
    let mut cfg = SamplerConfig::new(args.mode, args.eps);
    cfg.d_override = args.d;
    cfg.d_cap = args.d_cap;
    cfg.seed = args.seed;
    cfg.max_retries = args.max_retries;

    let start = Instant::now();
    match reduce(&ps, &cfg) {
        Ok(out) => {
            let elapsed = start.elapsed().as_secs_f64();
            formats::write_embedding(&args.out, &out.embedding)?;
            print_reduce_report(&ps, &out, elapsed);
            println!("wrote {}", args.out.display());
            if out.embedding.achieved_eps > args.eps {
                println!("result: target missed");
                Ok(ExitCode::from(GUARANTEE_MISSED))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
        Err(Error::RetriesExhausted {
            target,
            attempts,
            best_error,
            embedding: Some(embedding),
            ..
        }) => {
            let elapsed = start.elapsed().as_secs_f64();
            formats::write_embedding(&args.out, &embedding)?;
            println!(
                "random sampling missed the target {target} after {attempts} attempts; \
                 best achieved {best_error}"
            );
            println!("wall time: {elapsed:.3} s");
            println!("wrote best-effort embedding to {}", args.out.display());
            Ok(ExitCode::from(GUARANTEE_MISSED))
        }
        Err(e) => Err(e).context("reduction failed"),
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let ps = formats::read_point_set(&args.points, None, false)?;
    let emb = formats::read_embedding(&args.embedding)?;
    let report = verify(&ps, &emb).context("verification failed")?;
    let eps = args.eps.unwrap_or(emb.achieved_eps);
    let violations = report.pairs_violating(eps);

    println!("pairs checked: {}", report.pairs.len());
    println!("max additive error: {}", report.max_additive_error);
    println!(
        "recorded achieved error: {} (checking against {eps})",
        emb.achieved_eps
    );
    println!("violations: {violations}");
    if violations > 0 {
        let mut worst: Vec<_> = report.pairs.iter().collect();
        worst.sort_by(|a, b| b.deviation.partial_cmp(&a.deviation).unwrap());
        for pair in worst.iter().take(5) {
            println!(
                "  pair ({}, {}): source {} embedded {} deviation {}",
                pair.i, pair.j, pair.source, pair.embedded, pair.deviation
            );
        }
        return Ok(ExitCode::from(GUARANTEE_MISSED));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode> {
    let need = |v: Option<usize>, what: &str| {
        v.with_context(|| format!("--{what} is required for this kind"))
    };
    let ps = match args.kind {
        GenKind::Ball => {
            let n = need(args.n, "n")?;
            let atoms = args.atoms.unwrap_or(n * n);
            random_ball(n, atoms, args.p, args.seed)?
        }
        GenKind::Walsh => {
            if args.atoms.is_some() || args.n.is_some() {
                bail!("walsh sets are sized by --m alone (2^m atoms, 2^(m+1)+1 points)");
            }
            walsh_set(need(args.m, "m")?, args.p)?
        }
        GenKind::Basis => basis_set(need(args.n, "n")?, args.p)?,
    };
    let ps = if args.rotate {
        haar_rotate(&ps, args.seed).context("--rotate requires p = 2 and uniform weights")?
    } else {
        ps
    };
    formats::write_point_set(&args.out, &ps)?;
    println!(
        "points: {}  atoms: {}  exponent: {}",
        ps.n_points(),
        ps.n_atoms(),
        ps.p()
    );
    println!("incompressibility: {}", ps.incompressibility());
    println!("wrote {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_bound(args: BoundArgs) -> Result<ExitCode> {
    let moduli = eps_isometric_moduli(args.p, args.eps)?;
    let bound = linear_lower_bound(args.p, args.n, moduli)?;
    println!(
        "norm window for unit-distance pairs: [{}, {}] (ratio {})",
        moduli.lower,
        moduli.upper,
        moduli.ratio()
    );
    println!(
        "any linear embedding of the {}-point Walsh set within error {} needs dimension ≥ {}",
        args.n, args.eps, bound
    );
    println!("smallest admissible integer dimension: {}", bound.ceil().max(1.0) as u64);
    Ok(ExitCode::SUCCESS)
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<T>()
                .map_err(|e| anyhow::anyhow!("bad {what} {tok:?}: {e}"))
        })
        .collect()
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    let sizes: Vec<usize> = parse_list(&args.sizes, "size")?;
    let exponents: Vec<f64> = parse_list(&args.exponents, "exponent")?;
    let epsilons: Vec<f64> = parse_list(&args.epsilons, "epsilon")?;
    let modes: Vec<SamplerMode> = args
        .modes
        .split(',')
        .map(|tok| parse_mode(tok.trim()).map_err(|e| anyhow::anyhow!(e)))
        .collect::<Result<_>>()?;

    let mut csv = String::from("n,p,eps,mode,d,achieved_eps,runtime_s\n");
    let mut missed = false;
    for &n in &sizes {
        for &p in &exponents {
            for &eps in &epsilons {
                let atoms = args.atoms.unwrap_or(n * n);
                let mut ps = random_ball(n, atoms, p, args.seed)?;
                if args.rotate && p == 2.0 {
                    ps = haar_rotate(&ps, args.seed)?;
                }
                for &mode in &modes {
                    let mut cfg = SamplerConfig::new(mode, eps);
                    cfg.seed = args.seed;
                    let start = Instant::now();
                    let (d, achieved) = match reduce(&ps, &cfg) {
                        Ok(out) => {
                            if out.embedding.achieved_eps > eps {
                                missed = true;
                            }
                            (out.embedding.d, out.embedding.achieved_eps)
                        }
                        Err(Error::RetriesExhausted {
                            best_error,
                            embedding: Some(embedding),
                            ..
                        }) => {
                            missed = true;
                            (embedding.d, best_error)
                        }
                        Err(e) => return Err(e).context("benchmark run failed"),
                    };
                    let runtime = start.elapsed().as_secs_f64();
                    writeln!(csv, "{n},{p},{eps},{mode},{d},{achieved},{runtime:.6}")?;
                    println!(
                        "n={n} p={p} eps={eps} mode={mode}: d={d} achieved={achieved} \
                         ({runtime:.3} s)"
                    );
                }
            }
        }
    }
    std::fs::write(&args.out, csv).with_context(|| format!("writing {}", args.out.display()))?;
    println!("wrote {}", args.out.display());
    if missed {
        Ok(ExitCode::from(GUARANTEE_MISSED))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}
