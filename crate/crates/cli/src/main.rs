use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cceqr_bench::{gen_fixture, parse_algo, run_bench, BenchConfig, CliError, Family};

#[derive(Parser, Debug)]
#[command(name = "cceqr-bench", version, about = "Benchmark CCEQR against Golub-Businger pivoted QR")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Time factorizations and write one CSV row per run.
    Bench(BenchArgs),
    /// Write a generated matrix in the binary fixture format.
    Gen(GenArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FamilyKind {
    Gaussian,
    Hadamard,
    Mixture,
}

#[derive(Args, Debug)]
struct FamilyArgs {
    #[arg(long, value_enum)]
    family: FamilyKind,
    /// Rows (gaussian, mixture).
    #[arg(long, default_value_t = 64)]
    m: usize,
    /// Columns (gaussian, mixture).
    #[arg(long, default_value_t = 4096)]
    n: usize,
    /// log2 of the row count (hadamard).
    #[arg(long, default_value_t = 5)]
    kexp: u32,
    /// log2 of the column count (hadamard).
    #[arg(long, default_value_t = 10)]
    rexp: u32,
    /// Cluster separation (mixture).
    #[arg(long, default_value_t = 6.0)]
    ell: f64,
    /// Kernel bandwidth (mixture).
    #[arg(long, default_value_t = 5.0)]
    sigma2: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl FamilyArgs {
    fn family(&self) -> Family {
        match self.family {
            FamilyKind::Gaussian => Family::Gaussian { m: self.m, n: self.n },
            FamilyKind::Hadamard => Family::Hadamard { kexp: self.kexp, rexp: self.rexp },
            FamilyKind::Mixture => Family::Mixture { m: self.m, n: self.n, ell: self.ell, sigma2: self.sigma2 },
        }
    }
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Skeleton size; defaults to min(m, n).
    #[arg(long)]
    k: Option<usize>,
    /// Comma list of candidate fractions in (0, 1).
    #[arg(long, value_delimiter = ',', default_value = "0.05")]
    rho: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Comma list of cceqr-cssp, cceqr-full, gb, gb-naive; `cceqr` follows --full.
    #[arg(long, value_delimiter = ',', default_value = "gb,cceqr")]
    algo: Vec<String>,
    /// Resolve `cceqr` to the full factorization instead of column selection.
    #[arg(long)]
    full: bool,
    /// Independent fixtures per configuration, seeded consecutively.
    #[arg(long, default_value_t = 1)]
    instances: usize,
    /// Check equivalence with the reference pivoting and rank-revealing bounds.
    #[arg(long)]
    verify: bool,
    /// Run independent (instance, algorithm) jobs on a thread pool.
    #[arg(long)]
    parallel: bool,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long)]
    out: PathBuf,
}

fn bench(args: BenchArgs) -> Result<(), CliError> {
    let algos = args.algo.iter().map(|a| parse_algo(a, args.full)).collect::<Result<Vec<_>, _>>()?;
    let config = BenchConfig {
        family: args.family.family(),
        algos,
        k: args.k,
        rhos: args.rho,
        trials: args.trials,
        seed: args.family.seed,
        instances: args.instances,
        verify: args.verify,
        parallel: args.parallel,
        out: args.out,
    };
    run_bench(&config).map(|_| ())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Bench(args) => bench(args),
        Command::Gen(args) => gen_fixture(&args.family.family(), args.family.seed, &args.out).map(|_| ()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
