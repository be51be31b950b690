//! Benchmark harness: fixture generation and timed factorization sweeps
//! written out as CSV.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use cceqr_core::dense::io::save_binary;
use cceqr_core::diagnostics::{measure, Algorithm, RunReport, CSV_HEADER};
use cceqr_core::matrixgen::{gen_gaussian, gen_hadamard_adversary, gen_mixture_eigvecs, MixtureSpec};
use cceqr_core::DenseMatrix;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] cceqr_core::Error),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 1 for bad arguments, 2 for anything that failed while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Gaussian { m: usize, n: usize },
    Hadamard { kexp: u32, rexp: u32 },
    Mixture { m: usize, n: usize, ell: f64, sigma2: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Gaussian { .. } => "gaussian",
            Family::Hadamard { .. } => "hadamard",
            Family::Mixture { .. } => "mixture",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Family::Gaussian { m, n } if m == 0 || n == 0 => {
                Err(usage(format!("gaussian needs positive dimensions, got {m}x{n}")))
            }
            Family::Hadamard { kexp, rexp } if kexp < 1 || kexp > rexp || rexp > 30 => {
                Err(usage(format!("hadamard needs 1 <= kexp <= rexp <= 30, got kexp = {kexp}, rexp = {rexp}")))
            }
            Family::Mixture { m, n, ell, sigma2 } => MixtureSpec { m, n, ell, sigma2, seed: 0 }
                .validate()
                .map_err(|e| usage(e.to_string())),
            _ => Ok(()),
        }
    }

    /// Row and column counts of the generated matrix.
    pub fn shape(&self) -> (usize, usize) {
        match *self {
            Family::Gaussian { m, n } | Family::Mixture { m, n, .. } => (m, n),
            Family::Hadamard { kexp, rexp } => (1 << kexp, 1 << rexp),
        }
    }

    pub fn generate(&self, seed: u64) -> Result<DenseMatrix> {
        self.validate()?;
        Ok(match *self {
            Family::Gaussian { m, n } => gen_gaussian(m, n, seed),
            Family::Hadamard { kexp, rexp } => gen_hadamard_adversary(kexp, rexp)?,
            Family::Mixture { m, n, ell, sigma2 } => gen_mixture_eigvecs(&MixtureSpec { m, n, ell, sigma2, seed })?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub family: Family,
    pub algos: Vec<Algorithm>,
    /// Defaults to `min(m, n)` when absent.
    pub k: Option<usize>,
    pub rhos: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Independent fixtures, seeded `seed, seed + 1, …`.
    pub instances: usize,
    pub verify: bool,
    pub parallel: bool,
    /// `None` writes to stdout.
    pub out: Option<PathBuf>,
}

impl BenchConfig {
    pub fn validate(&self) -> Result<usize> {
        self.family.validate()?;
        if self.algos.is_empty() {
            return Err(usage("no algorithms selected"));
        }
        if self.trials == 0 || self.instances == 0 {
            return Err(usage("trials and instances must be at least 1"));
        }
        if let Some(&rho) = self.rhos.iter().find(|&&r| !(r > 0.0 && r < 1.0)) {
            return Err(usage(format!("rho = {rho} must lie in (0, 1)")));
        }
        if self.rhos.is_empty() && self.algos.iter().any(|a| a.uses_rho()) {
            return Err(usage("an empty rho grid leaves nothing to run for cceqr"));
        }
        let (m, n) = self.family.shape();
        let limit = m.min(n);
        let k = self.k.unwrap_or(limit);
        if k == 0 || k > limit {
            return Err(usage(format!("k = {k} outside 1..={limit} for a {m}x{n} matrix")));
        }
        Ok(k)
    }
}

/// Resolves an `--algo` token. `cceqr` picks the CSSP or full variant.
pub fn parse_algo(token: &str, full: bool) -> Result<Algorithm> {
    match token.trim() {
        "cceqr" if full => Ok(Algorithm::CceqrFull),
        "cceqr" => Ok(Algorithm::CceqrCssp),
        other => other.parse().map_err(|e: cceqr_core::Error| usage(e.to_string())),
    }
}

#[derive(Debug, Clone, Copy)]
struct Job {
    instance: usize,
    algo: Algorithm,
    rho: Option<f64>,
    trial: usize,
}

fn jobs(config: &BenchConfig) -> Vec<Job> {
    let mut out = Vec::new();
    for instance in 0..config.instances {
        for &algo in &config.algos {
            let rhos: Vec<Option<f64>> =
                if algo.uses_rho() { config.rhos.iter().map(|&r| Some(r)).collect() } else { vec![None] };
            for rho in rhos {
                for trial in 0..config.trials {
                    out.push(Job { instance, algo, rho, trial });
                }
            }
        }
    }
    out
}

/// Runs every (instance, algorithm, ρ, trial) combination and returns the
/// reports in that order.
pub fn collect_reports(config: &BenchConfig) -> Result<Vec<RunReport>> {
    let k = config.validate()?;
    let fixtures = (0..config.instances)
        .map(|i| config.family.generate(config.seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let name = config.family.name();
    let run = |job: &Job| -> Result<RunReport> {
        let a = &fixtures[job.instance];
        let rho = job.rho.unwrap_or(cceqr_core::DEFAULT_RHO);
        let mut report = measure(a, name, job.algo, k, rho, job.trial, config.verify)?;
        report.rho = job.rho;
        Ok(report)
    };
    let jobs = jobs(config);
    if config.parallel {
        jobs.par_iter().map(run).collect()
    } else {
        jobs.iter().map(run).collect()
    }
}

pub fn write_csv<W: Write>(reports: &[RunReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in reports {
        w.write_record(r.csv_record())?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Output { path: path.to_path_buf(), source })
}

/// Runs the benchmark and writes the CSV to `config.out` (or stdout).
pub fn run_bench(config: &BenchConfig) -> Result<Vec<RunReport>> {
    config.validate()?;
    // Open the output first so an unwritable path fails before any work.
    let sink: Box<dyn Write> = match &config.out {
        Some(path) => Box::new(create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let reports = collect_reports(config)?;
    write_csv(&reports, sink)?;
    Ok(reports)
}

/// Generates one fixture and writes it in the binary matrix format.
pub fn gen_fixture(family: &Family, seed: u64, path: &Path) -> Result<DenseMatrix> {
    let a = family.generate(seed)?;
    create(path)?;
    save_binary(&a, path)?;
    Ok(a)
}
