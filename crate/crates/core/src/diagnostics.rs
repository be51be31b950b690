//! Verification and measurement helpers.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;

use crate::cceqr::{cceqr, qt_permuted};
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::pivoted_qr::{check_gb_form, gb_qr, gb_qr_naive, gb_qr_naive_traced};

/// Relative tolerance for GB(k)-form checks on computed factors.
pub const GB_TOL: f64 = 1e-10;

/// Pivot steps whose two largest residual norms agree to this relative
/// precision count as ties.
pub const TIE_TOL: f64 = 1e-10;

/// Largest `m·n` for which the dense SVD oracle is run.
pub const SVD_ORACLE_LIMIT: usize = 4_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    Mismatch,
    /// Near-tied pivots make the Golub-Businger permutation ambiguous.
    Inconclusive,
}

impl Equivalence {
    pub fn as_bool(self) -> Option<bool> {
        match self {
            Equivalence::Equivalent => Some(true),
            Equivalence::Mismatch => Some(false),
            Equivalence::Inconclusive => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Equivalence::Equivalent => "true",
            Equivalence::Mismatch => "false",
            Equivalence::Inconclusive => "tie",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub status: Equivalence,
    pub cceqr_p: Vec<usize>,
    pub reference_p: Vec<usize>,
    /// Smallest relative gap between the two best pivot candidates seen by
    /// the reference factorization.
    pub min_gap: f64,
    pub first_difference: Option<usize>,
}

fn compare_prefix(p: &[usize], q: &[usize], k: usize) -> Option<usize> {
    (0..k).find(|&i| p[i] != q[i])
}

/// Runs CCEQR and the naive Golub-Businger oracle and compares `p(1:k)`.
pub fn verify_equivalence(a: &DenseMatrix, k: usize, rho: f64) -> Result<EquivalenceReport> {
    let sel = cceqr(a, k, rho, false)?;
    let (reference, gaps) = gb_qr_naive_traced(a, k)?;
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let first_difference = compare_prefix(&sel.p, &reference.p, k);
    let status = if min_gap < TIE_TOL {
        Equivalence::Inconclusive
    } else if first_difference.is_none() {
        Equivalence::Equivalent
    } else {
        Equivalence::Mismatch
    };
    Ok(EquivalenceReport {
        status,
        cceqr_p: sel.p[..k].to_vec(),
        reference_p: reference.p[..k].to_vec(),
        min_gap,
        first_difference,
    })
}

fn to_nalgebra(a: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_column_slice(a.rows(), a.cols(), a.as_slice())
}

/// Singular values in decreasing order.
pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    let mut sv: Vec<f64> = to_nalgebra(a).singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// `2^k·√(n − k)`, with `n − k` floored at 1 so the bound stays meaningful
/// when every column is selected.
pub fn q_bound(n: usize, k: usize) -> f64 {
    2f64.powi(k as i32) * (n.saturating_sub(k).max(1) as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankRevealMetrics {
    /// `σ_min(A(:, s)) / σ_k(A)`.
    pub sigma_ratio: f64,
    /// `‖A − A(:, s) A(:, s)⁺ A‖₂ / σ_{k+1}(A)`; `None` when `σ_{k+1} = 0`
    /// because `k = min(m, n)`.
    pub residual_ratio: Option<f64>,
    pub residual_norm: f64,
    pub q_bound: f64,
    /// Both rank-revealing inequalities hold with `q_bound`.
    pub within_bounds: bool,
}

/// Compares the skeleton `p[..k]` against the optimal singular values.
pub fn rank_reveal_metrics(a: &DenseMatrix, p: &[usize], k: usize) -> Result<RankRevealMetrics> {
    let (m, n) = (a.rows(), a.cols());
    if k == 0 || k > m.min(n) || p.len() < k {
        return Err(Error::InvalidArgument(format!("k = {k} invalid for a {m}x{n} matrix")));
    }
    if m * n > SVD_ORACLE_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "{m}x{n} exceeds the dense SVD oracle limit of {SVD_ORACLE_LIMIT} entries"
        )));
    }
    let sv = singular_values(a);
    let skel = a.select_columns(&p[..k]);
    let skel_sv = singular_values(&skel);
    let sigma_min = skel_sv[k - 1];
    let sigma_ratio = sigma_min / sv[k - 1];

    // Residual of projecting A onto range(A(:, s)).
    let basis = to_nalgebra(&skel).qr().q();
    let a_na = to_nalgebra(a);
    let resid = &a_na - &basis * (basis.transpose() * &a_na);
    let residual_norm = resid.singular_values().iter().copied().fold(0.0, f64::max);
    let residual_ratio = if k < m.min(n) { Some(residual_norm / sv[k]) } else { None };

    let q = q_bound(n, k);
    let slack = 1e-12;
    let within_bounds = sigma_ratio >= (1.0 - slack) / q && residual_ratio.is_none_or(|r| r <= q * (1.0 + slack));
    Ok(RankRevealMetrics { sigma_ratio, residual_ratio, residual_norm, q_bound: q, within_bounds })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormMassCdf {
    /// Fraction of the total squared column mass held by the top
    /// `⌈q·n⌉` columns, for each requested quantile `q`.
    pub fractions: Vec<f64>,
    /// The matrix had no mass at all; every fraction is 0.
    pub zero_matrix: bool,
}

/// Cumulative squared-norm mass of the largest columns at each quantile of
/// the column count.
pub fn norm_mass_cdf(a: &DenseMatrix, quantiles: &[f64]) -> NormMassCdf {
    let mut norms = a.column_sq_norms();
    norms.sort_by(|x, y| y.total_cmp(x));
    let n = norms.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for v in &norms {
        prefix.push(prefix.last().unwrap() + v);
    }
    let total = prefix[n];
    if total == 0.0 {
        return NormMassCdf { fractions: vec![0.0; quantiles.len()], zero_matrix: true };
    }
    let fractions = quantiles
        .iter()
        .map(|&q| {
            let count = ((q.clamp(0.0, 1.0) * n as f64) - 1e-9).ceil().max(0.0) as usize;
            prefix[count.min(n)] / total
        })
        .collect();
    NormMassCdf { fractions, zero_matrix: false }
}

/// Algorithms the harness can time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    CceqrCssp,
    CceqrFull,
    Gb,
    GbNaive,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::CceqrCssp, Algorithm::CceqrFull, Algorithm::Gb, Algorithm::GbNaive];

    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::CceqrCssp => "cceqr-cssp",
            Algorithm::CceqrFull => "cceqr-full",
            Algorithm::Gb => "gb",
            Algorithm::GbNaive => "gb-naive",
        }
    }

    pub fn uses_rho(self) -> bool {
        matches!(self, Algorithm::CceqrCssp | Algorithm::CceqrFull)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.tag() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown algorithm {s:?}")))
    }
}

/// What a single timed factorization produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub p: Vec<usize>,
    pub seconds: f64,
    pub cycles: Option<usize>,
    pub commits_per_cycle: Vec<usize>,
    pub max_tracked: Option<usize>,
    /// `Qᵀ A(:, p)`, rebuilt outside the timed region when not formed.
    pub r: DenseMatrix,
}

/// Runs one algorithm, timing only the factorization call.
pub fn run_timed(a: &DenseMatrix, algo: Algorithm, k: usize, rho: f64) -> Result<Outcome> {
    match algo {
        Algorithm::CceqrCssp | Algorithm::CceqrFull => {
            let full = algo == Algorithm::CceqrFull;
            let start = Instant::now();
            let sel = cceqr(a, k, rho, full)?;
            let seconds = start.elapsed().as_secs_f64();
            let r = match &sel.r {
                Some(r) => r.clone(),
                None => qt_permuted(a, &sel.p, &sel.wy)?,
            };
            Ok(Outcome {
                seconds,
                cycles: Some(sel.cycles),
                max_tracked: Some(sel.max_tracked()),
                commits_per_cycle: sel.commits_per_cycle,
                p: sel.p,
                r,
            })
        }
        Algorithm::Gb | Algorithm::GbNaive => {
            let start = Instant::now();
            let f = if algo == Algorithm::Gb { gb_qr(a, k)? } else { gb_qr_naive(a, k)? };
            let seconds = start.elapsed().as_secs_f64();
            Ok(Outcome { p: f.p, seconds, cycles: None, commits_per_cycle: Vec::new(), max_tracked: None, r: f.r })
        }
    }
}

/// One measured run, serializable as a CSV row.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub family: String,
    pub algo: Algorithm,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    /// Candidate fraction; only meaningful for CCEQR.
    pub rho: Option<f64>,
    pub trial: usize,
    pub seconds: f64,
    pub cycles: Option<usize>,
    pub commits_per_cycle: Vec<usize>,
    pub max_tracked: Option<usize>,
    pub gb_form_ok: bool,
    pub equivalence: Option<Equivalence>,
    pub sigma_ratio: Option<f64>,
    pub residual_ratio: Option<f64>,
}

pub const CSV_HEADER: [&str; 14] = [
    "family",
    "m",
    "n",
    "k",
    "algo",
    "rho",
    "trial",
    "seconds",
    "cycles",
    "max_tracked",
    "gb_ok",
    "equiv",
    "sigma_ratio",
    "residual_ratio",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl RunReport {
    pub fn equivalence_ok(&self) -> Option<bool> {
        self.equivalence.and_then(Equivalence::as_bool)
    }

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.family.clone(),
            self.m.to_string(),
            self.n.to_string(),
            self.k.to_string(),
            self.algo.tag().to_string(),
            opt(self.rho),
            self.trial.to_string(),
            format!("{:.6e}", self.seconds),
            opt(self.cycles),
            opt(self.max_tracked),
            self.gb_form_ok.to_string(),
            self.equivalence.map(|e| e.label().to_string()).unwrap_or_default(),
            opt(self.sigma_ratio),
            opt(self.residual_ratio),
        ]
    }
}

/// Times `algo` on `a` and fills in a report. With `verify`, the
/// equivalence and rank-revealing checks run when the matrix is small
/// enough for the SVD oracle.
pub fn measure(
    a: &DenseMatrix,
    family: &str,
    algo: Algorithm,
    k: usize,
    rho: f64,
    trial: usize,
    verify: bool,
) -> Result<RunReport> {
    let out = run_timed(a, algo, k, rho)?;
    let gb_form_ok = check_gb_form(&out.r, k, GB_TOL).ok;
    let (m, n) = (a.rows(), a.cols());
    let mut report = RunReport {
        family: family.to_string(),
        algo,
        m,
        n,
        k,
        rho: algo.uses_rho().then_some(rho),
        trial,
        seconds: out.seconds,
        cycles: out.cycles,
        commits_per_cycle: out.commits_per_cycle,
        max_tracked: out.max_tracked,
        gb_form_ok,
        equivalence: None,
        sigma_ratio: None,
        residual_ratio: None,
    };
    if verify && m * n <= SVD_ORACLE_LIMIT {
        let (reference, gaps) = gb_qr_naive_traced(a, k)?;
        let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
        report.equivalence = Some(if min_gap < TIE_TOL {
            Equivalence::Inconclusive
        } else if compare_prefix(&out.p, &reference.p, k).is_none() {
            Equivalence::Equivalent
        } else {
            Equivalence::Mismatch
        });
        let metrics = rank_reveal_metrics(a, &out.p, k)?;
        report.sigma_ratio = Some(metrics.sigma_ratio);
        report.residual_ratio = metrics.residual_ratio;
    }
    Ok(report)
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Median wall time of `reps` runs of `f`, in seconds.
pub fn median_seconds<T>(reps: usize, mut f: impl FnMut() -> T) -> f64 {
    let times: Vec<f64> = (0..reps.max(1))
        .map(|_| {
            let start = Instant::now();
            std::hint::black_box(f());
            start.elapsed().as_secs_f64()
        })
        .collect();
    median(&times)
}
