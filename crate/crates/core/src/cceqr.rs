//! Collect-commit-expand QR (CCEQR).
//!
//! Columns of the working matrix are split into three contiguous blocks:
//! committed skeleton columns `0..s`, tracked columns `s..s+t` whose
//! residual norms are maintained, and untracked columns `s+t..n` known only
//! by their original norm. Each cycle
//!
//! 1. *collects* the `b = 1 + ⌊ρ(t−1)⌋` tracked columns with largest
//!    residual and factorizes them with Golub-Businger pivoting,
//! 2. *commits* the leading pivots whose squared residual clears both the
//!    largest non-candidate tracked residual `δ` and the largest untracked
//!    norm `μ`, and
//! 3. *expands* the tracked set with every untracked column whose norm
//!    reaches the largest remaining tracked residual.
//!
//! Householder reflectors are only applied to the tracked set, through a
//! compact WY accumulator, so when the norm mass of the input is
//! concentrated most columns are never touched. The resulting permutation
//! reduces `A` to the same GB(k) form as Golub-Businger.

use crate::dense::{apply_qt_block, compact_wy, update_wy, CompactWY, DenseMatrix, HouseholderSet};
use crate::error::{Error, Result};
use crate::pivoted_qr::gb_qr_in_place;

pub const DEFAULT_RHO: f64 = 0.05;

/// Relative slack allowed when the leading candidate pivot ties with the
/// acceptance threshold up to rounding.
pub const ACCEPTANCE_SLACK: f64 = 1e-10;

/// Fraction of `μ` used when no untracked column reaches the expand threshold.
pub const EXPAND_FALLBACK: f64 = 0.9;

/// Full per-run state. `p` is 0-based and `R(:, j)` always corresponds to
/// `A(:, p[j])`.
#[derive(Debug, Clone)]
pub struct CceqrState {
    s: usize,
    t: usize,
    mu: f64,
    gamma: Vec<f64>,
    p: Vec<usize>,
    wy: CompactWY,
    r: DenseMatrix,
    k: usize,
    rho: f64,
    first_cycle: bool,
    commits_per_cycle: Vec<usize>,
    tracked_history: Vec<usize>,
}

/// Data handed from the collect step to the commit step.
#[derive(Debug, Clone)]
pub struct CollectOutput {
    /// Largest squared residual among non-candidate tracked columns (0 if none).
    pub delta: f64,
    /// Pivot order of the candidates, as positions in the candidate block.
    pub phat: Vec<usize>,
    pub tauhat: Vec<f64>,
    /// Reflectors of height `m − s`.
    pub vhat: HouseholderSet,
    /// R-factor of the candidate block, `(m − s) × b`.
    pub rhat: DenseMatrix,
    pub b: usize,
}

/// Outcome of a full CCEQR run.
#[derive(Debug, Clone)]
pub struct SelectionResult {
    pub p: Vec<usize>,
    pub k: usize,
    pub cycles: usize,
    pub commits_per_cycle: Vec<usize>,
    /// Tracked-set size each cycle worked with (after the first-cycle shrink).
    pub tracked_history: Vec<usize>,
    /// `Qᵀ A(:, p)` in full; present only in full mode.
    pub r: Option<DenseMatrix>,
    pub wy: CompactWY,
}

impl SelectionResult {
    /// The `k` selected skeleton columns.
    pub fn skeleton(&self) -> &[usize] {
        &self.p[..self.k]
    }

    pub fn max_tracked(&self) -> usize {
        self.tracked_history.iter().copied().max().unwrap_or(0)
    }

    /// Largest `s + t` seen at a cycle start; equals `n` once every column
    /// has been brought into the tracked set.
    pub fn max_covered(&self) -> usize {
        let mut s = 0;
        let mut best = 0;
        for (&c, &t) in self.commits_per_cycle.iter().zip(&self.tracked_history) {
            best = best.max(s + t);
            s += c;
        }
        best
    }

    /// `Qᵀ A(:, p)` rebuilt from the accumulated WY factors.
    pub fn reconstruct_r(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        qt_permuted(a, &self.p, &self.wy)
    }
}

/// `Qᵀ A(:, p)` for `Q = I − V T Vᵀ`.
pub fn qt_permuted(a: &DenseMatrix, p: &[usize], wy: &CompactWY) -> Result<DenseMatrix> {
    let mut r = a.select_columns(p);
    let (m, n) = (r.rows(), r.cols());
    apply_qt_block(&mut r, wy, 0..m, 0..n)?;
    Ok(r)
}

fn check_args(a: &DenseMatrix, k: usize, rho: f64) -> Result<()> {
    let limit = a.rows().min(a.cols());
    if k == 0 || k > limit {
        return Err(Error::InvalidArgument(format!(
            "k = {k} outside 1..={limit} for a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidArgument(format!("rho = {rho} must lie in (0, 1)")));
    }
    a.ensure_finite()
}

/// Starts a run: identity permutation, every column tracked, `μ = 0`.
pub fn initialize(a: &DenseMatrix, k: usize, rho: f64) -> Result<CceqrState> {
    check_args(a, k, rho)?;
    let n = a.cols();
    Ok(CceqrState {
        s: 0,
        t: n,
        mu: 0.0,
        gamma: a.column_sq_norms(),
        p: (0..n).collect(),
        wy: CompactWY::with_capacity(a.rows(), k),
        r: a.clone(),
        k,
        rho,
        first_cycle: true,
        commits_per_cycle: Vec::new(),
        tracked_history: Vec::new(),
    })
}

/// Number of candidates collected from `t` tracked columns.
pub fn candidate_count(rho: f64, t: usize) -> usize {
    1 + (rho * (t.saturating_sub(1)) as f64).floor() as usize
}

/// `max{ i : |R̂(i,i)|² ≥ max(δ, μ) }` as a 1-based count.
///
/// Fails only if even the leading pivot misses the threshold by more than
/// [`ACCEPTANCE_SLACK`], which the tracked/untracked norm invariant rules out.
pub fn acceptance_count(rhat: &DenseMatrix, delta: f64, mu: f64) -> Result<usize> {
    let threshold = delta.max(mu);
    let d = rhat.rows().min(rhat.cols());
    let diag_sq = |i: usize| rhat[(i, i)] * rhat[(i, i)];
    if let Some(last) = (0..d).rev().find(|&i| diag_sq(i) >= threshold) {
        return Ok(last + 1);
    }
    if d > 0 && diag_sq(0) >= threshold * (1.0 - ACCEPTANCE_SLACK) {
        return Ok(1);
    }
    Err(Error::Invariant(format!(
        "leading candidate pivot {} is below the acceptance threshold {threshold}",
        if d > 0 { diag_sq(0) } else { f64::NAN }
    )))
}

impl CceqrState {
    pub fn s(&self) -> usize {
        self.s
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn p(&self) -> &[usize] {
        &self.p
    }

    pub fn wy(&self) -> &CompactWY {
        &self.wy
    }

    /// Working matrix: rotated committed and tracked columns, raw untracked ones.
    pub fn r(&self) -> &DenseMatrix {
        &self.r
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn first_cycle(&self) -> bool {
        self.first_cycle
    }

    pub fn is_done(&self) -> bool {
        self.s >= self.k
    }

    pub fn has_untracked(&self) -> bool {
        self.s + self.t < self.r.cols()
    }

    pub fn commits_per_cycle(&self) -> &[usize] {
        &self.commits_per_cycle
    }

    pub fn tracked_history(&self) -> &[usize] {
        &self.tracked_history
    }

    /// Largest tracked squared residual.
    pub fn max_tracked_gamma(&self) -> f64 {
        self.gamma[self.s..self.s + self.t].iter().copied().fold(0.0, f64::max)
    }

    fn swap(&mut self, a: usize, b: usize) {
        if a != b {
            self.r.swap_cols(a, b);
            self.gamma.swap(a, b);
            self.p.swap(a, b);
        }
    }

    /// Selects candidates, factorizes their residuals and moves them, in
    /// pivot order, to the front of the tracked block.
    pub fn collect(&mut self) -> Result<CollectOutput> {
        let (s, t) = (self.s, self.t);
        if s >= self.k || t == 0 {
            return Err(Error::Invariant(format!("collect called with s = {s}, t = {t}, k = {}", self.k)));
        }
        let m = self.r.rows();
        let b = candidate_count(self.rho, t);

        // σ: tracked positions ordered by decreasing residual, ties to the
        // lowest position. Only the top b + 1 are needed.
        let gamma = &self.gamma[s..s + t];
        let cmp = |x: &usize, y: &usize| gamma[*y].total_cmp(&gamma[*x]).then(x.cmp(y));
        let mut sigma: Vec<usize> = (0..t).collect();
        let head = (b + 1).min(t);
        if head < t {
            sigma.select_nth_unstable_by(head - 1, cmp);
        }
        sigma[..head].sort_unstable_by(cmp);
        let delta = if b < t { gamma[sigma[b]] } else { 0.0 };

        let mut block = DenseMatrix::zeros(m - s, b);
        for (i, &loc) in sigma[..b].iter().enumerate() {
            block.col_mut(i).copy_from_slice(&self.r.col(s + loc)[s..]);
        }
        let d = (m - s).min(b);
        let f = gb_qr_in_place(block, d);

        // Move candidate sigma[phat[i]] to tracked position i.
        let mut where_is: Vec<usize> = (0..t).collect();
        let mut who: Vec<usize> = (0..t).collect();
        for (i, &cand) in f.p.iter().enumerate() {
            let want = sigma[cand];
            let at = where_is[want];
            if at != i {
                self.swap(s + i, s + at);
                let displaced = who[i];
                who.swap(i, at);
                where_is[want] = i;
                where_is[displaced] = at;
            }
        }

        if self.first_cycle {
            self.t = b;
            self.first_cycle = false;
        }
        self.tracked_history.push(self.t);

        Ok(CollectOutput {
            delta,
            phat: f.p,
            tauhat: f.hs.taus(),
            vhat: f.hs,
            rhat: f.r,
            b,
        })
    }

    /// Commits the accepted candidates and downdates tracked residuals.
    /// Returns the largest remaining tracked squared residual (0 if none).
    pub fn commit(&mut self, co: &CollectOutput) -> Result<f64> {
        let (s, t) = (self.s, self.t);
        let m = self.r.rows();
        let c = acceptance_count(&co.rhat, co.delta, self.mu)?.min(self.k - s).min(t);

        let new = compact_wy(&co.vhat.prefix(c))?;
        apply_qt_block(&mut self.r, &new, s..m, s..s + t)?;
        update_wy(&mut self.wy, &new)?;
        for i in 0..c {
            self.r.col_mut(s + i)[s..].copy_from_slice(co.rhat.col(i));
        }

        let mut max_residual = 0.0f64;
        for j in s + c..s + t {
            let g = (self.gamma[j] - self.r.partial_col_sq_norm(s..s + c, j)).max(0.0);
            self.gamma[j] = g;
            max_residual = max_residual.max(g);
        }
        for j in s..s + c {
            self.gamma[j] = 0.0;
        }

        self.commits_per_cycle.push(c);
        self.s = s + c;
        self.t = t - c;
        Ok(max_residual)
    }

    /// Moves every untracked column with squared norm `≥ threshold` into the
    /// tracked set (falling back to `0.9·μ` if none qualifies), rotates the
    /// newcomers by the accumulated `Qᵀ` and records their residuals.
    /// Returns how many columns joined.
    pub fn expand(&mut self, threshold: f64) -> Result<usize> {
        let (s, t) = (self.s, self.t);
        let n = self.r.cols();
        let m = self.r.rows();
        if s + t >= n {
            return Ok(0);
        }

        let scan = |gamma: &[f64], alpha: f64| {
            let mut hits = Vec::new();
            let mut below = 0.0f64;
            for (j, &g) in gamma.iter().enumerate().skip(s + t) {
                if g >= alpha {
                    hits.push(j);
                } else {
                    below = below.max(g);
                }
            }
            (hits, below)
        };
        let (mut joined, mut mu) = scan(&self.gamma, threshold);
        if joined.is_empty() {
            (joined, mu) = scan(&self.gamma, EXPAND_FALLBACK * mu);
        }
        self.mu = mu;

        let start = s + t;
        for (w, &j) in (start..).zip(&joined) {
            self.swap(w, j);
        }
        let r = joined.len();
        apply_qt_block(&mut self.r, &self.wy, 0..m, start..start + r)?;
        for j in start..start + r {
            self.gamma[j] = (self.gamma[j] - self.r.partial_col_sq_norm(0..s, j)).max(0.0);
        }
        self.t += r;
        Ok(r)
    }

    fn finish(mut self, full: bool) -> Result<SelectionResult> {
        let cycles = self.commits_per_cycle.len();
        let r = if full {
            let (m, n) = (self.r.rows(), self.r.cols());
            let start = self.s + self.t;
            apply_qt_block(&mut self.r, &self.wy, 0..m, start..n)?;
            Some(self.r)
        } else {
            None
        };
        Ok(SelectionResult {
            p: self.p,
            k: self.k,
            cycles,
            commits_per_cycle: self.commits_per_cycle,
            tracked_history: self.tracked_history,
            r,
            wy: self.wy,
        })
    }
}

/// Runs CCEQR to a skeleton of `k` columns. With `full`, the remaining
/// untracked columns are rotated too so that `R = Qᵀ A(:, p)` is complete.
pub fn cceqr(a: &DenseMatrix, k: usize, rho: f64, full: bool) -> Result<SelectionResult> {
    let mut state = initialize(a, k, rho)?;
    while !state.is_done() {
        let co = state.collect()?;
        let max_residual = state.commit(&co)?;
        if !state.is_done() && state.has_untracked() {
            state.expand(max_residual)?;
        }
    }
    state.finish(full)
}
