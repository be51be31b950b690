//! Golub-Businger column-pivoted QR and the GB(k)-form verifier.

use crate::dense::{make_reflector, DenseMatrix, HouseholderSet};
use crate::error::{Error, Result};
use crate::kernels::{dot, sq_norm};

/// Downdated squared norms below this fraction of the original are recomputed.
pub const DOWNDATE_GUARD: f64 = 1e-8;

/// Output of a GB(k) factorization: `Qᵀ A(:, p) = R` with `Q` held implicitly
/// by its reflectors. `p` is 0-based.
#[derive(Debug, Clone)]
pub struct GbFactorization {
    pub p: Vec<usize>,
    pub hs: HouseholderSet,
    pub r: DenseMatrix,
    pub k: usize,
}

impl GbFactorization {
    /// `‖Qᵀ A(:, p) − R‖_F`.
    pub fn reconstruction_error(&self, a: &DenseMatrix) -> Result<f64> {
        let mut qta = a.select_columns(&self.p);
        self.hs.apply_qt(&mut qta)?;
        Ok(qta.sub(&self.r)?.frobenius_norm())
    }
}

fn check_rank(a: &DenseMatrix, k: usize) -> Result<()> {
    let limit = a.rows().min(a.cols());
    if k == 0 || k > limit {
        return Err(Error::InvalidArgument(format!(
            "k = {k} outside 1..={limit} for a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    a.ensure_finite()
}

/// Reflects column `i` of `r` at row `i`, stores `mu` on the diagonal and
/// zeros below, and returns the full-length reflector.
fn reflect_pivot(r: &mut DenseMatrix, i: usize) -> (Vec<f64>, f64) {
    let m = r.rows();
    let col = r.col_mut(i);
    let alpha = col[i];
    let (tau, mu) = make_reflector(alpha, &mut col[i + 1..]);
    let mut v = vec![0.0; m];
    v[i] = 1.0;
    v[i + 1..].copy_from_slice(&col[i + 1..]);
    col[i] = mu;
    col[i + 1..].fill(0.0);
    (v, tau)
}

/// Applies `I − τ v vᵀ` (pivot row `i`) to rows `i..` of columns `i+1..`.
/// Returns nothing; the caller handles norms.
#[inline]
fn reflect_column(col: &mut [f64], v_tail: &[f64], tau: f64) {
    let w = tau * (col[0] + dot(v_tail, &col[1..]));
    col[0] -= w;
    for (c, &vi) in col[1..].iter_mut().zip(v_tail) {
        *c -= w * vi;
    }
}

/// Golub-Businger CPQR stopped after `k` pivots.
///
/// Column norms are downdated recursively (`γ ← γ − R(i, j)²`) and recomputed
/// from scratch once they drop below [`DOWNDATE_GUARD`] times their original
/// value. Ties in the pivot search go to the lowest column index.
pub fn gb_qr(a: &DenseMatrix, k: usize) -> Result<GbFactorization> {
    check_rank(a, k)?;
    Ok(gb_qr_in_place(a.clone(), k))
}

pub(crate) fn gb_qr_in_place(mut r: DenseMatrix, k: usize) -> GbFactorization {
    let (m, n) = (r.rows(), r.cols());
    let mut gamma = r.column_sq_norms();
    let mut gamma0 = gamma.clone();
    let mut p: Vec<usize> = (0..n).collect();
    let mut hs = HouseholderSet::new(m);

    for i in 0..k {
        let jmax = argmax_from(&gamma, i);
        if jmax != i {
            r.swap_cols(i, jmax);
            gamma.swap(i, jmax);
            gamma0.swap(i, jmax);
            p.swap(i, jmax);
        }
        let (v, tau) = reflect_pivot(&mut r, i);
        if tau != 0.0 {
            let v_tail = &v[i + 1..];
            for j in i + 1..n {
                reflect_column(&mut r.col_mut(j)[i..], v_tail, tau);
            }
        }
        for j in i + 1..n {
            let col = r.col(j);
            gamma[j] -= col[i] * col[i];
            if gamma[j] < DOWNDATE_GUARD * gamma0[j] {
                gamma[j] = sq_norm(&col[i + 1..]);
            }
        }
        hs.push(v, tau).expect("reflector height matches");
    }
    GbFactorization { p, hs, r, k }
}

/// First index of the maximum of `x[from..]`, as an absolute index.
fn argmax_from(x: &[f64], from: usize) -> usize {
    let mut best = from;
    for j in from + 1..x.len() {
        if x[j] > x[best] {
            best = j;
        }
    }
    best
}

/// Literal Golub-Businger: residual norms recomputed from scratch at every
/// step. Slow; serves as the correctness oracle for the fast paths.
pub fn gb_qr_naive(a: &DenseMatrix, k: usize) -> Result<GbFactorization> {
    gb_qr_naive_traced(a, k).map(|(f, _)| f)
}

/// [`gb_qr_naive`] that also reports, for every step, the relative gap
/// `(best − runner_up) / best` between the two largest residual norms.
/// A step with a single remaining column reports `+∞`; a zero residual
/// reports `0`.
pub fn gb_qr_naive_traced(a: &DenseMatrix, k: usize) -> Result<(GbFactorization, Vec<f64>)> {
    check_rank(a, k)?;
    let mut r = a.clone();
    let (m, n) = (r.rows(), r.cols());
    let mut p: Vec<usize> = (0..n).collect();
    let mut hs = HouseholderSet::new(m);
    let mut gaps = Vec::with_capacity(k);

    for i in 0..k {
        let norms: Vec<f64> = (i..n).map(|j| r.partial_col_sq_norm(i..m, j).sqrt()).collect();
        let local = argmax_from(&norms, 0);
        let best = norms[local];
        let runner_up = norms
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != local)
            .map(|(_, &v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        gaps.push(if runner_up == f64::NEG_INFINITY {
            f64::INFINITY
        } else if best == 0.0 {
            0.0
        } else {
            (best - runner_up) / best
        });

        let jmax = i + local;
        r.swap_cols(i, jmax);
        p.swap(i, jmax);
        let (v, tau) = reflect_pivot(&mut r, i);
        let mut rest = r.submatrix(0..m, i + 1..n);
        crate::dense::apply_reflector(&mut rest, &v, tau)?;
        for (jj, j) in (i + 1..n).enumerate() {
            r.col_mut(j).copy_from_slice(rest.col(jj));
        }
        hs.push(v, tau)?;
    }
    Ok((GbFactorization { p, hs, r, k }, gaps))
}

/// The first way in which a matrix fails GB(k) form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GbViolation {
    /// `R(row, col)` below the diagonal of a leading column is too large.
    Subdiagonal { row: usize, col: usize, value: f64 },
    /// `‖R(row.., col)‖₂` exceeds the diagonal `|R(row, row)|`.
    Dominance { row: usize, col: usize, diagonal: f64, residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbCheck {
    pub ok: bool,
    pub violation: Option<GbViolation>,
}

/// Tests GB(k) form with relative tolerance `tol`.
///
/// The leading `k` columns must be upper-triangular with every subdiagonal
/// entry at most `tol·‖R‖_F`, and `|R(i,i)| ≥ (1 − tol)·‖R(i.., j)‖₂` for all
/// `j ≥ i`, `i < k`. `k` is clamped to `min(rows, cols)`. Indices in the
/// report are 0-based; subdiagonal violations are reported before dominance
/// ones.
pub fn check_gb_form(r: &DenseMatrix, k: usize, tol: f64) -> GbCheck {
    let (m, n) = (r.rows(), r.cols());
    let k = k.min(m).min(n);
    let fro = r.frobenius_norm();
    for j in 0..k {
        for i in j + 1..m {
            if r[(i, j)].abs() > tol * fro {
                return GbCheck {
                    ok: false,
                    violation: Some(GbViolation::Subdiagonal { row: i, col: j, value: r[(i, j)] }),
                };
            }
        }
    }
    let diag: Vec<f64> = (0..k).map(|i| r[(i, i)].abs()).collect();
    let mut first: Vec<Option<(usize, f64)>> = vec![None; k];
    let mut suffix = vec![0.0; m + 1];
    for j in 0..n {
        let col = r.col(j);
        for i in (0..m).rev() {
            suffix[i] = suffix[i + 1] + col[i] * col[i];
        }
        for i in 0..k.min(j + 1) {
            let residual = suffix[i].sqrt();
            if first[i].is_none() && diag[i] < (1.0 - tol) * residual {
                first[i] = Some((j, residual));
            }
        }
    }
    for (i, hit) in first.iter().enumerate() {
        if let Some((j, residual)) = *hit {
            return GbCheck {
                ok: false,
                violation: Some(GbViolation::Dominance { row: i, col: j, diagonal: diag[i], residual }),
            };
        }
    }
    GbCheck { ok: true, violation: None }
}
