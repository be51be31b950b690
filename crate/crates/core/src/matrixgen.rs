//! Seedable generators for the test-matrix families.
//!
//! Randomness comes from `rand_chacha::ChaCha8Rng` seeded with
//! `seed_from_u64(seed)`; normal deviates use `rand_distr::StandardNormal`.
//! Both are pinned so fixtures regenerate bit-for-bit across runs.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Largest point count handled by the dense kernel eigensolver; bigger
/// problems go through the compressed path.
pub const DENSE_KERNEL_LIMIT: usize = 1024;

/// Partial Cholesky rank, as a multiple of the component count.
pub const CHOLESKY_OVERSAMPLING: usize = 5;

/// Eigenvalue ratio below which the kernel is declared rank-deficient.
const RANK_TOL: f64 = 1e-12;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `m × n` matrix of i.i.d. standard normal entries, filled column by column.
pub fn gen_gaussian(m: usize, n: usize, seed: u64) -> DenseMatrix {
    let mut rng = rng(seed);
    let data = (0..m * n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    DenseMatrix::from_col_major(m, n, data).expect("length matches")
}

/// Columns scaled by `1 + 1000·(n − j + 1)·2⁻⁵²` (1-based `j`) break norm ties.
pub fn hadamard_scale(n: usize, j: usize) -> f64 {
    1.0 + 1000.0 * (n - j) as f64 * f64::EPSILON
}

/// Unscaled adversary: the first `2^kexp` rows of the `2^rexp` Sylvester
/// Hadamard matrix with columns regrouped so each colinear class is
/// contiguous.
pub fn hadamard_rows_grouped(kexp: u32, rexp: u32) -> Result<DenseMatrix> {
    if kexp < 1 || kexp > rexp || rexp > 30 {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= kexp <= rexp <= 30, got kexp = {kexp}, rexp = {rexp}"
        )));
    }
    let m = 1usize << kexp;
    let n = 1usize << rexp;
    let group = n >> kexp;
    // Sylvester entry (i, c) is (−1)^popcount(i & c); for i < 2^kexp it only
    // depends on c mod 2^kexp, which is the colinear class.
    Ok(DenseMatrix::from_fn(m, n, |i, j| {
        let class = j / group;
        if (i & class).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }))
}

/// The scaled Hadamard adversary (`2^kexp × 2^rexp`).
pub fn gen_hadamard_adversary(kexp: u32, rexp: u32) -> Result<DenseMatrix> {
    let mut h = hadamard_rows_grouped(kexp, rexp)?;
    let n = h.cols();
    for j in 0..n {
        let scale = hadamard_scale(n, j);
        for v in h.col_mut(j) {
            *v *= scale;
        }
    }
    Ok(h)
}

/// Equal-weight mixture of `m` unit Gaussians centred at `ℓ·e_i` in `R^m`,
/// with Gaussian kernel variance `sigma2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureSpec {
    pub m: usize,
    pub n: usize,
    pub ell: f64,
    pub sigma2: f64,
    pub seed: u64,
}

impl MixtureSpec {
    pub fn new(m: usize, n: usize, ell: f64, seed: u64) -> Self {
        MixtureSpec { m, n, ell, sigma2: 5.0, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 || self.n < self.m {
            return Err(Error::InvalidArgument(format!(
                "mixture needs 1 <= m <= n, got m = {}, n = {}",
                self.m, self.n
            )));
        }
        if !(self.ell >= 0.0) || !(self.sigma2 > 0.0) || !self.ell.is_finite() || !self.sigma2.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "mixture needs ell >= 0 and sigma2 > 0, got ell = {}, sigma2 = {}",
                self.ell, self.sigma2
            )));
        }
        Ok(())
    }

    pub fn uses_compression(&self) -> bool {
        self.n > DENSE_KERNEL_LIMIT
    }
}

#[derive(Debug, Clone)]
pub struct MixtureSample {
    /// Points as columns (`m × n`).
    pub points: DenseMatrix,
    /// Component each point was drawn from.
    pub labels: Vec<usize>,
    /// Leading `m` eigenvectors of the normalized kernel, as rows (`m × n`).
    pub eigvecs: DenseMatrix,
}

pub fn mixture_points(spec: &MixtureSpec) -> Result<(DenseMatrix, Vec<usize>)> {
    spec.validate()?;
    let mut rng = rng(spec.seed);
    let mut points = DenseMatrix::zeros(spec.m, spec.n);
    let mut labels = Vec::with_capacity(spec.n);
    for j in 0..spec.n {
        let label = rng.random_range(0..spec.m);
        labels.push(label);
        let col = points.col_mut(j);
        for (i, x) in col.iter_mut().enumerate() {
            let noise: f64 = rng.sample(StandardNormal);
            *x = noise + if i == label { spec.ell } else { 0.0 };
        }
    }
    Ok((points, labels))
}

pub fn gen_mixture(spec: &MixtureSpec) -> Result<MixtureSample> {
    let (points, labels) = mixture_points(spec)?;
    let eigvecs = if spec.uses_compression() {
        let rank = (CHOLESKY_OVERSAMPLING * spec.m).min(spec.n);
        kernel_eigvecs_compressed(&points, spec.sigma2, spec.m, rank)?
    } else {
        kernel_eigvecs_dense(&points, spec.sigma2, spec.m)?
    };
    Ok(MixtureSample { points, labels, eigvecs })
}

/// `W_mᵀ` for the mixture described by `spec`.
pub fn gen_mixture_eigvecs(spec: &MixtureSpec) -> Result<DenseMatrix> {
    gen_mixture(spec).map(|s| s.eigvecs)
}

fn kernel(points: &DenseMatrix, i: usize, j: usize, inv_two_sigma2: f64) -> f64 {
    let d2: f64 = points.col(i).iter().zip(points.col(j)).map(|(a, b)| (a - b) * (a - b)).sum();
    (-d2 * inv_two_sigma2).exp()
}

/// Top `m` eigenpairs (descending) of a symmetric matrix; fails if the
/// `m`-th eigenvalue is negligible.
fn leading_eigen(mat: DMatrix<f64>, m: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let eig = SymmetricEigen::new(mat);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]];
    let mth = eig.eigenvalues[order[m - 1]];
    if !(top > 0.0) || !(mth > RANK_TOL * top) {
        return Err(Error::DegenerateKernel(format!(
            "eigenvalue {m} is {mth:e} against a leading {top:e}; points may be duplicated"
        )));
    }
    let vals = order[..m].iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(eig.eigenvectors.nrows(), m, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((vals, vecs))
}

/// Exact path: dense normalized kernel and a full symmetric eigensolve.
pub fn kernel_eigvecs_dense(points: &DenseMatrix, sigma2: f64, m: usize) -> Result<DenseMatrix> {
    let n = points.cols();
    let inv = 0.5 / sigma2;
    let mut k = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        k[(j, j)] = 1.0;
        for i in 0..j {
            let v = kernel(points, i, j, inv);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    let d: Vec<f64> = (0..n).map(|i| k.column(i).sum()).collect();
    for j in 0..n {
        for i in 0..n {
            k[(i, j)] /= (d[i] * d[j]).sqrt();
        }
    }
    let (_, vecs) = leading_eigen(k, m)?;
    Ok(DenseMatrix::from_fn(m, n, |r, c| vecs[(c, r)]))
}

/// Compressed path: rank-`rank` pivoted partial Cholesky `K ≈ L Lᵀ`, degrees
/// from the factor, then the leading left singular vectors of `D^{-1/2} L`.
pub fn kernel_eigvecs_compressed(points: &DenseMatrix, sigma2: f64, m: usize, rank: usize) -> Result<DenseMatrix> {
    let n = points.cols();
    let l = partial_cholesky(points, sigma2, rank);
    let got = l.cols();
    if got < m {
        return Err(Error::DegenerateKernel(format!(
            "partial Cholesky stopped at rank {got} < {m}; points may be duplicated"
        )));
    }

    let ones = DenseMatrix::from_col_major(n, 1, vec![1.0; n])?;
    let degrees = l.matmul(&l.tr_matmul(&ones)?)?;
    let mut g = l;
    for i in 0..n {
        let di = degrees[(i, 0)];
        if !(di > 0.0) {
            return Err(Error::DegenerateKernel(format!("non-positive degree {di:e} at point {i}")));
        }
        let scale = di.sqrt().recip();
        for c in 0..got {
            g[(i, c)] *= scale;
        }
    }

    let gram = g.tr_matmul(&g)?;
    let (vals, vecs) = leading_eigen(DMatrix::from_column_slice(got, got, gram.as_slice()), m)?;
    let w = DenseMatrix::from_fn(got, m, |r, c| vecs[(r, c)] / vals[c].sqrt());
    let mut u = g.matmul(&w)?;
    // Cholesky-QR passes restore orthonormality lost to the Gram route.
    for _ in 0..2 {
        let s = u.tr_matmul(&u)?;
        let chol = nalgebra::Cholesky::new(DMatrix::from_column_slice(m, m, s.as_slice()))
            .ok_or_else(|| Error::DegenerateKernel("embedding lost rank".into()))?;
        let rinv = chol
            .l()
            .transpose()
            .try_inverse()
            .ok_or_else(|| Error::DegenerateKernel("singular triangular factor".into()))?;
        let rinv = DenseMatrix::from_col_major(m, m, rinv.as_slice().to_vec())?;
        u = u.matmul(&rinv)?;
    }
    Ok(u.transpose())
}

/// Greedy pivoted partial Cholesky of the Gaussian kernel matrix, stopping at
/// `rank` columns or when the residual diagonal vanishes. Returns `L` (`n × r`).
fn partial_cholesky(points: &DenseMatrix, sigma2: f64, rank: usize) -> DenseMatrix {
    let n = points.cols();
    let inv = 0.5 / sigma2;
    let mut diag = vec![1.0; n];
    let mut l = DenseMatrix::zeros(n, rank);
    let mut got = 0;
    for c in 0..rank {
        let mut piv = 0;
        for i in 1..n {
            if diag[i] > diag[piv] {
                piv = i;
            }
        }
        if diag[piv] <= RANK_TOL {
            break;
        }
        let pivot_row: Vec<f64> = (0..c).map(|q| l[(piv, q)]).collect();
        let scale = diag[piv].sqrt().recip();
        let mut col: Vec<f64> = (0..n).map(|i| kernel(points, i, piv, inv)).collect();
        for (q, &lq) in pivot_row.iter().enumerate() {
            for (x, &y) in col.iter_mut().zip(l.col(q)) {
                *x -= lq * y;
            }
        }
        for x in &mut col {
            *x *= scale;
        }
        for (dv, &x) in diag.iter_mut().zip(&col) {
            *dv = (*dv - x * x).max(0.0);
        }
        diag[piv] = 0.0;
        l.col_mut(c).copy_from_slice(&col);
        got = c + 1;
    }
    if got < rank {
        l = l.submatrix(0..n, 0..got);
    }
    l
}
