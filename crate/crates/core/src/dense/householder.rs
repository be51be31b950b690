use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::kernels::{dot, sq_norm};

/// Output of [`householder`]: `(I − τ v vᵀ) x = [x(..i), mu, 0, …, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Householder {
    pub v: Vec<f64>,
    pub tau: f64,
    pub mu: f64,
}

/// Generates a reflector in place on `x = [alpha, tail…]`.
///
/// On return `tail` holds `v(i+1..)` (with `v(i) = 1` implicit) and the pair
/// `(tau, mu)` is returned. `mu = −sign(alpha)·‖x‖₂` with `sign(0) = +1`; a
/// zero tail yields the identity reflector and leaves `mu = alpha`.
pub(crate) fn make_reflector(alpha: f64, tail: &mut [f64]) -> (f64, f64) {
    let tail_sq = sq_norm(tail);
    if tail_sq == 0.0 {
        return (0.0, alpha);
    }
    let norm = (alpha * alpha + tail_sq).sqrt();
    let beta = if alpha >= 0.0 { -norm } else { norm };
    let tau = (beta - alpha) / beta;
    let scale = 1.0 / (alpha - beta);
    for t in tail.iter_mut() {
        *t *= scale;
    }
    (tau, beta)
}

/// Householder reflector for `x` pivoting at (0-based) row `i`.
pub fn householder(x: &[f64], i: usize) -> Result<Householder> {
    if i >= x.len() {
        return Err(Error::OutOfRange(format!("pivot {i} for vector of length {}", x.len())));
    }
    let mut v = vec![0.0; x.len()];
    v[i] = 1.0;
    v[i + 1..].copy_from_slice(&x[i + 1..]);
    let (tau, mu) = make_reflector(x[i], &mut v[i + 1..]);
    Ok(Householder { v, tau, mu })
}

/// `m ← (I − τ v vᵀ) m` as a rank-1 update, column by column.
pub fn apply_reflector(m: &mut DenseMatrix, v: &[f64], tau: f64) -> Result<()> {
    if v.len() != m.rows() {
        return Err(Error::DimensionMismatch(format!(
            "reflector of length {} applied to {} rows",
            v.len(),
            m.rows()
        )));
    }
    if tau == 0.0 {
        return Ok(());
    }
    let first = v.iter().position(|&x| x != 0.0).unwrap_or(v.len());
    let v = &v[first..];
    for j in 0..m.cols() {
        let col = &mut m.col_mut(j)[first..];
        let w = tau * dot(v, col);
        for (c, &vi) in col.iter_mut().zip(v) {
            *c -= w * vi;
        }
    }
    Ok(())
}

/// One reflector `I − τ v vᵀ` with a full-length vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Reflector {
    pub v: Vec<f64>,
    pub tau: f64,
}

/// Ordered reflectors; reflector `i` pivots at row `i`, so `Q = H₀H₁⋯`.
#[derive(Debug, Clone, PartialEq)]
pub struct HouseholderSet {
    rows: usize,
    reflectors: Vec<Reflector>,
}

impl HouseholderSet {
    pub fn new(rows: usize) -> Self {
        HouseholderSet { rows, reflectors: Vec::new() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn len(&self) -> usize {
        self.reflectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reflectors.is_empty()
    }

    pub fn reflectors(&self) -> &[Reflector] {
        &self.reflectors
    }

    pub fn taus(&self) -> Vec<f64> {
        self.reflectors.iter().map(|r| r.tau).collect()
    }

    pub fn push(&mut self, v: Vec<f64>, tau: f64) -> Result<()> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "reflector of length {} in a set of height {}",
                v.len(),
                self.rows
            )));
        }
        self.reflectors.push(Reflector { v, tau });
        Ok(())
    }

    /// The first `count` reflectors.
    pub fn prefix(&self, count: usize) -> HouseholderSet {
        HouseholderSet {
            rows: self.rows,
            reflectors: self.reflectors[..count.min(self.len())].to_vec(),
        }
    }

    /// `m ← Qᵀ m`, applying reflectors one at a time (H₀ first).
    pub fn apply_qt(&self, m: &mut DenseMatrix) -> Result<()> {
        for r in &self.reflectors {
            apply_reflector(m, &r.v, r.tau)?;
        }
        Ok(())
    }

    /// `m ← Q m`, applying reflectors one at a time (last first).
    pub fn apply_q(&self, m: &mut DenseMatrix) -> Result<()> {
        for r in self.reflectors.iter().rev() {
            apply_reflector(m, &r.v, r.tau)?;
        }
        Ok(())
    }

    /// Explicit `Q = H₀H₁⋯` as a dense `rows × rows` matrix.
    pub fn to_dense_q(&self) -> DenseMatrix {
        let mut q = DenseMatrix::identity(self.rows);
        self.apply_q(&mut q).expect("square by construction");
        q
    }

    /// Checks the unit-lower-trapezoidal pattern: `v(..i) = 0`, `v(i) = 1`.
    pub fn check_pattern(&self) -> Result<()> {
        for (i, r) in self.reflectors.iter().enumerate() {
            if i >= self.rows || r.v[..i].iter().any(|&x| x != 0.0) || r.v[i] != 1.0 {
                return Err(Error::Contract(format!(
                    "reflector {i} is not zero above and one on its pivot row"
                )));
            }
        }
        Ok(())
    }
}
