//! Compact WY representation `Q = I − V T Vᵀ` and its blocked application.

use std::ops::Range;

use crate::dense::{DenseMatrix, HouseholderSet};
use crate::error::{Error, Result};
use crate::kernels::{self, BlockMut};

/// Compact WY factors, pre-allocated to a fixed capacity and zero-padded.
///
/// Only the leading `r` columns of `V` and the leading `r × r` block of `T`
/// are live. `V` is unit lower-trapezoidal with explicit zeros above the
/// diagonal; `T` is upper-triangular.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactWY {
    v: DenseMatrix,
    t: DenseMatrix,
    r: usize,
}

impl CompactWY {
    /// Empty factors for `rows`-tall reflectors, room for `capacity` of them.
    pub fn with_capacity(rows: usize, capacity: usize) -> Self {
        CompactWY {
            v: DenseMatrix::zeros(rows, capacity),
            t: DenseMatrix::zeros(capacity, capacity),
            r: 0,
        }
    }

    pub fn rows(&self) -> usize {
        self.v.rows()
    }

    pub fn capacity(&self) -> usize {
        self.v.cols()
    }

    /// Number of live reflectors.
    pub fn len(&self) -> usize {
        self.r
    }

    pub fn is_empty(&self) -> bool {
        self.r == 0
    }

    /// Padded `V` (rows × capacity).
    pub fn v(&self) -> &DenseMatrix {
        &self.v
    }

    /// Padded `T` (capacity × capacity).
    pub fn t(&self) -> &DenseMatrix {
        &self.t
    }

    /// Explicit `I − V T Vᵀ`.
    pub fn to_dense_q(&self) -> DenseMatrix {
        let h = self.rows();
        let r = self.r;
        let v = self.v.submatrix(0..h, 0..r);
        let t = self.t.submatrix(0..r, 0..r);
        let vt = v.matmul(&t).expect("conformal");
        let vtvt = vt.matmul(&v.transpose()).expect("conformal");
        DenseMatrix::identity(h).sub(&vtvt).expect("square")
    }
}

/// Builds `T` one reflector at a time (Schreiber-Van Loan) so that
/// `I − V T Vᵀ = H₀H₁⋯H_{r−1}`.
pub fn compact_wy(hs: &HouseholderSet) -> Result<CompactWY> {
    hs.check_pattern()?;
    let rows = hs.rows();
    let r = hs.len();
    let mut wy = CompactWY::with_capacity(rows, r);
    for (i, refl) in hs.reflectors().iter().enumerate() {
        wy.v.col_mut(i).copy_from_slice(&refl.v);
        // z = V(:, ..i)ᵀ v_i, restricted to rows ≥ i where v_i is nonzero.
        let z: Vec<f64> = (0..i)
            .map(|l| kernels::dot(&wy.v.col(l)[i..], &refl.v[i..]))
            .collect();
        // T(..i, i) = −τ_i · T(..i, ..i) · z
        for l in 0..i {
            let acc: f64 = (l..i).map(|q| wy.t[(l, q)] * z[q]).sum();
            wy.t[(l, i)] = -refl.tau * acc;
        }
        wy.t[(i, i)] = refl.tau;
    }
    wy.r = r;
    Ok(wy)
}

/// Overwrites `m(rows, cols)` with `(I − V T Vᵀ)ᵀ · m(rows, cols)`.
pub fn apply_qt_block(m: &mut DenseMatrix, wy: &CompactWY, rows: Range<usize>, cols: Range<usize>) -> Result<()> {
    apply_block(m, wy, rows, cols, true)
}

/// Overwrites `m(rows, cols)` with `(I − V T Vᵀ) · m(rows, cols)`.
pub fn apply_q_block(m: &mut DenseMatrix, wy: &CompactWY, rows: Range<usize>, cols: Range<usize>) -> Result<()> {
    apply_block(m, wy, rows, cols, false)
}

fn apply_block(m: &mut DenseMatrix, wy: &CompactWY, rows: Range<usize>, cols: Range<usize>, transpose: bool) -> Result<()> {
    if rows.start > rows.end || rows.end > m.rows() || cols.start > cols.end || cols.end > m.cols() {
        return Err(Error::OutOfRange(format!(
            "block {rows:?} x {cols:?} in a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if rows.len() != wy.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{} block rows but reflectors of height {}",
            rows.len(),
            wy.rows()
        )));
    }
    let r = wy.len();
    let nc = cols.len();
    let h = rows.len();
    if r == 0 || nc == 0 {
        return Ok(());
    }
    let v = &wy.v;
    let t = &wy.t;

    // W = V₁ᵀ X₁ + V₂ᵀ X₂, with V₁ the unit lower-triangular top r×r block.
    let mut w = m.submatrix(rows.start..rows.start + r, cols.clone());
    for c in 0..nc {
        let wc = w.col_mut(c);
        for i in 0..r {
            let vi = &v.col(i)[..r];
            let mut acc = wc[i];
            for l in i + 1..r {
                acc += vi[l] * wc[l];
            }
            wc[i] = acc;
        }
    }
    if h > r {
        let ld = r;
        kernels::gemm(
            true,
            1.0,
            v.block_at(r, 0, h - r, r),
            m.block_at(rows.start + r, cols.start, h - r, nc),
            1.0,
            &mut BlockMut::new(w.as_mut_slice(), r, nc, ld),
        );
    }

    // W ← Tᵀ W (for Qᵀ) or T W (for Q); T is upper-triangular.
    for c in 0..nc {
        let wc = w.col_mut(c);
        if transpose {
            for i in (0..r).rev() {
                let mut acc = 0.0;
                for l in 0..=i {
                    acc += t[(l, i)] * wc[l];
                }
                wc[i] = acc;
            }
        } else {
            for i in 0..r {
                let mut acc = 0.0;
                for l in i..r {
                    acc += t[(i, l)] * wc[l];
                }
                wc[i] = acc;
            }
        }
    }

    // X₂ −= V₂ W, X₁ −= V₁ W.
    if h > r {
        let vb = v.block_at(r, 0, h - r, r);
        let wb = w.block();
        kernels::gemm(false, -1.0, vb, wb, 1.0, &mut m.block_at_mut(rows.start + r, cols.start, h - r, nc));
    }
    for c in 0..nc {
        let wc = w.col(c);
        let xc = &mut m.col_mut(cols.start + c)[rows.start..rows.start + r];
        for i in 0..r {
            let mut acc = wc[i];
            for l in 0..i {
                acc += v[(i, l)] * wc[l];
            }
            xc[i] -= acc;
        }
    }
    Ok(())
}

/// Appends `new`'s reflectors to `wy` so that the result represents
/// `Q_old · Q_new`, using the block formula
/// `T₂ = [[T₁, −T₁ V₁ᵀ V̂ T̂], [0, T̂]]`.
///
/// `new` may be shorter than `wy`; its rows are then taken to be the bottom
/// rows, i.e. it is implicitly zero-padded on top.
pub fn update_wy(wy: &mut CompactWY, new: &CompactWY) -> Result<()> {
    let h = wy.rows();
    let s = wy.len();
    let c = new.len();
    if new.rows() > h {
        return Err(Error::DimensionMismatch(format!(
            "new reflectors of height {} exceed {}",
            new.rows(),
            h
        )));
    }
    if s + c > wy.capacity() {
        return Err(Error::DimensionMismatch(format!(
            "{} + {} reflectors exceed capacity {}",
            s,
            c,
            wy.capacity()
        )));
    }
    let offset = h - new.rows();
    // Combined V must stay unit lower-trapezoidal.
    for i in 0..c {
        let global = s + i;
        let col = new.v.col(i);
        let ok = global >= offset
            && global < h
            && col[..global - offset].iter().all(|&x| x == 0.0)
            && col[global - offset] == 1.0;
        if !ok {
            return Err(Error::Contract(format!(
                "appended reflector {i} does not have its unit entry on row {global}"
            )));
        }
    }
    if c == 0 {
        return Ok(());
    }

    if s > 0 {
        let hn = new.rows();
        // X = V₁ᵀ V̂ (only the bottom hn rows of V₁ meet V̂).
        let mut x = DenseMatrix::zeros(s, c);
        kernels::gemm(
            true,
            1.0,
            wy.v.block_at(offset, 0, hn, s),
            new.v.block_at(0, 0, hn, c),
            0.0,
            &mut BlockMut::new(x.as_mut_slice(), s, c, s),
        );
        let mut y = DenseMatrix::zeros(s, c);
        kernels::gemm(
            false,
            1.0,
            wy.t.block_at(0, 0, s, s),
            x.block(),
            0.0,
            &mut BlockMut::new(y.as_mut_slice(), s, c, s),
        );
        let cap = wy.capacity();
        kernels::gemm(
            false,
            -1.0,
            y.block(),
            new.t.block_at(0, 0, c, c),
            0.0,
            &mut BlockMut::new(&mut wy.t.as_mut_slice()[s * cap..], s, c, cap),
        );
    }
    for i in 0..c {
        let dst = wy.v.col_mut(s + i);
        dst[..offset].fill(0.0);
        dst[offset..].copy_from_slice(new.v.col(i));
        for l in 0..c {
            wy.t[(s + l, s + i)] = new.t[(l, i)];
        }
    }
    wy.r = s + c;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::householder;

    fn reflectors(rows: usize, count: usize, seed: u64) -> HouseholderSet {
        // Deterministic pseudo-random columns from a tiny LCG.
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let mut hs = HouseholderSet::new(rows);
        for i in 0..count {
            let x: Vec<f64> = (0..rows).map(|_| next()).collect();
            let h = householder(&x, i).unwrap();
            hs.push(h.v, h.tau).unwrap();
        }
        hs
    }

    #[test]
    fn single_reflector_t_is_tau() {
        let hs = reflectors(5, 1, 3);
        let wy = compact_wy(&hs).unwrap();
        assert_eq!(wy.t()[(0, 0)], hs.reflectors()[0].tau);
    }

    #[test]
    fn two_reflector_closed_form() {
        let hs = reflectors(6, 2, 9);
        let wy = compact_wy(&hs).unwrap();
        let [a, b] = [&hs.reflectors()[0], &hs.reflectors()[1]];
        let expect = -a.tau * kernels::dot(&a.v, &b.v) * b.tau;
        assert!((wy.t()[(0, 1)] - expect).abs() < 1e-14);
        assert_eq!(wy.t()[(1, 0)], 0.0);
        assert_eq!(wy.t()[(1, 1)], b.tau);
    }

    #[test]
    fn three_reflectors_match_explicit_product() {
        let hs = reflectors(7, 3, 17);
        let wy = compact_wy(&hs).unwrap();
        let diff = wy.to_dense_q().sub(&hs.to_dense_q()).unwrap();
        assert!(diff.max_abs() < 1e-12);
    }

    #[test]
    fn empty_and_single_column_blocks() {
        let mut m = DenseMatrix::from_fn(4, 3, |i, j| (i * 3 + j) as f64);
        let before = m.clone();
        let wy = CompactWY::with_capacity(4, 2);
        apply_qt_block(&mut m, &wy, 0..4, 0..3).unwrap();
        assert_eq!(m, before);

        let hs = reflectors(4, 1, 5);
        let wy = compact_wy(&hs).unwrap();
        let mut col = m.submatrix(0..4, 1..2);
        hs.apply_qt(&mut col).unwrap();
        apply_qt_block(&mut m, &wy, 0..4, 1..2).unwrap();
        for i in 0..4 {
            assert!((m[(i, 1)] - col[(i, 0)]).abs() < 1e-13);
            assert_eq!(m[(i, 0)], before[(i, 0)]);
            assert_eq!(m[(i, 2)], before[(i, 2)]);
        }
    }

    #[test]
    fn block_respects_row_window() {
        let hs = reflectors(3, 2, 21);
        let wy = compact_wy(&hs).unwrap();
        let orig = DenseMatrix::from_fn(5, 4, |i, j| ((i + 1) * (j + 2)) as f64 * 0.1);
        let mut m = orig.clone();
        apply_qt_block(&mut m, &wy, 1..4, 1..3).unwrap();
        let mut blk = orig.submatrix(1..4, 1..3);
        hs.apply_qt(&mut blk).unwrap();
        for i in 0..5 {
            for j in 0..4 {
                let want = if (1..4).contains(&i) && (1..3).contains(&j) { blk[(i - 1, j - 1)] } else { orig[(i, j)] };
                assert!((m[(i, j)] - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn out_of_range_block_is_rejected() {
        let hs = reflectors(3, 1, 1);
        let wy = compact_wy(&hs).unwrap();
        let mut m = DenseMatrix::zeros(3, 3);
        assert!(matches!(apply_qt_block(&mut m, &wy, 0..3, 2..4), Err(Error::OutOfRange(_))));
        assert!(matches!(apply_qt_block(&mut m, &wy, 1..3, 0..1), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn update_from_empty_copies_new() {
        let hs = reflectors(6, 2, 4);
        let new = compact_wy(&hs).unwrap();
        let mut acc = CompactWY::with_capacity(6, 4);
        update_wy(&mut acc, &new).unwrap();
        assert_eq!(acc.len(), 2);
        assert_eq!(acc.v().submatrix(0..6, 0..2), new.v().clone());
        assert_eq!(acc.t().submatrix(0..2, 0..2), new.t().clone());
    }

    #[test]
    fn update_scalar_case() {
        let hs = reflectors(5, 2, 8);
        let mut acc = CompactWY::with_capacity(5, 2);
        update_wy(&mut acc, &compact_wy(&hs.prefix(1)).unwrap()).unwrap();
        // Second reflector supplied without its leading zero row.
        let r1 = &hs.reflectors()[1];
        let mut short = HouseholderSet::new(4);
        short.push(r1.v[1..].to_vec(), r1.tau).unwrap();
        update_wy(&mut acc, &compact_wy(&short).unwrap()).unwrap();
        let r0 = &hs.reflectors()[0];
        let expect = -r0.tau * kernels::dot(&r0.v, &r1.v) * r1.tau;
        assert!((acc.t()[(0, 1)] - expect).abs() < 1e-14);
        assert_eq!(acc.t()[(1, 1)], r1.tau);
    }

    #[test]
    fn update_rejects_misplaced_unit_entry() {
        let hs = reflectors(5, 2, 8);
        let mut acc = compact_wy(&hs.prefix(1)).unwrap();
        let mut acc_big = CompactWY::with_capacity(5, 3);
        update_wy(&mut acc_big, &acc).unwrap();
        // Appending reflector 0 again would put a second unit entry on row 0.
        assert!(matches!(update_wy(&mut acc_big, &acc), Err(Error::Contract(_))));
        assert!(update_wy(&mut acc, &compact_wy(&hs.prefix(1)).unwrap()).is_err());
    }
}
