//! Thin safe wrappers over the `matrixmultiply` dgemm kernel for
//! column-major blocks addressed by (offset, rows, cols, leading dimension).

/// Column-major read-only block.
#[derive(Clone, Copy)]
pub(crate) struct Block<'a> {
    pub data: &'a [f64],
    pub rows: usize,
    pub cols: usize,
    pub ld: usize,
}

/// Column-major mutable block.
pub(crate) struct BlockMut<'a> {
    pub data: &'a mut [f64],
    pub rows: usize,
    pub cols: usize,
    pub ld: usize,
}

fn span(rows: usize, cols: usize, ld: usize) -> usize {
    if rows == 0 || cols == 0 {
        0
    } else {
        (cols - 1) * ld + rows
    }
}

impl<'a> Block<'a> {
    pub fn new(data: &'a [f64], rows: usize, cols: usize, ld: usize) -> Self {
        assert!(ld >= rows.max(1) || cols <= 1);
        assert!(data.len() >= span(rows, cols, ld), "block exceeds backing slice");
        Block { data, rows, cols, ld }
    }
}

impl<'a> BlockMut<'a> {
    pub fn new(data: &'a mut [f64], rows: usize, cols: usize, ld: usize) -> Self {
        assert!(ld >= rows.max(1) || cols <= 1);
        assert!(data.len() >= span(rows, cols, ld), "block exceeds backing slice");
        BlockMut { data, rows, cols, ld }
    }
}

/// `C ← alpha·op(A)·B + beta·C`, where `op(A) = Aᵀ` when `trans_a` is set.
pub(crate) fn gemm(trans_a: bool, alpha: f64, a: Block<'_>, b: Block<'_>, beta: f64, c: &mut BlockMut<'_>) {
    let (m, kd) = if trans_a { (a.cols, a.rows) } else { (a.rows, a.cols) };
    assert_eq!(kd, b.rows, "inner dimensions differ");
    assert_eq!(m, c.rows, "output rows differ");
    assert_eq!(b.cols, c.cols, "output cols differ");
    let n = b.cols;
    if m == 0 || n == 0 {
        return;
    }
    if kd == 0 {
        for j in 0..n {
            for v in &mut c.data[j * c.ld..j * c.ld + m] {
                *v *= beta;
            }
        }
        return;
    }
    let (rsa, csa) = if trans_a { (a.ld as isize, 1) } else { (1, a.ld as isize) };
    // SAFETY: the constructors checked that every addressed element lies inside
    // its slice, and `c` is borrowed mutably so it cannot alias `a` or `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            kd,
            n,
            alpha,
            a.data.as_ptr(),
            rsa,
            csa,
            b.data.as_ptr(),
            1,
            b.ld as isize,
            beta,
            c.data.as_mut_ptr(),
            1,
            c.ld as isize,
        );
    }
}

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[inline]
pub(crate) fn sq_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}
