mod common;

use cceqr_core::diagnostics::norm_mass_cdf;
use cceqr_core::matrixgen::{
    gen_gaussian, gen_hadamard_adversary, gen_mixture, gen_mixture_eigvecs, hadamard_rows_grouped,
    kernel_eigvecs_compressed, kernel_eigvecs_dense, mixture_points, MixtureSpec,
};
use cceqr_core::{gb_qr, DenseMatrix, Error};
use common::row_orthonormality_defect;

/// Sylvester recursion `H_{2s} = [[H_s, H_s], [H_s, −H_s]]`, built directly.
fn sylvester(size: usize) -> Vec<Vec<f64>> {
    let mut h = vec![vec![1.0]];
    while h.len() < size {
        let s = h.len();
        let mut next = vec![vec![0.0; 2 * s]; 2 * s];
        for i in 0..s {
            for j in 0..s {
                next[i][j] = h[i][j];
                next[i][j + s] = h[i][j];
                next[i + s][j] = h[i][j];
                next[i + s][j + s] = -h[i][j];
            }
        }
        h = next;
    }
    h
}

#[test]
fn gaussian_moments_are_standard() {
    let a = gen_gaussian(20, 10_000, 42);
    let n = a.as_slice().len() as f64;
    let mean = a.as_slice().iter().sum::<f64>() / n;
    let var = a.as_slice().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    // Five standard errors for both moments.
    assert!(mean.abs() < 5.0 / n.sqrt(), "mean {mean}");
    assert!((var - 1.0).abs() < 5.0 * (2.0 / n).sqrt(), "variance {var}");
}

#[test]
fn generators_are_deterministic_per_seed() {
    assert_eq!(gen_gaussian(3, 7, 5).as_slice(), gen_gaussian(3, 7, 5).as_slice());
    assert_ne!(gen_gaussian(3, 7, 5).as_slice(), gen_gaussian(3, 7, 6).as_slice());
    let spec = MixtureSpec::new(3, 120, 4.0, 8);
    assert_eq!(gen_mixture_eigvecs(&spec).unwrap().as_slice(), gen_mixture_eigvecs(&spec).unwrap().as_slice());
}

#[test]
fn hadamard_base_case() {
    let h = hadamard_rows_grouped(1, 1).unwrap();
    assert_eq!(h.as_slice(), &[1.0, 1.0, 1.0, -1.0]);
}

#[test]
fn hadamard_columns_come_from_sylvester_rows() {
    let (kexp, rexp) = (3u32, 6u32);
    let h = hadamard_rows_grouped(kexp, rexp).unwrap();
    let full = sylvester(1 << rexp);
    // Every generated column must be some column of the leading Sylvester
    // rows, and each Sylvester column must be used exactly once.
    let mut used = vec![false; 1 << rexp];
    for j in 0..h.cols() {
        let hit = (0..1 << rexp)
            .find(|&c| !used[c] && (0..h.rows()).all(|i| full[i][c] == h[(i, j)]))
            .expect("column not found among Sylvester columns");
        used[hit] = true;
    }
}

#[test]
fn hadamard_gram_is_block_diagonal() {
    for (kexp, rexp) in [(1u32, 2u32), (2, 4), (3, 7)] {
        let h = hadamard_rows_grouped(kexp, rexp).unwrap();
        let m = (1usize << kexp) as f64;
        let group = 1usize << (rexp - kexp);
        let g = h.tr_matmul(&h).unwrap();
        for i in 0..h.cols() {
            for j in 0..h.cols() {
                let expect = if i / group == j / group { m } else { 0.0 };
                assert_eq!(g[(i, j)].abs(), expect, "entry ({i}, {j}) for kexp={kexp}, rexp={rexp}");
            }
        }
    }
}

#[test]
fn scaled_hadamard_norms_strictly_decrease() {
    let h = gen_hadamard_adversary(2, 4).unwrap();
    let raw = hadamard_rows_grouped(2, 4).unwrap();
    assert!(raw.column_sq_norms().iter().all(|&x| x == 4.0));
    let norms = h.column_sq_norms();
    assert!(norms.windows(2).all(|w| w[0] > w[1]), "{norms:?}");
}

#[test]
fn hadamard_range_errors() {
    for (k, r) in [(0u32, 3u32), (4, 3), (2, 31)] {
        assert!(matches!(hadamard_rows_grouped(k, r), Err(Error::InvalidArgument(_))));
    }
}

#[test]
fn single_component_mixture_is_unit_positive_row() {
    let w = gen_mixture_eigvecs(&MixtureSpec::new(1, 80, 3.0, 1)).unwrap();
    assert_eq!(w.rows(), 1);
    let norm: f64 = w.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!((norm - 1.0).abs() < 1e-12);
    // Perron vector of a positive matrix: one sign throughout.
    let s = w.as_slice();
    assert!(s.iter().all(|&x| x > 0.0) || s.iter().all(|&x| x < 0.0));
}

#[test]
fn two_cluster_pivots_land_in_distinct_clusters() {
    let spec = MixtureSpec::new(2, 200, 8.0, 3);
    let sample = gen_mixture(&spec).unwrap();
    assert!(row_orthonormality_defect(&sample.eigvecs) <= 1e-8);
    let f = gb_qr(&sample.eigvecs, 2).unwrap();
    assert_ne!(sample.labels[f.p[0]], sample.labels[f.p[1]]);
}

#[test]
fn dense_eigenvectors_satisfy_the_eigen_equation() {
    let spec = MixtureSpec::new(3, 150, 5.0, 12);
    let (points, _) = mixture_points(&spec).unwrap();
    let w = kernel_eigvecs_dense(&points, spec.sigma2, 3).unwrap();
    assert!(row_orthonormality_defect(&w) <= 1e-6);
    // Rebuild the normalized kernel independently and check K wᵀ = λ wᵀ.
    let n = points.cols();
    let kern = DenseMatrix::from_fn(n, n, |i, j| {
        let d2: f64 = points.col(i).iter().zip(points.col(j)).map(|(a, b)| (a - b).powi(2)).sum();
        (-d2 / (2.0 * spec.sigma2)).exp()
    });
    let deg: Vec<f64> = (0..n).map(|i| kern.col(i).iter().sum()).collect();
    let norm_k = DenseMatrix::from_fn(n, n, |i, j| kern[(i, j)] / (deg[i] * deg[j]).sqrt());
    let wt = w.transpose();
    let kw = norm_k.matmul(&wt).unwrap();
    let mut prev = f64::INFINITY;
    for r in 0..3 {
        let lambda: f64 = (0..n).map(|i| wt[(i, r)] * kw[(i, r)]).sum();
        assert!(lambda <= prev + 1e-12);
        prev = lambda;
        let resid: f64 = (0..n).map(|i| (kw[(i, r)] - lambda * wt[(i, r)]).powi(2)).sum::<f64>().sqrt();
        assert!(resid <= 1e-8, "eigen residual {resid} for row {r}");
    }
    // The normalized kernel's top eigenvalue is exactly 1.
    let top: f64 = (0..n).map(|i| wt[(i, 0)] * kw[(i, 0)]).sum();
    assert!((top - 1.0).abs() < 1e-10);
}

#[test]
fn compressed_path_tracks_dense_subspace() {
    let spec = MixtureSpec::new(4, 600, 6.0, 21);
    let (points, _) = mixture_points(&spec).unwrap();
    let dense = kernel_eigvecs_dense(&points, spec.sigma2, 4).unwrap();
    let compressed = kernel_eigvecs_compressed(&points, spec.sigma2, 4, 20).unwrap();
    assert!(row_orthonormality_defect(&compressed) <= 1e-3);
    // Compare subspaces: ‖W_d W_cᵀ‖_F² = 4 when the row spaces coincide.
    let cross = dense.matmul(&compressed.transpose()).unwrap();
    let overlap = cross.frobenius_norm().powi(2);
    assert!(overlap > 3.9, "subspace overlap {overlap}");
}

#[test]
fn large_mixture_uses_compressed_path_with_orthonormal_rows() {
    let spec = MixtureSpec::new(20, 5000, 6.0, 0);
    assert!(spec.uses_compression());
    let w = gen_mixture_eigvecs(&spec).unwrap();
    assert_eq!((w.rows(), w.cols()), (20, 5000));
    assert!(row_orthonormality_defect(&w) <= 1e-3);
    let cdf = norm_mass_cdf(&w, &[0.1, 1.0]);
    // Well above the 0.1 a flat distribution would give.
    assert!(cdf.fractions[0] > 0.2, "mass at 10% = {}", cdf.fractions[0]);
    assert!((cdf.fractions[1] - 1.0).abs() < 1e-12);
}

#[test]
fn duplicated_points_are_reported() {
    let points = DenseMatrix::from_fn(2, 30, |i, _| i as f64);
    assert!(matches!(kernel_eigvecs_dense(&points, 5.0, 2), Err(Error::DegenerateKernel(_))));
    assert!(matches!(kernel_eigvecs_compressed(&points, 5.0, 2, 10), Err(Error::DegenerateKernel(_))));
}

#[test]
fn invalid_mixture_specs_are_rejected() {
    assert!(MixtureSpec::new(0, 10, 1.0, 0).validate().is_err());
    assert!(MixtureSpec::new(5, 3, 1.0, 0).validate().is_err());
    assert!(MixtureSpec::new(2, 10, -1.0, 0).validate().is_err());
    let mut s = MixtureSpec::new(2, 10, 1.0, 0);
    s.sigma2 = 0.0;
    assert!(s.validate().is_err());
}
