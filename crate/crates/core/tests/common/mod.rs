#![allow(dead_code)]

use cceqr_core::dense::householder;
use cceqr_core::{DenseMatrix, HouseholderSet};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn normal_matrix<R: Rng>(rng: &mut R, m: usize, n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(m, n, |_, _| rng.sample(StandardNormal))
}

/// `r` reflectors of height `m` built from Gaussian vectors, pivoting at
/// rows `0..r`.
pub fn random_reflectors<R: Rng>(rng: &mut R, m: usize, r: usize) -> HouseholderSet {
    let mut hs = HouseholderSet::new(m);
    for i in 0..r {
        let x: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let h = householder(&x, i).unwrap();
        hs.push(h.v, h.tau).unwrap();
    }
    hs
}

pub fn diff_norm(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.sub(b).unwrap().frobenius_norm()
}

/// `‖QᵀQ − I‖_F`.
pub fn orthogonality_defect(q: &DenseMatrix) -> f64 {
    let g = q.tr_matmul(q).unwrap();
    diff_norm(&g, &DenseMatrix::identity(q.cols()))
}

/// `‖W Wᵀ − I‖_F` for a matrix whose rows should be orthonormal.
pub fn row_orthonormality_defect(w: &DenseMatrix) -> f64 {
    orthogonality_defect(&w.transpose())
}

/// Smallest relative gap between the winning and runner-up squared
/// residuals over the first `k` steps of textbook pivoted Gram-Schmidt,
/// computed independently of the library's QR code.
pub fn pivot_gaps_gram_schmidt(a: &DenseMatrix, k: usize) -> f64 {
    let (m, n) = (a.rows(), a.cols());
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.col(j).to_vec()).collect();
    let mut alive: Vec<usize> = (0..n).collect();
    let mut min_gap = f64::INFINITY;
    for _ in 0..k.min(m).min(n) {
        let norms: Vec<f64> = alive.iter().map(|&j| cols[j].iter().map(|x| x * x).sum()).collect();
        let mut order: Vec<usize> = (0..alive.len()).collect();
        order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
        let best = norms[order[0]];
        if order.len() > 1 && best > 0.0 {
            min_gap = min_gap.min((best - norms[order[1]]) / best);
        }
        let pivot = alive.remove(order[0]);
        let q: Vec<f64> = cols[pivot].iter().map(|x| x / best.sqrt()).collect();
        for &j in &alive {
            let d: f64 = q.iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
            for (c, qi) in cols[j].iter_mut().zip(&q) {
                *c -= d * qi;
            }
        }
    }
    min_gap
}

/// Pivot order of textbook pivoted Gram-Schmidt (modified, with one
/// reorthogonalization pass), lowest index on exact ties.
pub fn gram_schmidt_pivots(a: &DenseMatrix, k: usize) -> Vec<usize> {
    let (m, n) = (a.rows(), a.cols());
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.col(j).to_vec()).collect();
    let mut chosen = Vec::new();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for _ in 0..k.min(m).min(n) {
        let mut best = None;
        let mut best_norm = -1.0;
        for j in 0..n {
            if chosen.contains(&j) {
                continue;
            }
            let nj: f64 = cols[j].iter().map(|x| x * x).sum();
            if nj > best_norm {
                best_norm = nj;
                best = Some(j);
            }
        }
        let p = best.unwrap();
        chosen.push(p);
        let mut q = cols[p].clone();
        for _ in 0..2 {
            for b in &basis {
                let d: f64 = b.iter().zip(&q).map(|(x, y)| x * y).sum();
                for (qi, bi) in q.iter_mut().zip(b) {
                    *qi -= d * bi;
                }
            }
        }
        let nq = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        q.iter_mut().for_each(|x| *x /= nq);
        for j in 0..n {
            if chosen.contains(&j) {
                continue;
            }
            let d: f64 = q.iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
            for (c, qi) in cols[j].iter_mut().zip(&q) {
                *c -= d * qi;
            }
        }
        basis.push(q);
    }
    chosen
}
