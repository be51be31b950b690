mod common;

use cceqr_core::matrixgen::{gen_hadamard_adversary, rng};
use cceqr_core::pivoted_qr::gb_qr_naive_traced;
use cceqr_core::{check_gb_form, gb_qr, gb_qr_naive, DenseMatrix};
use common::{gram_schmidt_pivots, normal_matrix, pivot_gaps_gram_schmidt};
use proptest::prelude::*;

fn shapes() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (2usize..12, 2usize..60).prop_flat_map(|(m, n)| (Just(m), Just(n), 1..=m.min(n), any::<u64>()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gb_output_is_in_gb_form((m, n, k, seed) in shapes()) {
        let a = normal_matrix(&mut rng(seed), m, n);
        let f = gb_qr(&a, k).unwrap();
        let check = check_gb_form(&f.r, k, 1e-10);
        prop_assert!(check.ok, "{:?}", check.violation);
        prop_assert!(f.reconstruction_error(&a).unwrap() <= 1e-12 * a.frobenius_norm());
        let mut sorted = f.p.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn downdated_norms_pick_the_recomputed_pivots((m, n, k, seed) in shapes()) {
        let a = normal_matrix(&mut rng(seed), m, n);
        let (naive, gaps) = gb_qr_naive_traced(&a, k).unwrap();
        prop_assume!(gaps.iter().all(|&g| g > 1e-10));
        prop_assert_eq!(&gb_qr(&a, k).unwrap().p[..k], &naive.p[..k]);
    }

    #[test]
    fn pivots_agree_with_gram_schmidt((m, n, k, seed) in shapes()) {
        let a = normal_matrix(&mut rng(seed), m, n);
        prop_assume!(pivot_gaps_gram_schmidt(&a, k) > 1e-8);
        prop_assert_eq!(&gb_qr(&a, k).unwrap().p[..k], &gram_schmidt_pivots(&a, k)[..]);
    }

    #[test]
    fn diagonal_magnitudes_decrease((m, n, k, seed) in shapes()) {
        let a = normal_matrix(&mut rng(seed), m, n);
        let r = gb_qr(&a, k).unwrap().r;
        for i in 1..k {
            prop_assert!(r[(i, i)].abs() <= r[(i - 1, i - 1)].abs() * (1.0 + 1e-12));
        }
    }
}

#[test]
fn rank_deficient_input_keeps_gb_form() {
    let mut g = rng(11);
    let b = normal_matrix(&mut g, 8, 2);
    let c = normal_matrix(&mut g, 2, 30);
    let a = b.matmul(&c).unwrap();
    let f = gb_qr(&a, 6).unwrap();
    assert!(check_gb_form(&f.r, 6, 1e-10).ok);
    assert!(f.r[(2, 2)].abs() <= 1e-12 * a.frobenius_norm());
}

#[test]
fn zero_matrix_keeps_identity_order() {
    let a = DenseMatrix::zeros(4, 7);
    let f = gb_qr(&a, 4).unwrap();
    assert_eq!(f.p, (0..7).collect::<Vec<_>>());
    assert!(check_gb_form(&f.r, 4, 1e-10).ok);
}

#[test]
fn scaled_hadamard_picks_one_column_per_class() {
    let a = gen_hadamard_adversary(3, 6).unwrap();
    let f = gb_qr(&a, 8).unwrap();
    let naive = gb_qr_naive(&a, 8).unwrap();
    assert_eq!(f.p[..8], naive.p[..8]);
    // Each class has 8 columns; the largest one in every class is its first.
    let mut got = f.p[..8].to_vec();
    got.sort_unstable();
    assert_eq!(got, (0..8).map(|c| 8 * c).collect::<Vec<_>>());
    assert!(check_gb_form(&f.r, 8, 1e-10).ok);
}

#[test]
fn gb_form_rejects_unpivoted_factor() {
    // Column norms 1 and 2: taking them in the given order breaks dominance.
    let a = DenseMatrix::from_rows(&[&[1.0, 0.0], &[0.0, 2.0]]).unwrap();
    assert!(!check_gb_form(&a, 1, 1e-10).ok);
    let f = gb_qr(&a, 1).unwrap();
    assert_eq!(f.p[0], 1);
    assert!(check_gb_form(&f.r, 1, 1e-10).ok);
}
