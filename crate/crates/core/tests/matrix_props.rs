use approx::assert_abs_diff_eq;
use epsurr::matrix::io::{read_binary_from, read_csv_from, write_binary_to, write_csv_to};
use epsurr::matrix::prox::{nuclear_spectral_box, weighted_l1_box};
use epsurr::matrix::subgrad::{entrywise_attainment_gap, spectral_attainment_gap};
use epsurr::matrix::{
    frobenius_norm, max_abs, singular_values, spectral_norm, subgrad_entrywise, subgrad_spectral,
    truncate_matrix,
};
use epsurr::ndarray::Array2;
use epsurr::{PhiKind, PhiSpec};
use proptest::prelude::*;

fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = Array2<f64>> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(m, n)| {
        proptest::collection::vec(-4.0f64..4.0, m * n)
            .prop_map(move |v| Array2::from_shape_vec((m, n), v).unwrap())
    })
}

fn pair(max_rows: usize, max_cols: usize) -> impl Strategy<Value = (Array2<f64>, Array2<f64>)> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(m, n)| {
        (
            proptest::collection::vec(-4.0f64..4.0, m * n),
            proptest::collection::vec(-4.0f64..4.0, m * n),
        )
            .prop_map(move |(a, b)| {
                (
                    Array2::from_shape_vec((m, n), a).unwrap(),
                    Array2::from_shape_vec((m, n), b).unwrap(),
                )
            })
    })
}

fn phi() -> impl Strategy<Value = PhiSpec> {
    prop::sample::select(PhiKind::ALL.to_vec()).prop_map(|k| PhiSpec::new(k, &[]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nuclear_prox_respects_the_box((a, b) in pair(6, 7), tau in 0.0f64..3.0, gamma in 0.1f64..5.0) {
        let pa = nuclear_spectral_box(a.view(), tau, gamma).unwrap();
        prop_assert!(spectral_norm(pa.view()).unwrap() <= gamma + 1e-10);
        let pb = nuclear_spectral_box(b.view(), tau, gamma).unwrap();
        prop_assert!(frobenius_norm((&pa - &pb).view()) <= frobenius_norm((&a - &b).view()) + 1e-10);
    }

    #[test]
    fn nuclear_prox_shrinks_singular_values(a in matrix(5, 6), tau in 0.0f64..3.0) {
        let big = 1e6;
        let p = nuclear_spectral_box(a.view(), tau, big).unwrap();
        let before = singular_values(a.view()).unwrap();
        let after = singular_values(p.view()).unwrap();
        for (s, t) in before.iter().zip(&after) {
            prop_assert!((t - (s - tau).max(0.0)).abs() <= 1e-9);
        }
    }

    #[test]
    fn entrywise_prox_is_separable_soft_clip(y in matrix(4, 5), w in 0.0f64..3.0, bound in 0.1f64..5.0) {
        let weights = Array2::from_elem(y.dim(), w);
        let z = weighted_l1_box(y.view(), weights.view(), bound).unwrap();
        prop_assert!(max_abs(z.view()) <= bound);
        for (zi, yi) in z.iter().zip(y.iter()) {
            let expected = yi.signum() * (yi.abs() - w).max(0.0).min(bound);
            prop_assert!((zi - expected).abs() <= 1e-15);
        }
    }

    #[test]
    fn subgradients_attain_their_minima(x in matrix(6, 8), phi in phi(), rho in 0.1f64..6.0) {
        let w = subgrad_spectral(x.view(), &phi, rho).unwrap();
        prop_assert!(spectral_norm(w.view()).unwrap() <= 1.0 + 1e-12);
        prop_assert!(spectral_attainment_gap(x.view(), w.view(), &phi, rho).unwrap().abs() <= 1e-8);
        let s = subgrad_entrywise(x.view(), &phi, rho).unwrap();
        prop_assert!(s.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!(entrywise_attainment_gap(x.view(), s.view(), &phi, rho).unwrap().abs() <= 1e-8);
    }

    #[test]
    fn truncation_is_idempotent(x in matrix(5, 5), phi in phi(), rho in 0.1f64..6.0) {
        let once = truncate_matrix(x.view(), &phi, rho).unwrap();
        let twice = truncate_matrix(once.view(), &phi, rho).unwrap();
        prop_assert!(frobenius_norm((&once - &twice).view()) <= 1e-9);
    }

    #[test]
    fn csv_and_binary_round_trip(x in matrix(5, 5)) {
        let mut buf = Vec::new();
        write_binary_to(&mut buf, x.view()).unwrap();
        prop_assert_eq!(read_binary_from(buf.as_slice()).unwrap(), x.clone());
        let mut text = Vec::new();
        write_csv_to(&mut text, x.view()).unwrap();
        prop_assert_eq!(read_csv_from(text.as_slice()).unwrap(), x);
    }
}

#[test]
fn prox_on_a_tall_matrix_matches_its_transpose() {
    let a = Array2::from_shape_fn((7, 3), |(i, j)| ((i * 5 + j * 3) % 7) as f64 - 3.0);
    let tall = nuclear_spectral_box(a.view(), 0.7, 4.0).unwrap();
    let wide = nuclear_spectral_box(a.t(), 0.7, 4.0).unwrap();
    for (x, y) in tall.iter().zip(wide.t().iter()) {
        assert_abs_diff_eq!(x, y, epsilon = 1e-12);
    }
}

#[test]
fn truncated_binary_input_is_rejected() {
    let x = Array2::<f64>::ones((2, 2));
    let mut buf = Vec::new();
    write_binary_to(&mut buf, x.view()).unwrap();
    buf.truncate(buf.len() - 3);
    assert!(read_binary_from(buf.as_slice()).is_err());
}
