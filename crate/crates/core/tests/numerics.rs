mod common;

use proptest::prelude::*;
use symmetra::numerics::{eigh, extreme_eigenvalues, hermitian_spectrum, project_psd, CMat};
use symmetra::radical::eval_radical;

fn herm(dim: usize) -> impl Strategy<Value = CMat> {
    proptest::collection::vec(-2.0f64..2.0, 2 * dim * dim).prop_map(move |xs| common::hermitian_from(dim, &xs))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigenvalues_match_closed_forms_2(m in herm(2)) {
        let ours = eigh(&m, 1e-12).unwrap().values;
        let oracle = common::eig2(&m);
        for (a, b) in ours.iter().zip(oracle) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let (lo, hi) = extreme_eigenvalues(&m);
        prop_assert!((lo - oracle[0]).abs() < 1e-12 && (hi - oracle[1]).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_match_closed_forms_3(m in herm(3)) {
        let ours = eigh(&m, 1e-12).unwrap().values;
        let oracle = common::eig3(&m);
        for (a, b) in ours.iter().zip(oracle) {
            prop_assert!((a - b).abs() < 1e-9, "{ours:?} vs {oracle:?}");
        }
    }

    #[test]
    fn decomposition_reconstructs(dim in 2usize..7, xs in proptest::collection::vec(-2.0f64..2.0, 2 * 36)) {
        let m = common::hermitian_from(dim, &xs);
        let e = eigh(&m, 1e-12).unwrap();
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(e.vectors.is_unitary(1e-10));
        prop_assert!(e.reconstruct(|x| x).max_abs_diff(&m) < 1e-10);
        let s = hermitian_spectrum(&m, 1e-12).unwrap();
        prop_assert!(s.residual < 1e-10);
        let trace: f64 = e.values.iter().sum();
        prop_assert!((trace - m.trace().re).abs() < 1e-10);
    }

    #[test]
    fn psd_projection_is_nearest_and_idempotent(dim in 2usize..6, xs in proptest::collection::vec(-2.0f64..2.0, 2 * 25)) {
        let m = common::hermitian_from(dim, &xs);
        let p = project_psd(&m).unwrap();
        let lo = eigh(&p, 1e-12).unwrap().values[0];
        prop_assert!(lo > -1e-10);
        prop_assert!(project_psd(&p).unwrap().max_abs_diff(&p) < 1e-10);
        // m − p is negative semidefinite and orthogonal to p.
        let rest = &m - &p;
        prop_assert!(eigh(&rest, 1e-12).unwrap().values[dim - 1] < 1e-10);
        prop_assert!(rest.trace_product(&p).norm() < 1e-9);
    }

    #[test]
    fn radicals_of_integers(a in 0u32..1000, b in 1u32..1000, k in 0u32..50) {
        let v = eval_radical(&format!("({a}+sqrt({k}))/{b}")).unwrap();
        prop_assert!((v - (a as f64 + (k as f64).sqrt()) / b as f64).abs() < 1e-12);
        let w = eval_radical(&format!("{a}√{k}/{b}")).unwrap();
        prop_assert!((w - a as f64 * (k as f64).sqrt() / b as f64).abs() < 1e-9);
    }
}

#[test]
fn not_hermitian_is_rejected() {
    let mut m = CMat::identity(3);
    m[(0, 1)] = symmetra::numerics::c(1.0, 0.0);
    assert!(matches!(eigh(&m, 1e-12), Err(symmetra::Error::NotHermitian(_))));
}
