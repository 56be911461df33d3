mod common;

use proptest::prelude::*;
use symmetra::mub::{
    all_points, composition_phase, displacement, field_for_dimension, mub_assemblage, omega_pow, quantum_net,
    symplectic, wigner_function, PhasePoint,
};
use symmetra::numerics::{c, CMat};

const TOL: f64 = 1e-10;

#[test]
fn displacement_composition_law() {
    for d in 2..=5 {
        let f = field_for_dimension(d).unwrap();
        let pts = all_points(&f);
        for &u in &pts {
            let du = displacement(&f, u);
            assert!(du.is_unitary(TOL));
            for &v in &pts {
                let dv = displacement(&f, v);
                let lhs = &du * &dv;
                let rhs = displacement(&f, u.add(&f, v)).scale(composition_phase(&f, u, v));
                assert!(lhs.max_abs_diff(&rhs) < TOL, "d={d} {u:?} {v:?}");
                // Weyl commutation relation, independent of the phase convention.
                let swapped = (&dv * &du).scale(omega_pow(&f, symplectic(&f, u, v) as i64));
                assert!(lhs.max_abs_diff(&swapped) < TOL, "d={d} {u:?} {v:?}");
            }
        }
    }
}

#[test]
fn displacements_form_an_orthogonal_basis() {
    for d in [2usize, 3, 4, 5] {
        let f = field_for_dimension(d).unwrap();
        let ds: Vec<CMat> = all_points(&f).into_iter().map(|u| displacement(&f, u)).collect();
        for (i, a) in ds.iter().enumerate() {
            for (j, b) in ds.iter().enumerate() {
                let ip = a.inner(b).norm();
                let expect = if i == j { d as f64 } else { 0.0 };
                assert!((ip - expect).abs() < TOL);
            }
        }
    }
}

#[test]
fn complete_sets_are_mutually_unbiased() {
    for d in [2usize, 3, 4, 5, 7, 8, 9] {
        let f = field_for_dimension(d).unwrap();
        let a = mub_assemblage(&f).unwrap();
        assert_eq!(a.n_measurements(), d + 1);
        let b = a.bundle();
        for z in 0..a.n_outcomes() {
            assert!((a.effect(z).trace().re - 1.0).abs() < TOL);
            for w in 0..a.n_outcomes() {
                let t = a.effect(z).trace_product(a.effect(w)).re;
                let expect = match (z == w, b.measurement_of(z) == b.measurement_of(w)) {
                    (true, _) => 1.0,
                    (false, true) => 0.0,
                    (false, false) => 1.0 / d as f64,
                };
                assert!((t - expect).abs() < 1e-9, "d={d} z={z} w={w}: {t}");
            }
        }
    }
}

fn density_from(d: usize, xs: &[f64]) -> CMat {
    let h = common::hermitian_from(d, xs);
    let mut rho = &h * &h.adjoint();
    rho += &CMat::scalar(d, c(0.05, 0.0));
    rho.scale_re(1.0 / rho.trace().re)
}

fn wigner_strategy(d: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, 2 * d * d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn wigner_normalised_and_covariant_d3(xs in wigner_strategy(3), u1 in 0u32..3, u2 in 0u32..3) {
        check_wigner(3, &xs, PhasePoint::new(u1, u2))?;
    }

    #[test]
    fn wigner_normalised_and_covariant_d5(xs in wigner_strategy(5), u1 in 0u32..5, u2 in 0u32..5) {
        check_wigner(5, &xs, PhasePoint::new(u1, u2))?;
    }
}

fn check_wigner(d: usize, xs: &[f64], u: PhasePoint) -> Result<(), TestCaseError> {
    let f = field_for_dimension(d).unwrap();
    let rho = density_from(d, xs);
    let w = wigner_function(&f, &rho).unwrap();
    prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    // Line sums are the probabilities of the corresponding net projections.
    for (line, q) in quantum_net(&f).unwrap() {
        let s: f64 = line.points.iter().map(|p| w[p.index(&f)]).sum();
        prop_assert!((s - rho.trace_product(&q).re).abs() < 1e-10);
    }
    let du = displacement(&f, u);
    let shifted = rho.conjugate_by(&du);
    let ws = wigner_function(&f, &shifted).unwrap();
    for x in all_points(&f) {
        let back = x.add(&f, u.neg(&f));
        prop_assert!((ws[x.index(&f)] - w[back.index(&f)]).abs() < 1e-10);
    }
    Ok(())
}

#[test]
fn wigner_of_a_net_projection_is_its_line() {
    let f = field_for_dimension(3).unwrap();
    for (line, q) in quantum_net(&f).unwrap() {
        let w = wigner_function(&f, &q.scale(c(1.0, 0.0))).unwrap();
        for x in all_points(&f) {
            let on = line.points.contains(&x);
            let expect = if on { 1.0 / 3.0 } else { 0.0 };
            assert!((w[x.index(&f)] - expect).abs() < 1e-10);
        }
    }
}
