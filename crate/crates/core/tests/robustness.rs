mod common;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use symmetra::construct::{platonic_assemblage, Solid};
use symmetra::incompat::{
    alpha_star, beta_star, dual_certificate, lambda_greedy, mu_greedy, normalization_constant_z, robustness_report,
    AnalysisOptions, RobustnessReport, ScanMethod,
};
use symmetra::io::{export_assemblage, import_assemblage};
use symmetra::mub::{field_for_dimension, mub_assemblage};
use symmetra::numerics::CMat;
use symmetra::par::Execution;

#[test]
fn section_extremes_match_closed_form_brute_force() {
    let sqrt3 = 3f64.sqrt();
    let oct = platonic_assemblage(Solid::Octahedron);
    let (mu, lambda) = common::brute_force_extremes(&oct);
    assert_abs_diff_eq!(lambda, 1.5 + sqrt3 / 2.0, epsilon = 1e-12);
    assert_abs_diff_eq!(mu, 1.5 - sqrt3 / 2.0, epsilon = 1e-12);

    let mub3 = mub_assemblage(&field_for_dimension(3).unwrap()).unwrap();
    let (mu, lambda) = common::brute_force_extremes(&mub3);
    assert_abs_diff_eq!(lambda, (3.0 + 5f64.sqrt()) / 2.0, epsilon = 1e-9);
    assert_abs_diff_eq!(mu, 0.0, epsilon = 1e-9);

    let mut cases = vec![mub3];
    cases.extend(Solid::ALL.into_iter().map(platonic_assemblage));
    for a in cases {
        let (mu, lambda) = common::brute_force_extremes(&a);
        let r = robustness_report(&a, None, &AnalysisOptions::default()).unwrap();
        assert_abs_diff_eq!(r.lambda.value, lambda, epsilon = 1e-9);
        assert_abs_diff_eq!(r.mu.value, mu, epsilon = 1e-9);
    }
}

#[test]
fn sequential_and_parallel_scans_agree() {
    let a = platonic_assemblage(Solid::Icosidodecahedron);
    let par = AnalysisOptions { exec: Execution::Parallel, ..Default::default() };
    let seq = AnalysisOptions { exec: Execution::Sequential, ..Default::default() };
    let (p, s) = (robustness_report(&a, None, &par).unwrap(), robustness_report(&a, None, &seq).unwrap());
    assert_eq!(p, s);
}

#[test]
fn greedy_is_optimal_on_small_cases() {
    let mut cases: Vec<_> = Solid::ALL.into_iter().map(platonic_assemblage).collect();
    for d in 2..=5 {
        cases.push(mub_assemblage(&field_for_dimension(d).unwrap()).unwrap());
    }
    for a in cases {
        let r = robustness_report(&a, None, &AnalysisOptions::default()).unwrap();
        assert_abs_diff_eq!(lambda_greedy(&a).value, r.lambda.value, epsilon = 1e-9);
        assert_abs_diff_eq!(mu_greedy(&a).value, r.mu.value, epsilon = 1e-9);
    }
}

#[test]
fn certificate_bound_equals_alpha_star() {
    for solid in Solid::ALL {
        let (a, s) = common::platonic_with_symmetry(solid);
        let r = robustness_report(&a, Some(&s), &AnalysisOptions::default()).unwrap();
        let cert = dual_certificate(&a, &r).unwrap();
        assert_abs_diff_eq!(cert.certified_upper_bound, r.alpha_star, epsilon = 1e-10);
        // Rebuild X_z = (1/Z)(λ/|M|·1 − A_z) here and evaluate the dual
        // objective and the trace constraint directly.
        let (_, lambda) = common::brute_force_extremes(&a);
        let z = normalization_constant_z(&a).unwrap();
        let (d, m) = (a.dim() as f64, a.n_measurements() as f64);
        let mut objective = 1.0;
        let mut first = 1.0;
        for e in a.effects() {
            let mut x = CMat::identity(a.dim()).scale_re(lambda / m);
            x -= e;
            let x = x.scale_re(1.0 / z);
            objective += x.trace_product(e).re;
            first += x.trace_product(e).re - e.trace().re * x.trace().re / d;
        }
        assert_abs_diff_eq!(objective, r.alpha_star, epsilon = 1e-9);
        assert_abs_diff_eq!(first, 0.0, epsilon = 1e-9);
        // Σ_x X_{s(x)} = (λ·1 − Σ_x A_{s(x)})/Z is PSD with a zero eigenvalue
        // at the optimal section.
        assert_abs_diff_eq!(cert.worst_section_min_eig, 0.0, epsilon = 1e-9);
    }
}

fn conjugation_case(which: usize) -> symmetra::bundle::Assemblage {
    match which {
        0 => platonic_assemblage(Solid::Cuboctahedron),
        1 => platonic_assemblage(Solid::Icosahedron),
        _ => mub_assemblage(&field_for_dimension(3).unwrap()).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn robustness_is_invariant_under_conjugation(which in 0usize..3, xs in proptest::collection::vec(-1.0f64..1.0, 18)) {
        let a = conjugation_case(which);
        let u = common::unitary_from(a.dim(), &xs);
        prop_assert!(u.is_unitary(1e-10));
        let b = a.conjugated(&u);
        let opts = AnalysisOptions::default();
        let (ra, rb) = (robustness_report(&a, None, &opts).unwrap(), robustness_report(&b, None, &opts).unwrap());
        prop_assert!((ra.z - rb.z).abs() < 1e-9);
        prop_assert!((ra.alpha_star - rb.alpha_star).abs() < 1e-9);
        prop_assert!((ra.beta_star - rb.beta_star).abs() < 1e-9);
    }

    #[test]
    fn closed_forms_are_monotone(lambda in 0.0f64..10.0, dl in 0.0f64..1.0) {
        let a = platonic_assemblage(Solid::Cube);
        let z = normalization_constant_z(&a).unwrap();
        prop_assert!(alpha_star(&a, z, lambda + dl) >= alpha_star(&a, z, lambda));
        prop_assert!(beta_star(&a, z, lambda + dl) <= beta_star(&a, z, lambda));
        prop_assert!(alpha_star(&a, z, lambda) <= 1.0 && beta_star(&a, z, lambda) <= 1.0);
    }
}

#[test]
fn report_json_roundtrip() {
    let (a, s) = common::platonic_with_symmetry(Solid::Dodecahedron);
    for method in [ScanMethod::Exhaustive, ScanMethod::Greedy] {
        let r = robustness_report(&a, Some(&s), &AnalysisOptions { method, ..Default::default() }).unwrap();
        let back: RobustnessReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}

#[test]
fn export_import_preserves_reports() {
    let (a, s) = common::platonic_with_symmetry(Solid::Icosahedron);
    let (b, sb) = import_assemblage(&export_assemblage(&a, Some(&s))).unwrap();
    for (x, y) in a.effects().iter().zip(b.effects()) {
        assert_eq!(x, y, "diff {:e}", x.max_abs_diff(y));
    }
    let opts = AnalysisOptions::default();
    let ra = robustness_report(&a, Some(&s), &opts).unwrap();
    let rb = robustness_report(&b, sb.as_ref(), &opts).unwrap();
    assert!((ra.alpha_star - rb.alpha_star).abs() <= 1e-12);
    assert!((ra.beta_star - rb.beta_star).abs() <= 1e-12);
    assert_eq!(ra.formula_certified, rb.formula_certified);
}

#[test]
fn broken_normalisation_is_rejected_on_import() {
    let a = platonic_assemblage(Solid::Octahedron);
    let doc = export_assemblage(&a, None);
    let mut v: serde_json::Value = serde_json::from_str(&doc).unwrap();
    v["measurements"][1][0]["re"][0][0] = serde_json::Value::from(0.75);
    assert!(matches!(import_assemblage(&v.to_string()), Err(symmetra::Error::InvariantViolation(_))));
}
