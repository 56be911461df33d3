//! Acceptance runner: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Tolerances and time limits are pinned below.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use symmetra::bundle::{check_covariance, Assemblage, SymmetryData};
use symmetra::construct::{construct_assemblages, platonic_assemblage, ConstructionOptions, Solid};
use symmetra::data::load_group;
use symmetra::incompat::{
    compatibility_oracle, dual_certificate, lambda_exhaustive, lambda_greedy, oracle_sweep, robustness_report,
    AnalysisOptions, NoiseKind, OracleOptions, RobustnessReport, Verdict,
};
use symmetra::mub::{
    all_points, clifford_stabilizer_rigidity, composition_phase, displacement, field_for_dimension, mub_assemblage,
    mub_symmetry_group, quantum_net, wigner_function, PhasePoint,
};
use symmetra::numerics::{c, CMat};
use symmetra::par::Execution;
use symmetra::steering::{dichotomic_isotropic_bound, dichotomic_werner_bound};

const EXACT_TOL: f64 = 1e-9;
const MUB5_TOL: f64 = 5e-4;
const PRINTED_TOL: f64 = 1e-4;
const PROPERTY_TOL: f64 = 1e-10;
const INVARIANCE_TOL: f64 = 1e-8;

type Check = fn() -> Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(what: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || format!("{what}: got {got:.12}, want {want:.12} (tol {tol:e})"))
}

fn certified_report(a: &Assemblage, s: &SymmetryData) -> Result<RobustnessReport, String> {
    let r = robustness_report(a, Some(s), &AnalysisOptions::default()).map_err(|e| e.to_string())?;
    ensure(r.formula_certified, || format!("{}: closed form not certified: {:?}", r.name, r.formula_note))?;
    Ok(r)
}

fn mub_with_symmetry(d: usize) -> (Assemblage, SymmetryData) {
    let f = field_for_dimension(d).unwrap();
    let a = mub_assemblage(&f).unwrap();
    let s = mub_symmetry_group(&f, &a).unwrap();
    (a, s)
}

fn qubit_platonic_rows() -> Result<String, String> {
    let s5 = 5f64.sqrt();
    let want = [
        1.0 / 3f64.sqrt(),
        1.0 / 3f64.sqrt(),
        (2.5f64).sqrt() / 3.0,
        (1.0 + s5) / 6.0,
        (3.0 + s5) / 10.0,
        (31.0 + 12.0 * s5).sqrt() / 15.0,
    ];
    let mut worst = 0f64;
    for (solid, w) in Solid::ALL.into_iter().zip(want) {
        let (a, s) = common::platonic_with_symmetry(solid);
        let r = certified_report(&a, &s)?;
        close(solid.name(), r.alpha_star, w, EXACT_TOL)?;
        worst = worst.max((r.alpha_star - w).abs());
    }
    Ok(format!("max |Δα*| = {worst:.1e}"))
}

fn qutrit_mubs() -> Result<String, String> {
    let (a, s) = mub_with_symmetry(3);
    ensure(a.bundle().section_count() == 81, || "expected 81 sections".into())?;
    let r = certified_report(&a, &s)?;
    close("α*", r.alpha_star, (1.0 + 3.0 * 5f64.sqrt()) / 16.0, EXACT_TOL)?;
    close("μ", r.mu.value, 0.0, EXACT_TOL)?;
    close("β*", r.beta_star, 1.0, EXACT_TOL)?;
    Ok(format!("α* = {:.10}, μ = {:.1e}", r.alpha_star, r.mu.value))
}

/// Even characteristic: rigidity comes from the Clifford stabiliser of
/// |00⟩ rather than the SL(2) ⋉ F² image.
fn ququart_mubs() -> Result<String, String> {
    let a = mub_assemblage(&field_for_dimension(4).unwrap()).unwrap();
    ensure(a.bundle().section_count() == 1024, || "expected 1024 sections".into())?;
    let r = robustness_report(&a, None, &AnalysisOptions::default()).map_err(|e| e.to_string())?;
    ensure(r.is_exact(), || "scan was not exhaustive".into())?;
    ensure(clifford_stabilizer_rigidity(2).map_err(|e| e.to_string())?.rigid, || "two-qubit stabiliser not rigid".into())?;
    let s5 = 5f64.sqrt();
    close("α*", r.alpha_star, (3.0 + 2.0 * 3f64.sqrt()) / 15.0, EXACT_TOL)?;
    close("β*", r.beta_star, (s5 + (10.0 - 2.0 * s5).sqrt()) / 5.0, EXACT_TOL)?;
    Ok(format!("α* = {:.10}, β* = {:.10}", r.alpha_star, r.beta_star))
}

fn ququint_mubs() -> Result<String, String> {
    let (a, s) = mub_with_symmetry(5);
    // Six bases of five outcomes.
    ensure(a.bundle().section_count() == 15625, || format!("{} sections", a.bundle().section_count()))?;
    let r = certified_report(&a, &s)?;
    close("α*", r.alpha_star, 0.3863, MUB5_TOL)?;
    close("β*", r.beta_star, 1.0, EXACT_TOL)?;
    Ok(format!("α* = {:.6}, β* = {:.10}", r.alpha_star, r.beta_star))
}

fn greedy_is_exhaustive() -> Result<String, String> {
    let mut cases: Vec<Assemblage> = Solid::ALL.into_iter().map(platonic_assemblage).collect();
    for d in 2..=5 {
        cases.push(mub_assemblage(&field_for_dimension(d).unwrap()).unwrap());
    }
    for a in &cases {
        let ex = lambda_exhaustive(a).map_err(|e| e.to_string())?.value;
        let gr = lambda_greedy(a).value;
        close(&format!("{} λ", a.name()), gr, ex, EXACT_TOL)?;
    }
    Ok(format!("{} assemblages", cases.len()))
}

fn octahedron_sandwich() -> Result<String, String> {
    let (a, s) = common::platonic_with_symmetry(Solid::Octahedron);
    let opts = OracleOptions::default();
    let below = compatibility_oracle(&a, Some(&s), 0.55, NoiseKind::White, &opts).map_err(|e| e.to_string())?;
    ensure(below.verdict == Verdict::Compatible, || format!("η=0.55 gave {:?}", below.verdict))?;
    let r = certified_report(&a, &s)?;
    let cert = dual_certificate(&a, &r).map_err(|e| e.to_string())?;
    ensure(cert.worst_section_min_eig >= -EXACT_TOL, || format!("dual infeasible: {:e}", cert.worst_section_min_eig))?;
    ensure(cert.first_residual.abs() <= EXACT_TOL, || format!("trace residual {:e}", cert.first_residual))?;
    ensure(cert.certified_upper_bound < 0.60, || format!("certificate bound {}", cert.certified_upper_bound))?;
    let above = compatibility_oracle(&a, Some(&s), 0.60, NoiseKind::White, &opts).map_err(|e| e.to_string())?;
    ensure(above.verdict == Verdict::Incompatible, || format!("η=0.60 gave {:?}", above.verdict))?;
    Ok(format!("0.55 compatible, certificate bound {:.6} < 0.60", cert.certified_upper_bound))
}

fn dichotomic_values() -> Result<String, String> {
    let got = [
        dichotomic_isotropic_bound(3),
        dichotomic_isotropic_bound(4),
        dichotomic_werner_bound(3),
        dichotomic_werner_bound(4),
    ];
    for (g, w) in got.iter().zip([0.4226, 0.3700, 0.7340, 0.8230]) {
        close("dichotomic bound", *g, w, PRINTED_TOL)?;
    }
    Ok(format!("{:.4} {:.4} {:.4} {:.4}", got[0], got[1], got[2], got[3]))
}

fn construction_pipeline() -> Result<String, String> {
    let inv_sqrt3 = 1.0 / 3f64.sqrt();
    let want = [(3, inv_sqrt3), (4, inv_sqrt3), (6, (2.5f64).sqrt() / 3.0)];
    for name in ["binary_octahedral", "st8"] {
        let g = Arc::new(load_group(name).map_err(|e| e.to_string())?);
        let res = construct_assemblages(g, &ConstructionOptions::default()).map_err(|e| e.to_string())?;
        let sizes: Vec<usize> = res.assemblages.iter().map(|c| c.assemblage.n_measurements()).collect();
        ensure(sizes == [3, 4, 6], || format!("{name}: |M| = {sizes:?}"))?;
        for (c, (m, w)) in res.assemblages.iter().zip(want) {
            let r = certified_report(&c.assemblage, &c.symmetry)?;
            close(&format!("{name} |M|={m}"), r.alpha_star, w, EXACT_TOL)?;
        }
    }
    let g = Arc::new(load_group("st25").map_err(|e| e.to_string())?);
    ensure(g.order() == 648, || format!("ST 25 order {}", g.order()))?;
    let res = construct_assemblages(g, &ConstructionOptions::default()).map_err(|e| e.to_string())?;
    let mub = res
        .assemblages
        .iter()
        .find(|c| c.assemblage.n_measurements() == 4 && c.projection_rank == 1)
        .ok_or("no |M|=4 rank-one assemblage from ST 25")?;
    let r = certified_report(&mub.assemblage, &mub.symmetry)?;
    close("ST 25 α*", r.alpha_star, (1.0 + 3.0 * 5f64.sqrt()) / 16.0, EXACT_TOL)?;
    close("ST 25 β*", r.beta_star, 1.0, EXACT_TOL)?;
    Ok("binary octahedral and ST 8 give |M| = 3,4,6; ST 25 gives the qutrit MUBs".into())
}

fn mub_symmetry() -> Result<String, String> {
    let (a, s) = mub_with_symmetry(3);
    ensure(s.group().order() == 216, || format!("group order {}", s.group().order()))?;
    ensure(check_covariance(s.group(), a.bundle(), s.outcome_action()).ok, || "covariance fails".into())?;
    let sym = s.check_symmetry(&a, 1e-8);
    ensure(sym.ok, || format!("symmetry residual {:e}", sym.residual))?;
    ensure(s.is_uniform(), || "action not transitive".into())?;
    ensure(s.is_rigid(&a), || "not rigid".into())?;
    for n in [1, 2] {
        let cr = clifford_stabilizer_rigidity(n).map_err(|e| e.to_string())?;
        ensure(cr.rigid, || format!("Clifford stabiliser on {n} qubits: commutant dim {}", cr.commutant_dim))?;
    }
    Ok(format!("order 216, symmetry residual {:.1e}; Clifford n=1,2 rigid", sym.residual))
}

fn orbit_stabiliser() -> Result<(), String> {
    for solid in Solid::ALL {
        let (_, s) = common::platonic_with_symmetry(solid);
        let act = s.outcome_action();
        for z in 0..act.n_points() {
            let (o, st) = (act.orbit(z).len(), act.stabilizer(z).len());
            ensure(o * st == act.group_order(), || format!("{}: {o}·{st} ≠ {}", solid.name(), act.group_order()))?;
        }
    }
    Ok(())
}

fn displacement_law() -> Result<(), String> {
    for d in 2..=5 {
        let f = field_for_dimension(d).unwrap();
        let pts = all_points(&f);
        for &u in &pts {
            let du = displacement(&f, u);
            for &v in &pts {
                let lhs = &du * &displacement(&f, v);
                let rhs = displacement(&f, u.add(&f, v)).scale(composition_phase(&f, u, v));
                ensure(lhs.max_abs_diff(&rhs) < PROPERTY_TOL, || format!("d={d} {u:?} {v:?}"))?;
            }
        }
    }
    Ok(())
}

fn unbiasedness() -> Result<(), String> {
    for d in [2usize, 3, 4, 5, 7, 8, 9] {
        let a = mub_assemblage(&field_for_dimension(d).unwrap()).unwrap();
        let b = a.bundle();
        for z in 0..a.n_outcomes() {
            for w in 0..a.n_outcomes() {
                let t = a.effect(z).trace_product(a.effect(w)).re;
                let want = match (z == w, b.measurement_of(z) == b.measurement_of(w)) {
                    (true, _) => 1.0,
                    (false, true) => 0.0,
                    (false, false) => 1.0 / d as f64,
                };
                ensure((t - want).abs() < EXACT_TOL, || format!("d={d} z={z} w={w}: {t}"))?;
            }
        }
    }
    Ok(())
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn wigner() -> Result<(), String> {
    for d in [3usize, 5] {
        let f = field_for_dimension(d).unwrap();
        let net = quantum_net(&f).unwrap();
        let strategy = (proptest::collection::vec(-1.0f64..1.0, 2 * d * d), 0..d as u32, 0..d as u32);
        runner(32)
            .run(&strategy, |(xs, u1, u2)| {
                let h = common::hermitian_from(d, &xs);
                let mut rho = &h * &h.adjoint();
                rho += &CMat::scalar(d, c(0.05, 0.0));
                let rho = rho.scale_re(1.0 / rho.trace().re);
                let w = wigner_function(&f, &rho).unwrap();
                prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < PROPERTY_TOL);
                for (line, q) in &net {
                    let s: f64 = line.points.iter().map(|p| w[p.index(&f)]).sum();
                    prop_assert!((s - rho.trace_product(q).re).abs() < PROPERTY_TOL);
                }
                let u = PhasePoint::new(u1, u2);
                let ws = wigner_function(&f, &rho.conjugate_by(&displacement(&f, u))).unwrap();
                for x in all_points(&f) {
                    prop_assert!((ws[x.index(&f)] - w[x.add(&f, u.neg(&f)).index(&f)]).abs() < PROPERTY_TOL);
                }
                Ok(())
            })
            .map_err(|e| format!("Wigner d={d}: {e}"))?;
    }
    Ok(())
}

fn conjugation_invariance() -> Result<(), String> {
    let cases = [
        platonic_assemblage(Solid::Octahedron),
        platonic_assemblage(Solid::Icosahedron),
        mub_assemblage(&field_for_dimension(3).unwrap()).unwrap(),
    ];
    let base: Vec<RobustnessReport> =
        cases.iter().map(|a| robustness_report(a, None, &AnalysisOptions::default()).unwrap()).collect();
    let strategy = (0..cases.len(), proptest::collection::vec(-1.0f64..1.0, 18));
    runner(24)
        .run(&strategy, |(k, xs)| {
            let a = &cases[k];
            let u = common::unitary_from(a.dim(), &xs);
            let r = robustness_report(&a.conjugated(&u), None, &AnalysisOptions::default()).unwrap();
            prop_assert!((r.alpha_star - base[k].alpha_star).abs() < INVARIANCE_TOL);
            prop_assert!((r.beta_star - base[k].beta_star).abs() < INVARIANCE_TOL);
            Ok(())
        })
        .map_err(|e| format!("conjugation: {e}"))
}

fn oracle_monotone() -> Result<(), String> {
    let etas = [0.0, 0.2, 0.4, 0.5, 0.55, 0.6, 0.7, 0.9, 1.0];
    for solid in [Solid::Octahedron, Solid::Cube] {
        let (a, s) = common::platonic_with_symmetry(solid);
        for kind in [NoiseKind::White, NoiseKind::Complement] {
            let v: Vec<Verdict> = oracle_sweep(&a, Some(&s), &etas, kind, &OracleOptions::default(), Execution::default())
                .into_iter()
                .map(|o| o.map(|o| o.verdict))
                .collect::<Result<_, _>>()
                .map_err(|e| e.to_string())?;
            ensure(!v.contains(&Verdict::Inconclusive), || format!("{} {kind:?}: {v:?}", solid.name()))?;
            let flip = v.iter().position(|&x| x == Verdict::Incompatible).unwrap_or(v.len());
            ensure(v[flip..].iter().all(|&x| x == Verdict::Incompatible), || format!("{} {kind:?}: {v:?}", solid.name()))?;
        }
    }
    Ok(())
}

fn property_suites() -> Result<String, String> {
    orbit_stabiliser()?;
    displacement_law()?;
    unbiasedness()?;
    wigner()?;
    conjugation_invariance()?;
    oracle_monotone()?;
    Ok("orbit-stabiliser, displacement law, unbiasedness d≤9, Wigner d∈{3,5}, conjugation invariance, oracle monotonicity".into())
}

fn main() {
    let criteria: [(u32, &str, Duration, Check); 10] = [
        (1, "qubit platonic α* (Table 1, d=2)", Duration::from_secs(60), qubit_platonic_rows),
        (2, "qutrit MUBs α*, μ, β*", Duration::from_secs(10), qutrit_mubs),
        (3, "ququart MUBs α*, β*", Duration::from_secs(10), ququart_mubs),
        (4, "d=5 MUBs α*, β*", Duration::from_secs(60), ququint_mubs),
        (5, "greedy λ equals exhaustive λ", Duration::from_secs(120), greedy_is_exhaustive),
        (6, "octahedron sandwich at 0.55 / 0.60", Duration::from_secs(60), octahedron_sandwich),
        (7, "dichotomic steering bounds", Duration::from_secs(1), dichotomic_values),
        (8, "construction pipeline (ST 8, ST 25)", Duration::from_secs(600), construction_pipeline),
        (9, "MUB symmetry and Clifford rigidity", Duration::from_secs(300), mub_symmetry),
        (10, "property suites", Duration::from_secs(300), property_suites),
    ];
    let mut failed = 0;
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panic: {}", msg.unwrap_or_default()))
        });
        let took = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if took > limit {
                Err(format!("took {took:.1?}, limit {limit:?}"))
            } else {
                Ok(detail)
            }
        });
        match outcome {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail} [{took:.2?}]"),
            Err(why) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {why} [{took:.2?}]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
