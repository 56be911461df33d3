//! Feasibility search for a parent measurement by Dykstra's alternating
//! projections, restricted to group-invariant parents.
//!
//! A noisy assemblage B is compatible iff there are F_s ≥ 0 over sections
//! with Σ_{s ∋ z} F_s = B_z. If B is G-symmetric and a parent exists, the
//! group average is one too, so it suffices to search over parents with
//! F_{g(s)} = U_g F_s U_g†. Those are fixed by one operator Y_j per section
//! orbit, and both projections (affine marginal set, PSD cone) map invariant
//! points to invariant points, so the iteration runs on the Y_j alone.

use std::collections::HashSet;

use serde::Serialize;

use super::{complement_assemblage, dual_certificate, robustness_report, AnalysisOptions, NoiseKind};
use crate::bundle::{Assemblage, Section, SymmetryData, DEFAULT_SECTION_CAP};
use crate::error::{Error, Result};
use crate::numerics::{eigh, extreme_eigenvalues, project_psd, CMat, C64};
use crate::par::{map_indices, Execution};

#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    pub iter_budget: usize,
    /// Largest marginal defect accepted as feasible.
    pub tol: f64,
    pub check_every: usize,
    /// Cap on the number of section orbits.
    pub section_cap: u128,
    /// Try the dual certificate before iterating.
    pub use_certificate: bool,
    /// Largest gap η' − η used for the mixing repair.
    pub repair_margin: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { iter_budget: 200_000, tol: 1e-7, check_every: 50, section_cap: 100_000, use_certificate: true, repair_margin: 1e-2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Compatible,
    Incompatible,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleOutcome {
    pub eta: f64,
    pub kind: NoiseKind,
    pub verdict: Verdict,
    pub iterations: usize,
    /// Marginal defect of the last PSD iterate at `search_eta`.
    pub residual: f64,
    /// Noise level the iteration ran at (≥ eta).
    pub search_eta: f64,
    /// Smallest eigenvalue over the blocks of the repaired parent at eta.
    pub witness_min_eig: Option<f64>,
    pub certificate_bound: Option<f64>,
}

/// Orbit-reduced primal: section orbit representatives as variables and
/// outcome orbit representatives as constraints.
#[derive(Clone, Debug)]
pub struct ReducedPrimal {
    pub section_reps: Vec<Section>,
    pub section_orbit_sizes: Vec<usize>,
    pub outcome_reps: Vec<usize>,
    /// Orbit size |G|/|G_z| of each outcome representative.
    pub outcome_weights: Vec<usize>,
    /// (representative position, group element) mapping the representative
    /// to each outcome.
    transversal: Vec<(usize, usize)>,
    /// For each outcome representative, the sections g(s_j) containing it,
    /// as (j, g), one entry per distinct section.
    terms: Vec<Vec<(usize, usize)>>,
    /// Group elements fixing each section representative.
    stabilizers: Vec<Vec<usize>>,
    total_sections: u64,
}

impl ReducedPrimal {
    pub fn n_variables(&self) -> usize {
        self.section_reps.len()
    }

    pub fn n_constraints(&self) -> usize {
        self.outcome_reps.len()
    }

    pub fn total_sections(&self) -> u64 {
        self.total_sections
    }

    /// Full parent F_s, indexed by lexicographic section index, from the
    /// orbit representatives' operators.
    pub fn expand(&self, a: &Assemblage, sym: &SymmetryData, ys: &[CMat]) -> Vec<CMat> {
        let b = a.bundle();
        let g = sym.group();
        let mut full = vec![CMat::zeros(a.dim()); self.total_sections as usize];
        for (j, s) in self.section_reps.iter().enumerate() {
            for h in 0..g.order() {
                let idx = b.section_index(&sym.act_on_section(h, s)) as usize;
                full[idx] = ys[j].conjugate_by(g.element(h));
            }
        }
        full
    }

    /// Group average of a full parent, read off at the representatives.
    pub fn symmetrize(&self, a: &Assemblage, sym: &SymmetryData, full: &[CMat]) -> Vec<CMat> {
        let b = a.bundle();
        let g = sym.group();
        let w = 1.0 / g.order() as f64;
        self.section_reps
            .iter()
            .map(|s| {
                let mut y = CMat::zeros(a.dim());
                for h in 0..g.order() {
                    let idx = b.section_index(&sym.act_on_section(h, s)) as usize;
                    y.add_scaled(C64::new(w, 0.0), &full[idx].conjugate_by(&g.element(h).adjoint()));
                }
                y
            })
            .collect()
    }

    /// Marginal at outcome representative i, one conjugation per term.
    pub fn marginal(&self, sym: &SymmetryData, ys: &[CMat], i: usize) -> CMat {
        let g = sym.group();
        let mut m = CMat::zeros(ys[0].dim());
        for &(j, h) in &self.terms[i] {
            m += &ys[j].conjugate_by(g.element(h));
        }
        m
    }
}

/// Y ↦ Σ_h U_h Y U_h† as a d²×d² matrix on row-major vec(Y), or a plain
/// multiple of Y when every U_h is the identity.
enum MarginalMap {
    Multiple(f64),
    Super(Vec<C64>),
}

/// Σ_U w·(U ⊗ Ū) acting on row-major vec(Y), i.e. Y ↦ w Σ U Y U†.
fn conjugation_super<'a>(us: impl Iterator<Item = &'a CMat>, dim: usize, w: f64) -> Vec<C64> {
    let n2 = dim * dim;
    let mut sup = vec![C64::new(0.0, 0.0); n2 * n2];
    for u in us {
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    for e in 0..dim {
                        sup[(a * dim + b) * n2 + c * dim + e] += u[(a, c)] * u[(b, e)].conj() * w;
                    }
                }
            }
        }
    }
    sup
}

fn apply_super(sup: &[C64], y: &CMat) -> CMat {
    let n2 = y.dim() * y.dim();
    let v = y.entries();
    let data = (0..n2).map(|r| sup[r * n2..(r + 1) * n2].iter().zip(v).map(|(s, x)| s * x).sum()).collect();
    CMat::from_entries(y.dim(), data).expect("finite input")
}

/// Per outcome representative, the variables feeding its marginal with the
/// summed conjugation map.
fn marginal_maps(red: &ReducedPrimal, sym: &SymmetryData, dim: usize) -> Vec<Vec<(usize, MarginalMap)>> {
    let g = sym.group();
    let id = CMat::identity(dim);
    red.terms
        .iter()
        .map(|terms| {
            let mut by_var: Vec<Vec<usize>> = vec![Vec::new(); red.n_variables()];
            for &(j, h) in terms {
                by_var[j].push(h);
            }
            by_var
                .into_iter()
                .enumerate()
                .filter(|(_, hs)| !hs.is_empty())
                .map(|(j, hs)| {
                    if hs.iter().all(|&h| g.element(h).max_abs_diff(&id) < 1e-12) {
                        return (j, MarginalMap::Multiple(hs.len() as f64));
                    }
                    (j, MarginalMap::Super(conjugation_super(hs.iter().map(|&h| g.element(h)), dim, 1.0)))
                })
                .collect()
        })
        .collect()
}

/// Orbit reduction of the primal problem under `sym`.
pub fn reduce_by_symmetry(a: &Assemblage, sym: &SymmetryData) -> Result<ReducedPrimal> {
    reduce_with_cap(a, sym, DEFAULT_SECTION_CAP)
}

fn reduce_with_cap(a: &Assemblage, sym: &SymmetryData, cap: u128) -> Result<ReducedPrimal> {
    let check = sym.check_symmetry(a, 1e-8);
    if !check.ok {
        return Err(Error::NotSymmetric(check.residual));
    }
    let b = a.bundle();
    let orbits = sym.section_orbits(b, DEFAULT_SECTION_CAP)?;
    if orbits.representatives.len() as u128 > cap {
        return Err(Error::TooManySections(orbits.representatives.len() as u128, cap));
    }
    let (outcome_reps, outcome_weights) = sym.outcome_orbits();
    let act = sym.outcome_action();
    let order = sym.group().order();
    let mut transversal = vec![(usize::MAX, 0); a.n_outcomes()];
    for (i, &r) in outcome_reps.iter().enumerate() {
        for h in 0..order {
            let z = act.apply(h, r);
            if transversal[z].0 == usize::MAX {
                transversal[z] = (i, h);
            }
        }
    }
    let stabilizers = orbits
        .representatives
        .iter()
        .map(|s| (0..order).filter(|&h| &sym.act_on_section(h, s) == s).collect())
        .collect();
    let terms = outcome_reps
        .iter()
        .map(|&z| {
            let mut seen = HashSet::new();
            let mut out = Vec::new();
            for (j, s) in orbits.representatives.iter().enumerate() {
                for h in 0..order {
                    let t = sym.act_on_section(h, s);
                    if t.choice.contains(&z) && seen.insert(b.section_index(&t)) {
                        out.push((j, h));
                    }
                }
            }
            out
        })
        .collect();
    Ok(ReducedPrimal {
        section_reps: orbits.representatives,
        section_orbit_sizes: orbits.orbit_sizes,
        outcome_reps,
        outcome_weights,
        transversal,
        terms,
        stabilizers,
        total_sections: orbits.total,
    })
}

/// Pseudo-inverse of K_{zw} = #{s : z, w ∈ s}.
fn section_gram_pinv(a: &Assemblage) -> Result<Vec<Vec<f64>>> {
    let b = a.bundle();
    let n = a.n_outcomes();
    let total = b.section_count() as f64;
    let k = CMat::from_fn(n, |z, w| {
        let (x, y) = (b.measurement_of(z), b.measurement_of(w));
        let (nx, ny) = (b.fibre(x).len() as f64, b.fibre(y).len() as f64);
        let v = if z == w {
            total / nx
        } else if x == y {
            0.0
        } else {
            total / (nx * ny)
        };
        C64::new(v, 0.0)
    });
    let eig = eigh(&k, 1e-9)?;
    let top = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let inv = eig.reconstruct(|v| if v.abs() > 1e-10 * top { 1.0 / v } else { 0.0 });
    Ok((0..n).map(|z| (0..n).map(|w| inv[(z, w)].re).collect()).collect())
}

struct Problem<'a> {
    sym: &'a SymmetryData,
    red: ReducedPrimal,
    maps: Vec<Vec<(usize, MarginalMap)>>,
    /// Stabiliser averaging per variable; None for trivial stabilisers.
    averages: Vec<Option<Vec<C64>>>,
    kinv: Vec<Vec<f64>>,
    target: Vec<CMat>,
    /// Global outcomes of every section representative.
    rep_outcomes: Vec<Vec<usize>>,
}

impl Problem<'_> {
    fn residuals(&self, ys: &[CMat]) -> Vec<CMat> {
        self.maps
            .iter()
            .zip(&self.target)
            .map(|(maps, t)| {
                let mut m = -t;
                for (j, map) in maps {
                    match map {
                        MarginalMap::Multiple(k) => m.add_scaled(C64::new(*k, 0.0), &ys[*j]),
                        MarginalMap::Super(sup) => m += &apply_super(sup, &ys[*j]),
                    }
                }
                m
            })
            .collect()
    }

    /// Removes numerical drift out of the invariant subspace.
    fn average_over_stabilizers(&self, ys: &mut [CMat]) {
        for (y, avg) in ys.iter_mut().zip(&self.averages) {
            if let Some(sup) = avg {
                *y = apply_super(sup, y);
            }
        }
    }

    fn defect(&self, ys: &[CMat]) -> f64 {
        self.residuals(ys).iter().map(CMat::max_abs).fold(0.0, f64::max)
    }

    /// Orthogonal projection onto the marginal constraints, evaluated on an
    /// invariant point through its representatives.
    fn project_affine(&self, ys: &[CMat]) -> Vec<CMat> {
        let g = self.sym.group();
        let rep_res = self.residuals(ys);
        let full: Vec<CMat> = self
            .red
            .transversal
            .iter()
            .map(|&(i, h)| rep_res[i].conjugate_by(g.element(h)))
            .collect();
        let n = full.len();
        let dim = ys[0].dim();
        let mult: Vec<CMat> = (0..n)
            .map(|z| {
                let mut m = CMat::zeros(dim);
                for (w, r) in full.iter().enumerate() {
                    let k = self.kinv[z][w];
                    if k != 0.0 {
                        m.add_scaled(C64::new(k, 0.0), r);
                    }
                }
                m
            })
            .collect();
        ys.iter()
            .zip(&self.rep_outcomes)
            .map(|(y, zs)| {
                let mut out = y.clone();
                for &z in zs {
                    out -= &mult[z];
                }
                out
            })
            .collect()
    }
}

fn certificate_bound(a: &Assemblage, kind: NoiseKind) -> Option<f64> {
    let base = match kind {
        NoiseKind::White => a.clone(),
        NoiseKind::Complement => complement_assemblage(a).ok()?,
    };
    let rep = robustness_report(&base, None, &AnalysisOptions { exec: Execution::Sequential, ..Default::default() }).ok()?;
    dual_certificate(&base, &rep).ok().map(|c| c.certified_upper_bound)
}

/// Verdicts:
/// - incompatible when a feasible dual certificate bound lies below η;
/// - compatible when an explicit parent for the η-noisy assemblage is found.
///   Dykstra runs at a slightly larger η' (below the certificate bound when
///   one is known); its affine-corrected iterate F' is an exact parent at η',
///   and (η/η')F' + (1 − η/η')F⁰, with F⁰ the product parent of the fully
///   noisy assemblage, is an exact parent at η. It is accepted once every
///   block is PSD, or when the marginal defect drops below `tol`;
/// - inconclusive when the iteration budget runs out.
///
/// `sym = None` uses the trivial group.
pub fn compatibility_oracle(
    a: &Assemblage,
    sym: Option<&SymmetryData>,
    eta: f64,
    kind: NoiseKind,
    opts: &OracleOptions,
) -> Result<OracleOutcome> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::EtaOutOfRange(eta));
    }
    let bound = if opts.use_certificate { certificate_bound(a, kind) } else { None };
    let mut out = OracleOutcome {
        eta,
        kind,
        verdict: Verdict::Inconclusive,
        search_eta: eta,
        iterations: 0,
        residual: f64::NAN,
        witness_min_eig: None,
        certificate_bound: bound,
    };
    let step = match bound {
        Some(b) if eta > b + super::CERTIFICATE_TOL => {
            out.verdict = Verdict::Incompatible;
            return Ok(out);
        }
        Some(b) => opts.repair_margin.min(0.5 * (b - eta)).max(0.0),
        None => opts.repair_margin,
    };
    out.search_eta = (eta + step).min(1.0);
    let theta = if out.search_eta > 0.0 { 1.0 - eta / out.search_eta } else { 0.0 };

    let trivial;
    let sym = match sym {
        Some(s) => s,
        None => {
            trivial = SymmetryData::trivial(a);
            &trivial
        }
    };
    let noisy = super::noisy_assemblage(a, out.search_eta, kind)?;
    let red = reduce_with_cap(&noisy, sym, opts.section_cap)?;
    let target = red.outcome_reps.iter().map(|&z| noisy.effect(z).clone()).collect();
    let rep_outcomes: Vec<Vec<usize>> = red.section_reps.iter().map(|s| s.choice.clone()).collect();
    let d = a.dim() as f64;
    let product_parent: Vec<CMat> = rep_outcomes
        .iter()
        .map(|zs| CMat::scalar(a.dim(), C64::new(zs.iter().map(|&z| a.effect(z).trace().re / d).product(), 0.0)))
        .collect();
    let maps = marginal_maps(&red, sym, a.dim());
    let averages = red
        .stabilizers
        .iter()
        .map(|stab| {
            (stab.len() > 1).then(|| {
                let g = sym.group();
                conjugation_super(stab.iter().map(|&h| g.element(h)), a.dim(), 1.0 / stab.len() as f64)
            })
        })
        .collect();
    let prob = Problem { sym, maps, averages, kinv: section_gram_pinv(&noisy)?, red, target, rep_outcomes };

    let nv = prob.red.n_variables();
    let zero = CMat::zeros(a.dim());
    let mut x = vec![zero.clone(); nv];
    let mut p = vec![zero.clone(); nv];
    let mut q = vec![zero; nv];
    while out.iterations < opts.iter_budget {
        let xp: Vec<CMat> = x.iter().zip(&p).map(|(a, b)| a + b).collect();
        let y = prob.project_affine(&xp);
        p = xp.iter().zip(&y).map(|(a, b)| a - b).collect();
        let yq: Vec<CMat> = y.iter().zip(&q).map(|(a, b)| a + b).collect();
        x = yq.iter().map(project_psd).collect::<Result<_>>()?;
        prob.average_over_stabilizers(&mut x);
        q = yq.iter().zip(&x).map(|(a, b)| a - b).collect();
        out.iterations += 1;
        if out.iterations.is_multiple_of(opts.check_every) || out.iterations == opts.iter_budget {
            out.residual = prob.defect(&x);
            let witness = prob.project_affine(&x);
            let min_eig = witness
                .iter()
                .zip(&product_parent)
                .map(|(f, f0)| {
                    let mut g = f.scale_re(1.0 - theta);
                    g.add_scaled(C64::new(theta, 0.0), f0);
                    extreme_eigenvalues(&g.hermitian_part()).0
                })
                .fold(f64::INFINITY, f64::min);
            if min_eig >= 0.0 || out.residual < opts.tol {
                out.verdict = Verdict::Compatible;
                out.witness_min_eig = Some(min_eig);
                break;
            }
        }
    }
    Ok(out)
}

/// Independent oracle calls over several η, run concurrently.
pub fn oracle_sweep(
    a: &Assemblage,
    sym: Option<&SymmetryData>,
    etas: &[f64],
    kind: NoiseKind,
    opts: &OracleOptions,
    exec: Execution,
) -> Vec<Result<OracleOutcome>> {
    map_indices(etas.len(), exec, |i| compatibility_oracle(a, sym, etas[i], kind, opts))
}
