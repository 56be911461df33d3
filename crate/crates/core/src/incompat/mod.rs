//! Incompatibility robustness of uniform, rigidly symmetric assemblages.
//!
//! For such assemblages the white-noise robustness α* and the
//! complement-noise robustness β* have closed forms in terms of the section
//! statistics λ and μ and the constant Z = Σ_z Tr A_z² − d|M|²/|Ω|:
//!
//! α* = (d/Z)(λ − |M|²/|Ω|),  β* = (d(d−1)/Z)(|M|²/|Ω| − μ).
//!
//! [`dual_certificate`] turns λ into a checkable upper bound on α*, and
//! [`compatibility_oracle`] searches for a parent measurement directly.

mod certificate;
mod oracle;
mod scan;

pub use certificate::{dual_certificate, dual_certificate_with, DualCertificate, CERTIFICATE_TOL};
pub use oracle::{
    compatibility_oracle, oracle_sweep, reduce_by_symmetry, OracleOptions, OracleOutcome, ReducedPrimal, Verdict,
};
pub use scan::{
    extreme_over_sections, lambda_exhaustive, lambda_exhaustive_with, lambda_greedy, mu_exhaustive,
    mu_exhaustive_with, mu_greedy, BoundDirection, Extreme, ScanMethod, SectionStatistic, GREEDY_TIE_TOL,
};

use serde::{Deserialize, Serialize};

use crate::bundle::{Assemblage, SymmetryData, DEFAULT_SECTION_CAP};
use crate::error::{Error, Result};
use crate::numerics::{is_projection, CMat, C64};
use crate::par::Execution;

const UNIFORM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// ηA_z + (1−η)Tr(A_z)1/d.
    White,
    /// η(Tr(A_z)1 − A_z)/(d−1) + (1−η)Tr(A_z)1/d.
    Complement,
}

/// Tr(A_z)1/d for every outcome.
fn trace_parts(a: &Assemblage) -> Vec<CMat> {
    let d = a.dim();
    a.effects().iter().map(|e| CMat::scalar(d, e.trace() / d as f64)).collect()
}

/// B_z = (Tr(A_z)1 − A_z)/(d−1).
pub fn complement_assemblage(a: &Assemblage) -> Result<Assemblage> {
    let d = a.dim();
    if d < 2 {
        return Err(Error::InvalidArgument("complement needs dimension at least 2".into()));
    }
    let inv = 1.0 / (d - 1) as f64;
    let meas = a
        .bundle()
        .fibres()
        .iter()
        .map(|f| f.iter().map(|&z| (&CMat::scalar(d, a.effect(z).trace()) - a.effect(z)).scale_re(inv)).collect())
        .collect();
    Assemblage::new(format!("{}-complement", a.name()), d, meas)
}

pub fn noisy_assemblage(a: &Assemblage, eta: f64, kind: NoiseKind) -> Result<Assemblage> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::EtaOutOfRange(eta));
    }
    let base = match kind {
        NoiseKind::White => a.clone(),
        NoiseKind::Complement => complement_assemblage(a)?,
    };
    let noise = trace_parts(a);
    let meas = a
        .bundle()
        .fibres()
        .iter()
        .map(|f| {
            f.iter()
                .map(|&z| {
                    let mut e = base.effect(z).scale_re(eta);
                    e.add_scaled(C64::new(1.0 - eta, 0.0), &noise[z]);
                    e
                })
                .collect()
        })
        .collect();
    Assemblage::new(format!("{}-noisy", a.name()), a.dim(), meas)
}

/// Tr A_z is the same for every outcome.
pub fn is_uniform(a: &Assemblage) -> bool {
    let t0 = a.effect(0).trace().re;
    a.effects().iter().all(|e| (e.trace().re - t0).abs() <= UNIFORM_TOL)
}

/// Z = Σ_z Tr A_z² − d|M|²/|Ω|.
pub fn normalization_constant_z(a: &Assemblage) -> Result<f64> {
    if !is_uniform(a) {
        return Err(Error::NotUniform);
    }
    let (d, m, n) = (a.dim() as f64, a.n_measurements() as f64, a.n_outcomes() as f64);
    let sq: f64 = a.effects().iter().map(|e| e.trace_product(e).re).sum();
    Ok(sq - d * m * m / n)
}

/// (d/Z)(λ − |M|²/|Ω|), capped at 1: compatible noise levels form an
/// interval containing 0, so a formula value above 1 means compatible at 1.
pub fn alpha_star(a: &Assemblage, z: f64, lambda: f64) -> f64 {
    let (d, m, n) = (a.dim() as f64, a.n_measurements() as f64, a.n_outcomes() as f64);
    (d / z * (lambda - m * m / n)).min(1.0)
}

/// (d(d−1)/Z)(|M|²/|Ω| − μ), capped at 1.
pub fn beta_star(a: &Assemblage, z: f64, mu: f64) -> f64 {
    let (d, m, n) = (a.dim() as f64, a.n_measurements() as f64, a.n_outcomes() as f64);
    (d * (d - 1.0) / z * (m * m / n - mu)).min(1.0)
}

/// Every effect is a rank-one projection.
pub fn is_rank_one_projective(a: &Assemblage) -> bool {
    a.effects().iter().all(|e| {
        let t = is_projection(e, 1e-9);
        t.is_projection && t.rank == 1
    })
}

/// Checks the hypotheses under which the closed forms are exact.
pub fn certify_closed_form(a: &Assemblage, sym: &SymmetryData) -> Result<()> {
    if !is_uniform(a) {
        return Err(Error::NotUniformOrRigid("effect traces differ".into()));
    }
    let check = sym.check_symmetry(a, 1e-8);
    if !check.ok {
        return Err(Error::NotUniformOrRigid(format!("symmetry residual {:e}", check.residual)));
    }
    if !sym.is_uniform() {
        return Err(Error::NotUniformOrRigid("outcome action is not transitive".into()));
    }
    if !sym.is_rigid(a) {
        return Err(Error::NotUniformOrRigid("stabiliser commutant is not two-dimensional".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub name: String,
    pub dim: usize,
    pub n_measurements: usize,
    pub n_outcomes: usize,
    pub z: f64,
    pub lambda: SectionStatistic,
    pub mu: SectionStatistic,
    pub alpha_star: f64,
    pub beta_star: f64,
    pub alpha_bound: BoundDirection,
    pub beta_bound: BoundDirection,
    pub rank_one_projective: bool,
    /// Uniformity and rigid symmetry were verified, so the closed forms are
    /// the robustnesses rather than formula evaluations.
    pub formula_certified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula_note: Option<String>,
}

impl RobustnessReport {
    /// Both closed forms are exact values, not heuristic bounds.
    pub fn is_exact(&self) -> bool {
        self.alpha_bound == BoundDirection::Exact && self.beta_bound == BoundDirection::Exact
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AnalysisOptions {
    pub method: ScanMethod,
    pub section_cap: u128,
    pub exec: Execution,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions { method: ScanMethod::Exhaustive, section_cap: DEFAULT_SECTION_CAP, exec: Execution::default() }
    }
}

/// λ, μ, Z and the closed forms. Without symmetry data, or when the
/// hypotheses fail, the values are still reported with
/// `formula_certified = false`.
pub fn robustness_report(a: &Assemblage, sym: Option<&SymmetryData>, opts: &AnalysisOptions) -> Result<RobustnessReport> {
    let z = normalization_constant_z(a)?;
    let (lambda, mu) = match opts.method {
        ScanMethod::Exhaustive => (
            lambda_exhaustive_with(a, opts.section_cap, opts.exec)?,
            mu_exhaustive_with(a, opts.section_cap, opts.exec)?,
        ),
        ScanMethod::Greedy => (lambda_greedy(a), mu_greedy(a)),
    };
    let (formula_certified, formula_note) = match sym {
        None => (false, Some("no symmetry data supplied".to_string())),
        Some(s) => match certify_closed_form(a, s) {
            Ok(()) => (true, None),
            Err(e) => (false, Some(e.to_string())),
        },
    };
    // A heuristic lower bound that already reaches the cap of 1 is exact.
    let bound_of = |stat: BoundDirection, value: f64| {
        if stat == BoundDirection::Exact || value >= 1.0 {
            BoundDirection::Exact
        } else {
            BoundDirection::LowerBound
        }
    };
    let (alpha, beta) = (alpha_star(a, z, lambda.value), beta_star(a, z, mu.value));
    Ok(RobustnessReport {
        name: a.name().to_string(),
        dim: a.dim(),
        n_measurements: a.n_measurements(),
        n_outcomes: a.n_outcomes(),
        z,
        alpha_star: alpha,
        beta_star: beta,
        alpha_bound: bound_of(lambda.bound, alpha),
        beta_bound: bound_of(mu.bound, beta),
        lambda,
        mu,
        rank_one_projective: is_rank_one_projective(a),
        formula_certified,
        formula_note,
    })
}
