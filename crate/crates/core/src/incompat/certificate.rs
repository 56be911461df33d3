use serde::Serialize;

use super::scan::{extreme_over_sections, Extreme};
use super::RobustnessReport;
use crate::bundle::{Assemblage, DEFAULT_SECTION_CAP};
use crate::error::{Error, Result};
use crate::numerics::{CMat, C64};
use crate::par::Execution;

pub const CERTIFICATE_TOL: f64 = 1e-9;

/// Dual feasible point X_z = a·1 + b·A_z with a = λ/(|M|Z), b = −1/Z.
/// Any feasible X gives α* ≤ 1 + Σ_z Tr(X_z A_z).
#[derive(Clone, Debug, Serialize)]
pub struct DualCertificate {
    pub a: f64,
    pub b: f64,
    #[serde(skip)]
    pub x: Vec<CMat>,
    /// 1 + Σ Tr(X_z A_z) − (1/d) Σ Tr(A_z) Tr(X_z); must vanish.
    pub first_residual: f64,
    /// min over sections of minEig(Σ_x X_{s(x)}); must be non-negative.
    pub worst_section_min_eig: f64,
    pub certified_upper_bound: f64,
}

pub fn dual_certificate(a: &Assemblage, rep: &RobustnessReport) -> Result<DualCertificate> {
    dual_certificate_with(a, rep, DEFAULT_SECTION_CAP, Execution::default())
}

pub fn dual_certificate_with(
    a: &Assemblage,
    rep: &RobustnessReport,
    cap: u128,
    exec: Execution,
) -> Result<DualCertificate> {
    let d = a.dim() as f64;
    let coef_a = rep.lambda.value / (a.n_measurements() as f64 * rep.z);
    let coef_b = -1.0 / rep.z;
    let x: Vec<CMat> = a
        .effects()
        .iter()
        .map(|e| {
            let mut m = CMat::scalar(a.dim(), C64::new(coef_a, 0.0));
            m.add_scaled(C64::new(coef_b, 0.0), e);
            m
        })
        .collect();
    let tr_xa: f64 = x.iter().zip(a.effects()).map(|(xz, e)| xz.trace_product(e).re).sum();
    let tr_tr: f64 = x.iter().zip(a.effects()).map(|(xz, e)| xz.trace().re * e.trace().re).sum();
    let first = 1.0 + tr_xa - tr_tr / d;
    let fibres: Vec<Vec<CMat>> =
        a.bundle().fibres().iter().map(|f| f.iter().map(|&z| x[z].clone()).collect()).collect();
    let (worst, _) = extreme_over_sections(&fibres, Extreme::Min, cap, exec)?;
    if first.abs() > CERTIFICATE_TOL || worst < -CERTIFICATE_TOL {
        return Err(Error::InfeasibleCertificate { first, worst });
    }
    Ok(DualCertificate {
        a: coef_a,
        b: coef_b,
        x,
        first_residual: first,
        worst_section_min_eig: worst,
        certified_upper_bound: 1.0 + tr_xa,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{robustness_report, AnalysisOptions};
    use super::*;
    use crate::construct::{platonic_assemblage, Solid};
    use crate::numerics::bloch_projector;

    #[test]
    fn octahedron_certificate_matches_closed_form() {
        let a = platonic_assemblage(Solid::Octahedron);
        let rep = robustness_report(&a, None, &AnalysisOptions::default()).unwrap();
        let cert = dual_certificate(&a, &rep).unwrap();
        assert!((cert.certified_upper_bound - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!(cert.first_residual.abs() < 1e-12);
        assert!(cert.worst_section_min_eig.abs() < 1e-12);
    }

    #[test]
    fn perturbation_breaks_certificate() {
        let a = platonic_assemblage(Solid::Octahedron);
        let rep = robustness_report(&a, None, &AnalysisOptions::default()).unwrap();
        let mut meas = a.measurements();
        let t: f64 = 0.05;
        let k = meas.len() - 1;
        meas[k][0] = bloch_projector([t.sin(), 0.0, t.cos()]);
        meas[k][1] = bloch_projector([-t.sin(), 0.0, -t.cos()]);
        let b = Assemblage::new("perturbed", 2, meas).unwrap();
        assert!(matches!(dual_certificate(&b, &rep), Err(Error::InfeasibleCertificate { .. })));
    }
}
