use super::field::FiniteField;
use super::phase::{all_points, displacement, omega_pow, symplectic};
use crate::error::{Error, Result};
use crate::numerics::{CMat, HERMITIAN_TOL};

/// W_X(u) = (1/d²) Σ_v ω^{⟨v,u⟩} Tr(D_v† X), indexed by `PhasePoint::index`.
/// Sums to Tr X over the phase space, and its sum along a line l is
/// Tr(X Q(l)) for the quantum net of [`quantum_net`](super::quantum_net).
pub fn wigner_function(f: &FiniteField, x: &CMat) -> Result<Vec<f64>> {
    if f.p() == 2 {
        return Err(Error::EvenCharacteristic);
    }
    let defect = x.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let d = f.order();
    let pts = all_points(f);
    let chars: Vec<_> = pts.iter().map(|&v| displacement(f, v).adjoint().trace_product(x)).collect();
    let norm = 1.0 / (d * d) as f64;
    Ok(pts
        .iter()
        .map(|&u| {
            let s: num_complex::Complex64 =
                pts.iter().zip(&chars).map(|(&v, &c)| omega_pow(f, symplectic(f, v, u) as i64) * c).sum();
            s.re * norm
        })
        .collect())
}
