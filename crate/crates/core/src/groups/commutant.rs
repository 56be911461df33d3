use super::{ElementEquality, FiniteMatrixGroup};
use crate::error::{Error, Result};
use crate::numerics::{eigen_clusters, eigh, projector_onto_columns, CMat, C64};

const NULL_TOL: f64 = 1e-8;

/// Frobenius-orthonormal basis of {X : XU = UX for all U}.
///
/// Solved as the null space of Σ C_U† C_U, where C_U = U⊗1 − 1⊗Uᵀ is the
/// row-major vectorisation of X ↦ UX − XU.
pub fn commutant_basis(dim: usize, unitaries: &[CMat]) -> Vec<CMat> {
    let n = dim * dim;
    let id = CMat::identity(dim);
    let mut gram = CMat::zeros(n);
    for u in unitaries {
        let cu = &u.kron(&id) - &id.kron(&u.transpose());
        gram += &(&cu.adjoint() * &cu);
    }
    let eig = eigh(&gram.hermitian_part(), 1e-6).expect("Gram matrix is Hermitian");
    let scale = 1.0f64.max(unitaries.len() as f64);
    eig.values
        .iter()
        .enumerate()
        .take_while(|(_, &v)| v < NULL_TOL * scale)
        .map(|(k, _)| CMat::from_fn(dim, |i, j| eig.vectors[(i * dim + j, k)]))
        .collect()
}

/// ⟨χ, χ⟩ = (1/|H|) Σ_{g∈H} |tr U_g|², the number of irreducible constituents
/// counted with squared multiplicity.
pub fn count_irreducible_subreps(group: &FiniteMatrixGroup, sub: &[usize]) -> Result<usize> {
    if group.equality() == ElementEquality::UpToPhase {
        let defect = group.phase_defect_on(sub);
        if defect > 1e-8 {
            return Err(Error::ProjectivePhases(defect));
        }
    }
    let s: f64 = sub.iter().map(|&g| group.element(g).trace().norm_sqr()).sum();
    Ok((s / sub.len() as f64).round() as usize)
}

/// For a two-dimensional commutant spanned by a projection and its complement,
/// returns the pair (lower-rank first, ties broken by the eigenvalue order of
/// a Hermitian generator). `None` if the basis does not have that form.
pub fn isotypic_projections(basis: &[CMat]) -> Option<(CMat, CMat)> {
    if basis.len() != 2 {
        return None;
    }
    let dim = basis[0].dim();
    let id = CMat::identity(dim);
    // A Hermitian, traceless element of the commutant.
    let mut best: Option<CMat> = None;
    for b in basis {
        for h in [b + &b.adjoint(), (b - &b.adjoint()).scale(C64::new(0.0, 1.0))] {
            let t = h.trace() / dim as f64;
            let mut h0 = h.hermitian_part();
            h0.add_scaled(-t, &id);
            if best.as_ref().is_none_or(|cur| h0.frobenius_norm() > cur.frobenius_norm()) {
                best = Some(h0);
            }
        }
    }
    let h = best?;
    if h.frobenius_norm() < 1e-6 {
        return None;
    }
    let eig = eigh(&h, 1e-6).ok()?;
    let spread = eig.values[dim - 1] - eig.values[0];
    let clusters = eigen_clusters(&eig.values, 1e-6 * spread.max(1.0));
    if clusters.len() != 2 {
        return None;
    }
    let p = projector_onto_columns(&eig.vectors, clusters[0].clone()).hermitian_part();
    let q = projector_onto_columns(&eig.vectors, clusters[1].clone()).hermitian_part();
    if clusters[1].len() < clusters[0].len() {
        Some((q, p))
    } else {
        Some((p, q))
    }
}
