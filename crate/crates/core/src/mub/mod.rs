//! Finite fields, phase space, displacement operators and the standard
//! complete set of mutually unbiased bases in prime-power dimension.
//!
//! Each ray of F_d² gives a commuting family of displacements; its common
//! eigenprojections form one basis. In odd characteristic the affine group
//! SL(2, F_d) ⋉ F_d² acts on these bases through a projective unitary
//! representation, which is closed numerically (up to phase) to obtain the
//! symmetry data. In characteristic two only rigidity is checked, through the
//! commutant of phase gates and CNOTs.

mod clifford;
mod field;
mod phase;
mod wigner;

pub use clifford::{
    affine_orbits, clifford_stabilizer_rigidity, mub_symmetry_group, sl2_elements, sl_representation, AffineMap,
    CliffordRigidity, Sl2,
};
pub use field::{is_prime, FiniteField, MAX_FIELD_ORDER};
pub use phase::{
    all_points, composition_phase, displacement, displacement_prefactor, line, omega_pow, rays, striations,
    symplectic, tau_pow, Line, PhasePoint, Striation,
};
pub use wigner::wigner_function;

use crate::bundle::Assemblage;
use crate::error::{Error, Result};
use crate::numerics::{eigen_clusters, eigh, projector_onto_columns, CMat, C64};

/// Field of order d, if d is a prime power within range.
pub fn field_for_dimension(d: usize) -> Result<FiniteField> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("dimension {d} is not a prime power")));
    }
    let p = (2..=d).find(|&k| d.is_multiple_of(k)).unwrap();
    let mut n = 0;
    let mut r = d;
    while r.is_multiple_of(p) {
        r /= p;
        n += 1;
    }
    if r != 1 {
        return Err(Error::InvalidArgument(format!("dimension {d} is not a prime power")));
    }
    FiniteField::new(p as u32, n)
}

/// Deterministic pseudo-random coefficient in [0.5, 1.5). Fixed arithmetic
/// progressions are avoided: their additive relations make sums of
/// characters collide.
fn coefficient(seed: u64) -> f64 {
    let mut z = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    0.5 + (z >> 11) as f64 / (1u64 << 53) as f64
}

/// Common eigenprojections of a commuting family of unitaries, read off from
/// one generic Hermitian combination and validated against every member.
pub fn joint_eigenprojections(ops: &[CMat]) -> Result<Vec<CMat>> {
    let dim = ops[0].dim();
    for attempt in 0..8u64 {
        let mut h = CMat::zeros(dim);
        for (k, op) in ops.iter().enumerate() {
            let seed = 2 * (k as u64 + 64 * attempt);
            let (a, b) = (coefficient(seed), coefficient(seed + 1));
            let herm = op + &op.adjoint();
            let anti = (op - &op.adjoint()).scale(C64::new(0.0, 1.0));
            h.add_scaled(C64::new(a, 0.0), &herm);
            h.add_scaled(C64::new(b, 0.0), &anti);
        }
        let eig = eigh(&h.hermitian_part(), 1e-9)?;
        let clusters = eigen_clusters(&eig.values, 1e-6);
        let projs: Vec<CMat> =
            clusters.iter().map(|c| projector_onto_columns(&eig.vectors, c.clone()).hermitian_part()).collect();
        let commute = projs.iter().all(|p| ops.iter().all(|d| (d * p).max_abs_diff(&(p * d)) < 1e-9));
        let eigen = projs.iter().all(|p| {
            ops.iter().all(|d| {
                let dp = d * p;
                let lam = dp.trace() / p.trace();
                dp.max_abs_diff(&p.scale(lam)) < 1e-9
            })
        });
        if commute && eigen {
            return Ok(projs);
        }
    }
    Err(Error::NoConvergence(8))
}

/// Displacements along a ray, excluding the identity.
fn ray_family(f: &FiniteField, dir: PhasePoint) -> Vec<CMat> {
    f.elements().skip(1).map(|s| displacement(f, dir.scale(f, s))).collect()
}

/// Eigenphase tuple of a rank-one projection under a ray family, quantised.
fn eigenphase_key(p: &CMat, family: &[CMat]) -> Vec<i64> {
    family
        .iter()
        .map(|d| {
            let lam = (d * p).trace() / p.trace();
            (lam.arg().rem_euclid(std::f64::consts::TAU) * 1e6).round() as i64
        })
        .collect()
}

/// The d+1 bases as an assemblage with one rank-one projection per line.
/// Odd d: outcomes ordered like the quantum net lines; even d: by eigenphase
/// tuple.
pub fn mub_assemblage(f: &FiniteField) -> Result<Assemblage> {
    let d = f.order();
    let net = if f.p() != 2 { Some(quantum_net(f)?) } else { None };
    let mut meas = Vec::with_capacity(d + 1);
    for (r, dir) in rays(f).into_iter().enumerate() {
        let family = ray_family(f, dir);
        let projs = joint_eigenprojections(&family)?;
        if projs.len() != d {
            return Err(Error::InvariantViolation(format!("ray {r} has degenerate eigenspaces")));
        }
        let fibre = match &net {
            Some(net) => net[r * d..(r + 1) * d]
                .iter()
                .map(|(_, q)| {
                    projs
                        .iter()
                        .find(|p| p.max_abs_diff(q) < 1e-8)
                        .cloned()
                        .ok_or_else(|| Error::InvariantViolation("quantum net does not match an eigenbasis".into()))
                })
                .collect::<Result<Vec<_>>>()?,
            None => {
                let mut keyed: Vec<(Vec<i64>, CMat)> =
                    projs.into_iter().map(|p| (eigenphase_key(&p, &family), p)).collect();
                keyed.sort_by(|a, b| a.0.cmp(&b.0));
                keyed.into_iter().map(|(_, p)| p).collect()
            }
        };
        meas.push(fibre);
    }
    Assemblage::new(format!("mub-d{d}"), d, meas)
}

/// Q(l) for every line, rays in `rays` order and lines in striation order.
/// Anchored at Q(vertical axis) = |0⟩⟨0| and extended by U(F,0) to the other
/// rays and by translations to parallel lines.
pub fn quantum_net(f: &FiniteField) -> Result<Vec<(Line, CMat)>> {
    if f.p() == 2 {
        return Err(Error::EvenCharacteristic);
    }
    let d = f.order();
    let mut p0 = CMat::zeros(d);
    p0[(0, 0)] = C64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(d * (d + 1));
    for (r, st) in striations(f).into_iter().enumerate() {
        let fm = if r == 0 { Sl2::IDENTITY } else { Sl2 { a: 0, b: 1, c: f.neg(1), d: st.ray.u2 } };
        let u = sl_representation(f, fm, PhasePoint::ORIGIN)?;
        let q_ray = p0.conjugate_by(&u);
        for l in st.lines {
            let q = q_ray.conjugate_by(&displacement(f, l.offset)).hermitian_part();
            out.push((l, q));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_lookup() {
        assert_eq!(field_for_dimension(8).unwrap().degree(), 3);
        assert_eq!(field_for_dimension(9).unwrap().p(), 3);
        assert!(field_for_dimension(6).is_err());
        assert!(field_for_dimension(1).is_err());
    }

    #[test]
    fn mub_shapes_and_overlaps() {
        for d in [2usize, 3, 4] {
            let f = field_for_dimension(d).unwrap();
            let a = mub_assemblage(&f).unwrap();
            assert_eq!(a.n_measurements(), d + 1);
            assert_eq!(a.n_outcomes(), d * (d + 1));
            for z in 0..a.n_outcomes() {
                for w in 0..a.n_outcomes() {
                    let t = a.effect(z).trace_product(a.effect(w)).re;
                    let expect = if a.bundle().measurement_of(z) != a.bundle().measurement_of(w) {
                        1.0 / d as f64
                    } else if z == w {
                        1.0
                    } else {
                        0.0
                    };
                    assert!((t - expect).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn qubit_mubs_are_the_octahedron() {
        let a = mub_assemblage(&field_for_dimension(2).unwrap()).unwrap();
        let z_up = crate::numerics::bloch_projector([0.0, 0.0, 1.0]);
        assert!(a.effect(0).max_abs_diff(&z_up) < 1e-12);
    }

    #[test]
    fn net_anchor_and_translation() {
        let f = field_for_dimension(3).unwrap();
        let net = quantum_net(&f).unwrap();
        let (l0, q0) = &net[0];
        assert_eq!(l0.offset, PhasePoint::ORIGIN);
        assert!((q0[(0, 0)].re - 1.0).abs() < 1e-14 && (q0.trace().re - 1.0).abs() < 1e-14);
        for (l, q) in &net[..3] {
            let expect = q0.conjugate_by(&displacement(&f, l.offset));
            assert!(q.max_abs_diff(&expect) < 1e-12);
        }
        assert!(quantum_net(&field_for_dimension(4).unwrap()).is_err());
    }
}
