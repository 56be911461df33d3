use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;

use super::field::FiniteField;
use super::phase::{all_points, displacement, tau_pow, Line, PhasePoint};
use crate::bundle::{Assemblage, SymmetryData};
use crate::error::{Error, Result};
use crate::groups::{commutant_basis, isotypic_projections, ElementEquality, FiniteMatrixGroup};
use crate::numerics::{CMat, C64};

const MAX_SYMMETRY_ORDER: usize = 100_000;

/// A 2×2 matrix ((a, b), (c, d)) over the field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Sl2 {
    pub a: u32,
    pub b: u32,
    pub c: u32,
    pub d: u32,
}

impl Sl2 {
    pub const IDENTITY: Sl2 = Sl2 { a: 1, b: 0, c: 0, d: 1 };

    pub fn det(&self, f: &FiniteField) -> u32 {
        f.sub(f.mul(self.a, self.d), f.mul(self.b, self.c))
    }

    pub fn apply(&self, f: &FiniteField, u: PhasePoint) -> PhasePoint {
        PhasePoint::new(f.add(f.mul(self.a, u.u1), f.mul(self.b, u.u2)), f.add(f.mul(self.c, u.u1), f.mul(self.d, u.u2)))
    }

    /// Inverse of a determinant-one matrix.
    pub fn inverse(&self, f: &FiniteField) -> Sl2 {
        Sl2 { a: self.d, b: f.neg(self.b), c: f.neg(self.c), d: self.a }
    }
}

/// All determinant-one matrices, in lexicographic order of (a, b, c, d).
pub fn sl2_elements(f: &FiniteField) -> Vec<Sl2> {
    let q = f.order() as u32;
    let mut out = Vec::new();
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                for d in 0..q {
                    let m = Sl2 { a, b, c, d };
                    if m.det(f) == 1 {
                        out.push(m);
                    }
                }
            }
        }
    }
    out
}

/// Metaplectic unitary U(F, v) = U(F, 0) D_v, with
/// U(F, v) D_u U(F, v)† = ω^{⟨v,u⟩} D_{Fu}. Odd characteristic only.
pub fn sl_representation(f: &FiniteField, m: Sl2, v: PhasePoint) -> Result<CMat> {
    if f.p() == 2 {
        return Err(Error::EvenCharacteristic);
    }
    if m.det(f) != 1 {
        return Err(Error::InvalidArgument(format!("matrix {m:?} does not have determinant one")));
    }
    let q = f.order();
    let mut u = CMat::zeros(q);
    if m.b != 0 {
        let binv = f.inv(m.b).unwrap();
        let norm = 1.0 / (q as f64).sqrt();
        for x in 0..q as u32 {
            for y in 0..q as u32 {
                let xy2 = f.mul(f.from_int(2), f.mul(x, y));
                let num = f.add(f.sub(f.mul(m.a, f.mul(y, y)), xy2), f.mul(m.d, f.mul(x, x)));
                let e = f.tr(f.mul(num, binv));
                u[(x as usize, y as usize)] = tau_pow(f, e as i64) * norm;
            }
        }
    } else {
        let ag = f.mul(m.a, m.c);
        for x in 0..q as u32 {
            let e = f.tr(f.mul(ag, f.mul(x, x)));
            u[(f.mul(m.a, x) as usize, x as usize)] = tau_pow(f, e as i64);
        }
    }
    Ok(&u * &displacement(f, v))
}

/// The projective Clifford group generated by shears and displacements,
/// together with its action on the outcomes of `a`, which must be a set of
/// projections permuted by it (normally `mub_assemblage(f)`).
pub fn mub_symmetry_group(f: &FiniteField, a: &Assemblage) -> Result<SymmetryData> {
    if f.p() == 2 {
        return Err(Error::EvenCharacteristic);
    }
    let q = f.order();
    let expected = q * q * q * (q * q - 1);
    if expected > MAX_SYMMETRY_ORDER {
        return Err(Error::TooLarge {
            what: "affine symplectic group",
            size: expected as u128,
            cap: MAX_SYMMETRY_ORDER as u128,
        });
    }
    let mut gens = Vec::new();
    for r in 0..f.degree() as usize {
        let e = f.basis(r);
        gens.push(sl_representation(f, Sl2 { a: 1, b: e, c: 0, d: 1 }, PhasePoint::ORIGIN)?);
        gens.push(sl_representation(f, Sl2 { a: 1, b: 0, c: e, d: 1 }, PhasePoint::ORIGIN)?);
        gens.push(displacement(f, PhasePoint::new(e, 0)));
        gens.push(displacement(f, PhasePoint::new(0, e)));
    }
    let group = FiniteMatrixGroup::close(q, &gens, expected, ElementEquality::UpToPhase)?
        .with_name(format!("clifford-d{q}"));
    SymmetryData::from_conjugation(Arc::new(group), a)
}

/// u ↦ F u + v.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AffineMap {
    pub linear: Sl2,
    pub shift: PhasePoint,
}

impl AffineMap {
    pub fn apply(&self, f: &FiniteField, u: PhasePoint) -> PhasePoint {
        self.linear.apply(f, u).add(f, self.shift)
    }
}

/// Orbits on points of the affine maps that fix `l` as a set. Each orbit is
/// sorted by point index; orbits are ordered by their least point.
pub fn affine_orbits(f: &FiniteField, l: &Line) -> Vec<Vec<PhasePoint>> {
    let on_line: BTreeSet<PhasePoint> = l.points.iter().copied().collect();
    let pts = all_points(f);
    let mut stab = Vec::new();
    for linear in sl2_elements(f) {
        for &shift in &pts {
            let g = AffineMap { linear, shift };
            if l.points.iter().all(|&u| on_line.contains(&g.apply(f, u))) {
                stab.push(g);
            }
        }
    }
    let mut seen = vec![false; pts.len()];
    let mut orbits = Vec::new();
    for &start in &pts {
        if seen[start.index(f)] {
            continue;
        }
        let mut orbit: Vec<PhasePoint> = stab.iter().map(|g| g.apply(f, start)).collect();
        orbit.sort_by_key(|u| u.index(f));
        orbit.dedup();
        for u in &orbit {
            seen[u.index(f)] = true;
        }
        orbits.push(orbit);
    }
    orbits
}

#[derive(Clone, Debug, Serialize)]
pub struct CliffordRigidity {
    pub qubits: usize,
    pub commutant_dim: usize,
    /// One of the two isotypic projections equals |0…0⟩⟨0…0|.
    pub projection_matches: bool,
    pub rigid: bool,
}

/// Commutant of the phase gates and all CNOTs on n qubits, the stabiliser
/// of |0…0⟩ in the Clifford group. Rigidity means a 2-dimensional commutant
/// split as |0…0⟩⟨0…0| ⊕ rest.
pub fn clifford_stabilizer_rigidity(n: usize) -> Result<CliffordRigidity> {
    if !(1..=5).contains(&n) {
        return Err(Error::InvalidArgument(format!("qubit count {n} outside 1..=5")));
    }
    let d = 1usize << n;
    let bit = |x: usize, j: usize| (x >> (n - 1 - j)) & 1;
    let mut gens = Vec::new();
    for j in 0..n {
        let diag: Vec<C64> = (0..d).map(|x| if bit(x, j) == 1 { C64::new(0.0, 1.0) } else { C64::new(1.0, 0.0) }).collect();
        gens.push(CMat::diag(&diag));
    }
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            let mut m = CMat::zeros(d);
            for x in 0..d {
                let y = if bit(x, j) == 1 { x ^ (1 << (n - 1 - k)) } else { x };
                m[(y, x)] = C64::new(1.0, 0.0);
            }
            gens.push(m);
        }
    }
    let basis = commutant_basis(d, &gens);
    let mut zero = CMat::zeros(d);
    zero[(0, 0)] = C64::new(1.0, 0.0);
    let projection_matches = match isotypic_projections(&basis) {
        Some((p, r)) if basis.len() == 2 => p.max_abs_diff(&zero) < 1e-8 || r.max_abs_diff(&zero) < 1e-8,
        _ => false,
    };
    Ok(CliffordRigidity { qubits: n, commutant_dim: basis.len(), projection_matches, rigid: basis.len() == 2 && projection_matches })
}
