//! The phase space F_d² and its displacement operators.
//!
//! Odd p: D_u = τ^{tr(u1 u2)} X_{u1} Z_{u2} with ω = e^{2πi/p}, τ = ω^{(p+1)/2},
//! so D_u D_v = τ^{⟨u,v⟩} D_{u+v}. For p = 2 the operator is the tensor
//! product of qubit operators i^{q p} X^q Z^p, where q are the coordinates of
//! u1 in the polynomial basis and p those of u2 in the dual basis; the
//! composition phase is then a power of i computed factor by factor.

use std::f64::consts::PI;

use serde::Serialize;

use super::field::FiniteField;
use crate::numerics::{CMat, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PhasePoint {
    pub u1: u32,
    pub u2: u32,
}

impl PhasePoint {
    pub const ORIGIN: PhasePoint = PhasePoint { u1: 0, u2: 0 };

    pub fn new(u1: u32, u2: u32) -> Self {
        PhasePoint { u1, u2 }
    }

    /// Row-major index u1·q + u2.
    pub fn index(self, f: &FiniteField) -> usize {
        self.u1 as usize * f.order() + self.u2 as usize
    }

    pub fn from_index(f: &FiniteField, i: usize) -> Self {
        PhasePoint { u1: (i / f.order()) as u32, u2: (i % f.order()) as u32 }
    }

    pub fn add(self, f: &FiniteField, v: PhasePoint) -> Self {
        PhasePoint { u1: f.add(self.u1, v.u1), u2: f.add(self.u2, v.u2) }
    }

    pub fn scale(self, f: &FiniteField, s: u32) -> Self {
        PhasePoint { u1: f.mul(s, self.u1), u2: f.mul(s, self.u2) }
    }

    pub fn neg(self, f: &FiniteField) -> Self {
        PhasePoint { u1: f.neg(self.u1), u2: f.neg(self.u2) }
    }
}

pub fn all_points(f: &FiniteField) -> Vec<PhasePoint> {
    (0..f.order() * f.order()).map(|i| PhasePoint::from_index(f, i)).collect()
}

/// ⟨u, v⟩ = tr(u2 v1 − u1 v2) ∈ F_p.
pub fn symplectic(f: &FiniteField, u: PhasePoint, v: PhasePoint) -> u32 {
    f.tr(f.sub(f.mul(u.u2, v.u1), f.mul(u.u1, v.u2)))
}

/// ω^k with ω = e^{2πi/p}.
pub fn omega_pow(f: &FiniteField, k: i64) -> C64 {
    let p = f.p() as i64;
    C64::from_polar(1.0, 2.0 * PI * k.rem_euclid(p) as f64 / p as f64)
}

/// τ^k with τ = ω^{(p+1)/2}, odd p.
pub fn tau_pow(f: &FiniteField, k: i64) -> C64 {
    let p = f.p() as i64;
    omega_pow(f, (k.rem_euclid(p)) * (p + 1) / 2)
}

fn i_pow(k: i64) -> C64 {
    [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)][k.rem_euclid(4) as usize]
}

/// Σ_r q_r p_r as an integer, for the p = 2 phase convention.
fn qubit_overlap(f: &FiniteField, u: PhasePoint) -> i64 {
    f.coords(u.u1).iter().zip(f.dual_coords(u.u2)).map(|(&a, b)| (a * b) as i64).sum()
}

/// The phase in front of X_{u1} Z_{u2}.
pub fn displacement_prefactor(f: &FiniteField, u: PhasePoint) -> C64 {
    if f.p() == 2 {
        i_pow(qubit_overlap(f, u))
    } else {
        tau_pow(f, f.tr(f.mul(u.u1, u.u2)) as i64)
    }
}

pub fn displacement(f: &FiniteField, u: PhasePoint) -> CMat {
    let q = f.order();
    let pre = displacement_prefactor(f, u);
    let mut m = CMat::zeros(q);
    for x in 0..q as u32 {
        let row = f.add(x, u.u1) as usize;
        m[(row, x as usize)] = pre * omega_pow(f, f.tr(f.mul(u.u2, x)) as i64);
    }
    m
}

/// The phase c(u, v) with D_u D_v = c(u, v) · D_{u+v}.
pub fn composition_phase(f: &FiniteField, u: PhasePoint, v: PhasePoint) -> C64 {
    if f.p() == 2 {
        let (q, p) = (f.coords(u.u1), f.dual_coords(u.u2));
        let (q2, p2) = (f.coords(v.u1), f.dual_coords(v.u2));
        let mut e = 0i64;
        for r in 0..q.len() {
            let (w1, w2) = ((q[r] + q2[r]) % 2, (p[r] + p2[r]) % 2);
            e += (q[r] * p[r] + q2[r] * p2[r] + 2 * p[r] * q2[r]) as i64 - (w1 * w2) as i64;
        }
        i_pow(e)
    } else {
        tau_pow(f, symplectic(f, u, v) as i64)
    }
}

/// Directions of the d+1 rays: (0,1) first, then (1,m) for m in field order.
pub fn rays(f: &FiniteField) -> Vec<PhasePoint> {
    std::iter::once(PhasePoint::new(0, 1)).chain(f.elements().map(|m| PhasePoint::new(1, m))).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Line {
    pub ray: usize,
    pub offset: PhasePoint,
    pub points: Vec<PhasePoint>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Striation {
    pub ray: PhasePoint,
    pub lines: Vec<Line>,
}

/// The line offset + F·dir.
pub fn line(f: &FiniteField, ray_index: usize, dir: PhasePoint, offset: PhasePoint) -> Line {
    let points = f.elements().map(|s| offset.add(f, dir.scale(f, s))).collect();
    Line { ray: ray_index, offset, points }
}

/// Offsets (t, 0) for the vertical ray and (0, t) for the rays (1, m).
pub fn striations(f: &FiniteField) -> Vec<Striation> {
    rays(f)
        .into_iter()
        .enumerate()
        .map(|(r, dir)| {
            let lines = f
                .elements()
                .map(|t| {
                    let offset = if r == 0 { PhasePoint::new(t, 0) } else { PhasePoint::new(0, t) };
                    line(f, r, dir, offset)
                })
                .collect();
            Striation { ray: dir, lines }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::pauli;

    #[test]
    fn origin_is_identity() {
        for (p, n) in [(2, 1), (3, 1), (2, 2)] {
            let f = FiniteField::new(p, n).unwrap();
            let d = displacement(&f, PhasePoint::ORIGIN);
            assert!(d.max_abs_diff(&CMat::identity(f.order())) < 1e-15);
        }
    }

    #[test]
    fn qubit_displacements_are_paulis() {
        let f = FiniteField::new(2, 1).unwrap();
        let [sx, sy, sz] = pauli();
        assert!(displacement(&f, PhasePoint::new(1, 0)).max_abs_diff(&sx) < 1e-15);
        assert!(displacement(&f, PhasePoint::new(0, 1)).max_abs_diff(&sz) < 1e-15);
        assert!(displacement(&f, PhasePoint::new(1, 1)).max_abs_diff(&sy) < 1e-15);
    }

    #[test]
    fn composition_d3_exhaustive() {
        let f = FiniteField::new(3, 1).unwrap();
        let pts = all_points(&f);
        for &u in &pts {
            for &v in &pts {
                let lhs = &displacement(&f, u) * &displacement(&f, v);
                let rhs = displacement(&f, u.add(&f, v)).scale(composition_phase(&f, u, v));
                assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            }
        }
    }

    #[test]
    fn striations_partition() {
        for (p, n) in [(3, 1), (2, 2), (5, 1)] {
            let f = FiniteField::new(p, n).unwrap();
            let st = striations(&f);
            assert_eq!(st.len(), f.order() + 1);
            for s in &st {
                let mut seen = vec![0; f.order() * f.order()];
                for l in &s.lines {
                    for pt in &l.points {
                        seen[pt.index(&f)] += 1;
                    }
                }
                assert!(seen.iter().all(|&c| c == 1));
            }
        }
    }
}
