#![allow(dead_code, clippy::needless_range_loop)]

use std::sync::Arc;

use symmetra::bundle::{Assemblage, SymmetryData};
use symmetra::construct::{platonic_assemblage, Solid};
use symmetra::data::load_group;
use symmetra::numerics::{c, CMat, C64};

pub fn platonic_with_symmetry(solid: Solid) -> (Assemblage, SymmetryData) {
    let a = platonic_assemblage(solid);
    let g = match solid {
        Solid::Octahedron | Solid::Cube | Solid::Cuboctahedron => "st8",
        _ => "st16",
    };
    let s = SymmetryData::from_conjugation(Arc::new(load_group(g).unwrap()), &a).unwrap();
    (a, s)
}

/// Hermitian matrix from 2·dim² reals.
pub fn hermitian_from(dim: usize, xs: &[f64]) -> CMat {
    let m = CMat::from_fn(dim, |i, j| c(xs[2 * (i * dim + j)], xs[2 * (i * dim + j) + 1]));
    m.hermitian_part()
}

/// Unitary from Gram–Schmidt on the columns of a generic complex matrix.
pub fn unitary_from(dim: usize, xs: &[f64]) -> CMat {
    let mut cols: Vec<Vec<C64>> = (0..dim)
        .map(|j| (0..dim).map(|i| c(xs[2 * (i * dim + j)], xs[2 * (i * dim + j) + 1]) + if i == j { c(0.5, 0.0) } else { c(0.0, 0.0) }).collect())
        .collect();
    for j in 0..dim {
        for k in 0..j {
            let ip: C64 = (0..dim).map(|i| cols[k][i].conj() * cols[j][i]).sum();
            for i in 0..dim {
                let sub = ip * cols[k][i];
                cols[j][i] -= sub;
            }
        }
        let n = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut cols[j] {
            *z /= n;
        }
    }
    CMat::from_fn(dim, |i, j| cols[j][i])
}

/// Eigenvalues of a 2×2 Hermitian matrix in closed form, ascending.
pub fn eig2(m: &CMat) -> [f64; 2] {
    let (a, d, b) = (m[(0, 0)].re, m[(1, 1)].re, m[(0, 1)]);
    let mean = (a + d) / 2.0;
    let r = (((a - d) / 2.0).powi(2) + b.norm_sqr()).sqrt();
    [mean - r, mean + r]
}

/// Eigenvalues of a 3×3 Hermitian matrix by the trigonometric solution of
/// the characteristic cubic, ascending.
pub fn eig3(m: &CMat) -> [f64; 3] {
    let q = m.trace().re / 3.0;
    let shifted = m - &CMat::scalar(3, c(q, 0.0));
    let p = (shifted.trace_product(&shifted).re / 6.0).sqrt();
    if p < 1e-300 {
        return [q; 3];
    }
    let b = shifted.scale_re(1.0 / p);
    let det = {
        let e = |i, j| b[(i, j)];
        (e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
            + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0)))
        .re
    };
    let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
    let tau = std::f64::consts::TAU;
    let mut v = [
        q + 2.0 * p * phi.cos(),
        q + 2.0 * p * (phi + tau / 3.0).cos(),
        q + 2.0 * p * (phi + 2.0 * tau / 3.0).cos(),
    ];
    v.sort_by(f64::total_cmp);
    v
}

/// Brute-force (min, max) over sections with the closed-form eigenvalues.
pub fn brute_force_extremes(a: &Assemblage) -> (f64, f64) {
    let b = a.bundle();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut choice = vec![0usize; b.n_measurements()];
    loop {
        let mut s = CMat::zeros(a.dim());
        for (x, &k) in choice.iter().enumerate() {
            s += a.effect(b.fibre(x)[k]);
        }
        let (l, h) = match a.dim() {
            2 => {
                let e = eig2(&s);
                (e[0], e[1])
            }
            3 => {
                let e = eig3(&s);
                (e[0], e[2])
            }
            d => panic!("no closed-form eigenvalues for dimension {d}"),
        };
        lo = lo.min(l);
        hi = hi.max(h);
        let mut x = 0;
        loop {
            if x == choice.len() {
                return (lo, hi);
            }
            choice[x] += 1;
            if choice[x] < b.fibre(x).len() {
                break;
            }
            choice[x] = 0;
            x += 1;
        }
    }
}
