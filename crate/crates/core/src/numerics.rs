//! Dense complex matrices and the small Hermitian eigensolver everything else
//! sits on.
//!
//! Dimensions in this crate stay below 64, so a row-major `Vec<Complex64>` and
//! cyclic complex Jacobi rotations are enough. The eigensolver returns an
//! orthonormal eigenbasis as well as the spectrum because the commutant solve
//! and the joint diagonalisation of displacement families need the vectors.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default Hermiticity tolerance; downstream tolerances are derived from it.
pub const HERMITIAN_TOL: f64 = 1e-9;

const MAX_SWEEPS: usize = 64;

pub const fn c(re: f64, im: f64) -> C64 {
    Complex64::new(re, im)
}

#[derive(Clone, PartialEq)]
pub struct CMat {
    dim: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl CMat {
    pub fn zeros(dim: usize) -> Self {
        CMat { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, C64::new(1.0, 0.0))
    }

    pub fn scalar(dim: usize, z: C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = z;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        CMat { dim, data }
    }

    /// Builds a matrix from row-major entries. Fails on a non-square length or
    /// non-finite entries.
    pub fn from_entries(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: data.len() });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvariantViolation("non-finite matrix entry".into()));
        }
        Ok(CMat { dim, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::from_entries(dim, data)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> =
            rows.iter().map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn diag(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// |v⟩⟨v| for a (not necessarily normalised) vector.
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn entries_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, z: C64) -> Self {
        CMat { dim: self.dim, data: self.data.iter().map(|&x| x * z).collect() }
    }

    pub fn scale_re(&self, x: f64) -> Self {
        CMat { dim: self.dim, data: self.data.iter().map(|&e| e * x).collect() }
    }

    /// `self += z * other`.
    pub fn add_scaled(&mut self, z: C64, other: &CMat) {
        assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += z * b;
        }
    }

    /// Tr(self · other) without forming the product.
    pub fn trace_product(&self, other: &CMat) -> C64 {
        let n = self.dim;
        let mut s = C64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                s += self.data[i * n + k] * other.data[k * n + i];
            }
        }
        s
    }

    /// Frobenius inner product Tr(self† other).
    pub fn inner(&self, other: &CMat) -> C64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn unitarity_defect(&self) -> f64 {
        (&self.adjoint() * self).max_abs_diff(&CMat::identity(self.dim))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// (m + m†)/2.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// U · self · U†.
    pub fn conjugate_by(&self, u: &CMat) -> Self {
        &(u * self) * &u.adjoint()
    }

    pub fn kron(&self, other: &CMat) -> Self {
        let (n, m) = (self.dim, other.dim);
        Self::from_fn(n * m, |i, j| self[(i / m, j / m)] * other[(i % m, j % m)])
    }

    pub fn commutator(&self, other: &CMat) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl<'a> Mul<&'a CMat> for &'a CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                let dst = &mut out[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        CMat { dim: n, data: out }
    }
}

impl<'a> Add<&'a CMat> for &'a CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        assert_eq!(self.dim, rhs.dim);
        CMat { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl<'a> Sub<&'a CMat> for &'a CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        assert_eq!(self.dim, rhs.dim);
        CMat { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &CMat {
    type Output = CMat;
    fn neg(self) -> CMat {
        CMat { dim: self.dim, data: self.data.iter().map(|a| -a).collect() }
    }
}

impl AddAssign<&CMat> for CMat {
    fn add_assign(&mut self, rhs: &CMat) {
        assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&CMat> for CMat {
    fn sub_assign(&mut self, rhs: &CMat) {
        assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

/// Pauli matrices σ_x, σ_y, σ_z.
pub fn pauli() -> [CMat; 3] {
    let o = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [
        CMat::from_rows(&[vec![o, one], vec![one, o]]).unwrap(),
        CMat::from_rows(&[vec![o, -i], vec![i, o]]).unwrap(),
        CMat::from_rows(&[vec![one, o], vec![o, -one]]).unwrap(),
    ]
}

/// (1 + n·σ)/2 for a Bloch vector n (unit length gives a rank-one projector).
pub fn bloch_projector(n: [f64; 3]) -> CMat {
    let [sx, sy, sz] = pauli();
    let mut m = CMat::identity(2);
    m.add_scaled(c(n[0], 0.0), &sx);
    m.add_scaled(c(n[1], 0.0), &sy);
    m.add_scaled(c(n[2], 0.0), &sz);
    m.scale_re(0.5)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Max-norm of V·diag(λ)·V† − m.
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: CMat,
}

impl HermitianEigen {
    pub fn reconstruct(&self, f: impl Fn(f64) -> f64) -> CMat {
        let n = self.values.len();
        let v = &self.vectors;
        let mut out = CMat::zeros(n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out
    }
}

fn check_hermitian(m: &CMat, tol: f64) -> Result<()> {
    let defect = m.hermiticity_defect();
    if defect > tol || !defect.is_finite() {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// Cyclic complex Jacobi on a Hermitian matrix stored row-major in `a`.
/// Accumulates the rotations into `v` when provided. On return the diagonal of
/// `a` holds the (unsorted) eigenvalues.
fn jacobi(a: &mut [C64], n: usize, mut v: Option<&mut [C64]>) -> Result<()> {
    let norm2: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let threshold = 1e-30 * norm2;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q].norm_sqr();
            }
        }
        if off <= threshold || off == 0.0 {
            return Ok(());
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r == 0.0 || r * r <= threshold * 1e-4 {
                    continue;
                }
                let e = apq / r;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                // J = diag(1, conj(e)) · [[c, s], [-s, c]] on the (p, q) plane.
                let ec = e.conj();
                let jpp = C64::new(cs, 0.0);
                let jpq = C64::new(sn, 0.0);
                let jqp = ec * (-sn);
                let jqq = ec * cs;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * jpp + akq * jqp;
                    a[k * n + q] = akp * jpq + akq * jqq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[q * n + k] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[p * n + q] = C64::new(0.0, 0.0);
                a[q * n + p] = C64::new(0.0, 0.0);
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;
                if let Some(v) = v.as_deref_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = vkp * jpp + vkq * jqp;
                        v[k * n + q] = vkp * jpq + vkq * jqq;
                    }
                }
            }
        }
    }
    Err(Error::NoConvergence(MAX_SWEEPS))
}

/// Full eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(m: &CMat, tol: f64) -> Result<HermitianEigen> {
    check_hermitian(m, tol)?;
    let n = m.dim();
    let mut a = m.hermitian_part().data;
    let mut v = CMat::identity(n).data;
    jacobi(&mut a, n, Some(&mut v))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let vectors = CMat::from_fn(n, |i, k| v[i * n + order[k]]);
    Ok(HermitianEigen { values, vectors })
}

pub fn hermitian_spectrum(m: &CMat, tol: f64) -> Result<Spectrum> {
    let eig = eigh(m, tol)?;
    let residual = eig.reconstruct(|x| x).max_abs_diff(m);
    Ok(Spectrum { eigenvalues: eig.values, residual })
}

/// Eigenvalues only, ascending. Skips the Hermiticity check; callers in the
/// hot section scans build their sums from validated effects.
pub fn eigenvalues_unchecked(m: &CMat) -> Vec<f64> {
    let n = m.dim();
    if n == 1 {
        return vec![m[(0, 0)].re];
    }
    if n == 2 {
        let (lo, hi) = extreme_2x2(m.entries());
        return vec![lo, hi];
    }
    let mut a = m.data.clone();
    // Non-convergence cannot happen for finite Hermitian input at these sizes;
    // fall back to the partially reduced diagonal if it ever does.
    let _ = jacobi(&mut a, n, None);
    let mut vals: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    vals.sort_by(f64::total_cmp);
    vals
}

fn extreme_2x2(e: &[C64]) -> (f64, f64) {
    let a = e[0].re;
    let d = e[3].re;
    let b = (e[1] + e[2].conj()) * 0.5;
    let mean = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    (mean - r, mean + r)
}

/// (min, max) eigenvalue without the Hermiticity check.
pub fn extreme_eigenvalues(m: &CMat) -> (f64, f64) {
    if m.dim() == 2 {
        return extreme_2x2(m.entries());
    }
    let v = eigenvalues_unchecked(m);
    (v[0], v[v.len() - 1])
}

pub fn max_eig(m: &CMat) -> Result<f64> {
    check_hermitian(m, HERMITIAN_TOL)?;
    Ok(extreme_eigenvalues(m).1)
}

pub fn min_eig(m: &CMat) -> Result<f64> {
    check_hermitian(m, HERMITIAN_TOL)?;
    Ok(extreme_eigenvalues(m).0)
}

/// Nearest positive-semidefinite matrix in Frobenius norm (negative
/// eigenvalues clipped to zero).
pub fn project_psd(m: &CMat) -> Result<CMat> {
    let eig = eigh(m, HERMITIAN_TOL)?;
    if eig.values[0] >= 0.0 {
        return Ok(m.hermitian_part());
    }
    Ok(eig.reconstruct(|x| x.max(0.0)).hermitian_part())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProjectionTest {
    pub is_projection: bool,
    pub rank: usize,
}

pub fn is_projection(m: &CMat, tol: f64) -> ProjectionTest {
    let tr = m.trace().re;
    let rank = if tr.is_finite() && tr > 0.0 { tr.round() as usize } else { 0 };
    let ok = m.is_hermitian(tol) && (m * m).max_abs_diff(m) <= tol;
    ProjectionTest { is_projection: ok, rank }
}

/// Groups sorted eigenvalues into clusters closer than `tol`; returns index
/// ranges into the ascending value list.
pub fn eigen_clusters(values: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tol {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Orthogonal projector onto the span of the given eigenvector columns.
pub fn projector_onto_columns(vectors: &CMat, cols: std::ops::Range<usize>) -> CMat {
    let n = vectors.dim();
    let mut p = CMat::zeros(n);
    for k in cols {
        for i in 0..n {
            let vik = vectors[(i, k)];
            for j in 0..n {
                p[(i, j)] += vik * vectors[(j, k)].conj();
            }
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn octahedron_section_sum() -> CMat {
        let mut s = bloch_projector([1.0, 0.0, 0.0]);
        s += &bloch_projector([0.0, 1.0, 0.0]);
        s += &bloch_projector([0.0, 0.0, 1.0]);
        s
    }

    #[test]
    fn identity_spectrum() {
        let s = hermitian_spectrum(&CMat::identity(3), 1e-9).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 1.0, 1.0]);
        assert!(s.residual < 1e-15);
    }

    #[test]
    fn projector_spectrum() {
        let p = bloch_projector([0.0, 0.0, 1.0]);
        let s = hermitian_spectrum(&p, 1e-9).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.eigenvalues[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn octahedron_section_eigenvalues() {
        // (3/2)1 + (1/2)(σx+σy+σz) has eigenvalues 3/2 ± √3/2.
        let m = octahedron_section_sum();
        let h = 3f64.sqrt() / 2.0;
        let s = hermitian_spectrum(&m, 1e-9).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0], 1.5 - h, epsilon = 1e-12);
        assert_abs_diff_eq!(s.eigenvalues[1], 1.5 + h, epsilon = 1e-12);
        assert_abs_diff_eq!(max_eig(&m).unwrap(), 1.5 + h, epsilon = 1e-12);
        assert_abs_diff_eq!(min_eig(&m).unwrap(), 1.5 - h, epsilon = 1e-12);
    }

    #[test]
    fn jacobi_matches_closed_form_on_embedded_2x2() {
        // Embed the octahedron sum into a 3x3 block so the Jacobi path runs.
        let m2 = octahedron_section_sum();
        let mut m = CMat::zeros(3);
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = m2[(i, j)];
            }
        }
        m[(2, 2)] = c(0.25, 0.0);
        let v = eigenvalues_unchecked(&m);
        let h = 3f64.sqrt() / 2.0;
        assert_abs_diff_eq!(v[0], 0.25, epsilon = 1e-13);
        assert_abs_diff_eq!(v[1], 1.5 - h, epsilon = 1e-13);
        assert_abs_diff_eq!(v[2], 1.5 + h, epsilon = 1e-13);
    }

    #[test]
    fn zero_and_rank_one() {
        let z = CMat::zeros(2);
        assert_eq!(max_eig(&z).unwrap(), 0.0);
        assert_eq!(min_eig(&z).unwrap(), 0.0);
        let p = bloch_projector([0.6, 0.0, 0.8]);
        assert_abs_diff_eq!(max_eig(&p).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(min_eig(&p).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn not_hermitian_is_rejected() {
        let m = CMat::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]])
            .unwrap();
        assert!(matches!(hermitian_spectrum(&m, 1e-9), Err(Error::NotHermitian(_))));
        assert!(matches!(max_eig(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn psd_projection_examples() {
        let p = bloch_projector([0.0, 1.0, 0.0]);
        assert!(project_psd(&p).unwrap().max_abs_diff(&p) < 1e-12);
        let d = CMat::diag(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        let pd = project_psd(&d).unwrap();
        assert!(pd.max_abs_diff(&CMat::diag(&[c(1.0, 0.0), c(0.0, 0.0)])) < 1e-12);
        let neg = CMat::scalar(3, c(-1.0, 0.0));
        assert!(project_psd(&neg).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn projection_examples() {
        assert_eq!(is_projection(&CMat::identity(3), 1e-9), ProjectionTest { is_projection: true, rank: 3 });
        let px = bloch_projector([1.0, 0.0, 0.0]);
        assert_eq!(is_projection(&px, 1e-9), ProjectionTest { is_projection: true, rank: 1 });
        assert!(!is_projection(&CMat::identity(2).scale_re(0.5), 1e-9).is_projection);
    }

    #[test]
    fn clusters() {
        let r = eigen_clusters(&[0.0, 1e-12, 1.0, 2.0, 2.0 + 1e-13], 1e-9);
        assert_eq!(r, vec![0..2, 2..3, 3..5]);
    }

    #[test]
    fn kron_of_paulis() {
        let [sx, _, sz] = pauli();
        let k = sx.kron(&sz);
        assert_eq!(k.dim(), 4);
        assert_eq!(k[(0, 2)], c(1.0, 0.0));
        assert_eq!(k[(1, 3)], c(-1.0, 0.0));
    }
}
