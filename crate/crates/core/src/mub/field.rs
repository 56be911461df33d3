//! GF(p^n) by table lookup. Elements are integers 0..p^n whose base-p digits
//! are the coefficients of a polynomial in x (constant term first), reduced by
//! the least monic irreducible modulus of degree n.

use crate::error::{Error, Result};

pub const MAX_FIELD_ORDER: usize = 64;

#[derive(Clone, Debug)]
pub struct FiniteField {
    p: u32,
    n: u32,
    q: usize,
    modulus: Vec<u32>,
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    inv: Vec<u32>,
    trace: Vec<u32>,
    dual: Vec<u32>,
}

pub fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|k| k * k <= p).all(|k| !p.is_multiple_of(k))
}

fn digits(mut a: usize, p: u32, n: u32) -> Vec<u32> {
    (0..n)
        .map(|_| {
            let d = (a % p as usize) as u32;
            a /= p as usize;
            d
        })
        .collect()
}

fn encode(c: &[u32], p: u32) -> usize {
    c.iter().rev().fold(0usize, |acc, &d| acc * p as usize + d as usize)
}

/// Remainder of `a` modulo the monic polynomial `m` (coefficients low to high).
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = r.pop().unwrap();
        if lead != 0 {
            let shift = r.len() - dm;
            for (i, &mi) in m[..dm].iter().enumerate() {
                r[shift + i] = (r[shift + i] + p - (lead * mi) % p) % p;
            }
        }
    }
    r
}

fn poly_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut out = vec![0u32; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    out
}

fn is_irreducible(m: &[u32], p: u32) -> bool {
    let n = m.len() - 1;
    for k in 1..=n / 2 {
        for code in 0..(p as usize).pow(k as u32) {
            let mut divisor = digits(code, p, k as u32);
            divisor.push(1);
            if poly_rem(m, &divisor, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

impl FiniteField {
    pub fn new(p: u32, n: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("field degree must be positive".into()));
        }
        let q = (p as u128).checked_pow(n).unwrap_or(u128::MAX);
        if q > MAX_FIELD_ORDER as u128 {
            return Err(Error::TooLarge { what: "field order", size: q, cap: MAX_FIELD_ORDER as u128 });
        }
        let q = q as usize;
        let modulus = (0..q)
            .map(|code| {
                let mut m = digits(code, p, n);
                m.push(1);
                m
            })
            .find(|m| n == 1 || is_irreducible(m, p))
            .expect("an irreducible polynomial of every degree exists");
        let mut add = vec![0u32; q * q];
        let mut mul = vec![0u32; q * q];
        for a in 0..q {
            let da = digits(a, p, n);
            for b in 0..q {
                let db = digits(b, p, n);
                let s: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a * q + b] = encode(&s, p) as u32;
                let mut prod = poly_rem(&poly_mul(&da, &db, p), &modulus, p);
                prod.resize(n as usize, 0);
                mul[a * q + b] = encode(&prod, p) as u32;
            }
        }
        let neg = (0..q).map(|a| (0..q).find(|&b| add[a * q + b] == 0).unwrap() as u32).collect();
        let inv = (0..q)
            .map(|a| if a == 0 { 0 } else { (1..q).find(|&b| mul[a * q + b] == 1).unwrap() as u32 })
            .collect();
        let mut f = FiniteField { p, n, q, modulus, add, mul, neg, inv, trace: Vec::new(), dual: Vec::new() };
        f.trace = (0..q)
            .map(|a| {
                let mut s = 0u32;
                let mut x = a as u32;
                for _ in 0..n {
                    s = f.add(s, x);
                    x = f.pow(x, p as usize);
                }
                assert!(s < p, "trace lands in the prime field");
                s
            })
            .collect();
        f.dual = (0..n as usize)
            .map(|s| {
                (0..q as u32)
                    .find(|&cand| {
                        (0..n as usize).all(|r| f.tr(f.mul(f.basis(r), cand)) == u32::from(r == s))
                    })
                    .expect("the trace form is non-degenerate")
            })
            .collect();
        Ok(f)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    /// Field order q = p^n.
    pub fn order(&self) -> usize {
        self.q
    }

    /// Modulus coefficients, constant term first, monic.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        self.add[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg[b as usize])
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.mul[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        self.neg[a as usize]
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| self.inv[a as usize])
    }

    pub fn pow(&self, a: u32, e: usize) -> u32 {
        (0..e).fold(1, |acc, _| self.mul(acc, a))
    }

    /// The integer k·1 in the field.
    pub fn from_int(&self, k: i64) -> u32 {
        (k.rem_euclid(self.p as i64)) as u32
    }

    /// Field trace into F_p, as an integer 0..p.
    #[inline]
    pub fn tr(&self, a: u32) -> u32 {
        self.trace[a as usize]
    }

    /// Polynomial basis element e_r = x^r.
    pub fn basis(&self, r: usize) -> u32 {
        (self.p as usize).pow(r as u32) as u32
    }

    /// Dual basis element ē_s with tr(e_r ē_s) = δ_rs.
    pub fn dual_basis(&self, s: usize) -> u32 {
        self.dual[s]
    }

    /// Coordinates of a in the basis e_r (its base-p digits).
    pub fn coords(&self, a: u32) -> Vec<u32> {
        (0..self.n as usize).map(|r| self.tr(self.mul(self.dual[r], a))).collect()
    }

    /// Coordinates of a in the dual basis ē_r.
    pub fn dual_coords(&self, a: u32) -> Vec<u32> {
        (0..self.n as usize).map(|r| self.tr(self.mul(self.basis(r), a))).collect()
    }

    pub fn elements(&self) -> std::ops::Range<u32> {
        0..self.q as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_trace_is_identity() {
        let f = FiniteField::new(3, 1).unwrap();
        assert_eq!(f.tr(2), 2);
        assert_eq!(f.mul(2, 2), 1);
    }

    #[test]
    fn f4_trace() {
        let f = FiniteField::new(2, 2).unwrap();
        assert_eq!(f.modulus(), &[1, 1, 1]);
        assert_eq!(f.tr(0), 0);
        assert_eq!(f.tr(1), 0);
        // ω = x is a root of x² + x + 1 and tr(ω) = ω + ω² = 1.
        assert_eq!(f.tr(2), 1);
        assert_eq!(f.add(f.mul(2, 2), 2), 1);
    }

    #[test]
    fn errors() {
        assert_eq!(FiniteField::new(4, 1).unwrap_err(), Error::NotPrime(4));
        assert!(matches!(FiniteField::new(2, 7), Err(Error::TooLarge { .. })));
        assert!(matches!(FiniteField::new(3, 4), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn moduli() {
        assert_eq!(FiniteField::new(3, 2).unwrap().modulus(), &[1, 0, 1]);
        assert_eq!(FiniteField::new(2, 3).unwrap().modulus(), &[1, 1, 0, 1]);
    }

    #[test]
    fn dual_basis_duality() {
        for (p, n) in [(2, 2), (2, 3), (3, 2), (5, 2), (2, 6)] {
            let f = FiniteField::new(p, n).unwrap();
            for r in 0..n as usize {
                for s in 0..n as usize {
                    assert_eq!(f.tr(f.mul(f.basis(r), f.dual_basis(s))), u32::from(r == s));
                }
            }
            for a in f.elements() {
                assert_eq!(f.coords(a), digits(a as usize, p, n));
            }
        }
    }
}
