//! Finite matrix groups closed from unitary generators.
//!
//! Elements are identified by a quantised key (entries rounded to 1e-8),
//! confirmed by a tolerance comparison. In `UpToPhase` mode each matrix is
//! first divided by the phase of its first non-negligible entry, which closes
//! projective representations such as the Clifford-type MUB symmetries.

mod action;
mod commutant;
mod subgroups;

pub use action::PermAction;
pub use commutant::{commutant_basis, count_irreducible_subreps, isotypic_projections};
pub use subgroups::{
    enumerate_subgroup_classes, subgroup_closure, BitSet, SubgroupClass,
    DEFAULT_SUBGROUP_CAP,
};

use std::collections::HashMap;
use std::collections::VecDeque;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{CMat, C64};
use crate::par::{map_indices, Execution};

const KEY_QUANTUM: f64 = 1e-8;
const CONFIRM_TOL: f64 = 1e-6;
const UNITARY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ElementEquality {
    #[default]
    Exact,
    UpToPhase,
}

pub type MatKey = Vec<i64>;

/// Quantised lookup key for a matrix (entries rounded to 1e-8).
pub fn matrix_key(m: &CMat) -> MatKey {
    let mut k = Vec::with_capacity(2 * m.entries().len());
    for z in m.entries() {
        k.push((z.re / KEY_QUANTUM).round() as i64);
        k.push((z.im / KEY_QUANTUM).round() as i64);
    }
    k
}

/// Removes the global phase: divides by the phase of the first entry with
/// modulus above 1e-3.
pub fn phase_normalize(m: &CMat) -> CMat {
    match m.entries().iter().find(|z| z.norm() > 1e-3) {
        Some(z) => m.scale(z.conj() / z.norm()),
        None => m.clone(),
    }
}

pub struct FiniteMatrixGroup {
    dim: usize,
    elements: Vec<CMat>,
    index: HashMap<MatKey, usize>,
    inverses: Vec<usize>,
    generators: Vec<usize>,
    equality: ElementEquality,
    mult: OnceLock<Vec<u32>>,
    name: String,
}

impl std::fmt::Debug for FiniteMatrixGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FiniteMatrixGroup")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("order", &self.elements.len())
            .field("equality", &self.equality)
            .finish()
    }
}

impl FiniteMatrixGroup {
    /// Breadth-first closure of `gens` under products.
    pub fn close(
        dim: usize,
        gens: &[CMat],
        max_order: usize,
        equality: ElementEquality,
    ) -> Result<Self> {
        for g in gens {
            if g.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: g.dim() });
            }
            let defect = g.unitarity_defect();
            if defect > UNITARY_TOL {
                return Err(Error::NotUnitary(defect));
            }
        }
        let canon = |m: &CMat| match equality {
            ElementEquality::Exact => m.clone(),
            ElementEquality::UpToPhase => phase_normalize(m),
        };
        let gens: Vec<CMat> = gens.iter().map(canon).collect();
        let mut elements = vec![CMat::identity(dim)];
        let mut index = HashMap::new();
        index.insert(matrix_key(&elements[0]), 0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for g in &gens {
                let p = canon(&(g * &elements[i]));
                let key = matrix_key(&p);
                if let Some(&j) = index.get(&key) {
                    let err = elements[j].max_abs_diff(&p);
                    if err > CONFIRM_TOL {
                        return Err(Error::InvariantViolation(format!(
                            "quantised key collision with defect {err:e}"
                        )));
                    }
                    continue;
                }
                if elements.len() >= max_order {
                    return Err(Error::OrderExceeded(max_order));
                }
                index.insert(key, elements.len());
                queue.push_back(elements.len());
                elements.push(p);
            }
        }
        let mut group = FiniteMatrixGroup {
            dim,
            elements,
            index,
            inverses: Vec::new(),
            generators: Vec::new(),
            equality,
            mult: OnceLock::new(),
            name: String::new(),
        };
        group.generators = gens
            .iter()
            .map(|g| group.lookup(g).expect("generator is in its own closure"))
            .collect();
        group.inverses = (0..group.order())
            .map(|i| {
                group
                    .lookup(&group.elements[i].adjoint())
                    .ok_or_else(|| Error::InvariantViolation("inverse missing from closure".into()))
            })
            .collect::<Result<_>>()?;
        Ok(group)
    }

    /// The trivial group {1} in dimension `dim`.
    pub fn trivial(dim: usize) -> Self {
        Self::close(dim, &[], 1, ElementEquality::Exact).expect("trivial closure")
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn equality(&self) -> ElementEquality {
        self.equality
    }

    pub fn identity_index(&self) -> usize {
        0
    }

    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &CMat {
        &self.elements[i]
    }

    pub fn generator_indices(&self) -> &[usize] {
        &self.generators
    }

    pub fn inv(&self, i: usize) -> usize {
        self.inverses[i]
    }

    /// Index of `m` in the group, if present.
    pub fn lookup(&self, m: &CMat) -> Option<usize> {
        let m = match self.equality {
            ElementEquality::Exact => m.clone(),
            ElementEquality::UpToPhase => phase_normalize(m),
        };
        let j = *self.index.get(&matrix_key(&m))?;
        (self.elements[j].max_abs_diff(&m) <= CONFIRM_TOL).then_some(j)
    }

    fn mul_direct(&self, i: usize, j: usize) -> usize {
        self.lookup(&(&self.elements[i] * &self.elements[j]))
            .expect("closed group contains every product")
    }

    /// Index of element_i · element_j.
    pub fn mul(&self, i: usize, j: usize) -> usize {
        match self.mult.get() {
            Some(t) => t[i * self.order() + j] as usize,
            None => self.mul_direct(i, j),
        }
    }

    /// The full |G|×|G| Cayley table, built on first use.
    pub fn mult_table(&self) -> &[u32] {
        self.mult.get_or_init(|| {
            let n = self.order();
            let rows = map_indices(n, Execution::Parallel, |i| {
                (0..n).map(|j| self.mul_direct(i, j) as u32).collect::<Vec<u32>>()
            });
            rows.concat()
        })
    }

    pub fn element_order(&self, i: usize) -> usize {
        let mut k = 1;
        let mut x = i;
        while x != 0 {
            x = self.mul(x, i);
            k += 1;
        }
        k
    }

    /// U_g · m · U_g†.
    pub fn conjugate(&self, g: usize, m: &CMat) -> CMat {
        m.conjugate_by(&self.elements[g])
    }

    /// Max |U_g U_h − U_gh| over pairs in `sub`; zero for an ordinary
    /// representation, a phase defect for a projective one.
    pub fn phase_defect_on(&self, sub: &[usize]) -> f64 {
        let mut worst = 0.0f64;
        for &g in sub {
            for &h in sub {
                let prod = &self.elements[g] * &self.elements[h];
                worst = worst.max(prod.max_abs_diff(&self.elements[self.mul(g, h)]));
            }
        }
        worst
    }
}

/// Dense matrix from separate real and imaginary row arrays.
pub fn matrix_from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<CMat> {
    let dim = re.len();
    if im.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: im.len() });
    }
    let mut rows = Vec::with_capacity(dim);
    for (r, i) in re.iter().zip(im) {
        if r.len() != dim || i.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: r.len().min(i.len()) });
        }
        rows.push(r.iter().zip(i).map(|(&a, &b)| C64::new(a, b)).collect());
    }
    CMat::from_rows(&rows)
}
