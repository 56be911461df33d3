use std::collections::HashMap;

use super::{matrix_key, FiniteMatrixGroup, MatKey};
use crate::error::{Error, Result};
use crate::numerics::CMat;
use crate::par::{map_indices, Execution};

const EXHAUSTIVE_HOM_CHECK: usize = 1000;

/// A permutation action of a group on `0..n_points`, stored as a |G|×n table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermAction {
    n_points: usize,
    images: Vec<u32>,
}

impl PermAction {
    /// Validates that every row is a permutation, the identity acts trivially
    /// and the table respects the group law.
    pub fn new(group: &FiniteMatrixGroup, images: Vec<Vec<usize>>) -> Result<Self> {
        if images.len() != group.order() {
            return Err(Error::InvalidAction(format!(
                "{} rows for a group of order {}",
                images.len(),
                group.order()
            )));
        }
        let n_points = images.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(images.len() * n_points);
        for (g, row) in images.iter().enumerate() {
            if row.len() != n_points {
                return Err(Error::InvalidAction(format!("row {g} has the wrong length")));
            }
            let mut seen = vec![false; n_points];
            for &x in row {
                if x >= n_points || std::mem::replace(&mut seen[x], true) {
                    return Err(Error::InvalidAction(format!("row {g} is not a permutation")));
                }
            }
            flat.extend(row.iter().map(|&x| x as u32));
        }
        let act = PermAction { n_points, images: flat };
        act.check_homomorphism(group)?;
        Ok(act)
    }

    fn check_homomorphism(&self, group: &FiniteMatrixGroup) -> Result<()> {
        let id = group.identity_index();
        if (0..self.n_points).any(|x| self.apply(id, x) != x) {
            return Err(Error::InvalidAction("identity acts non-trivially".into()));
        }
        let n = group.order();
        // Checking g·s for every g and every generator s is equivalent to the
        // full pairwise check because the generators generate.
        let right: Vec<usize> = if n <= EXHAUSTIVE_HOM_CHECK {
            (0..n).collect()
        } else {
            group.generator_indices().to_vec()
        };
        if n <= EXHAUSTIVE_HOM_CHECK {
            group.mult_table();
        }
        for g in 0..n {
            for &h in &right {
                let gh = group.mul(g, h);
                for x in 0..self.n_points {
                    if self.apply(gh, x) != self.apply(g, self.apply(h, x)) {
                        return Err(Error::InvalidAction(format!(
                            "action of {g}*{h} differs from composition"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Action by conjugation, g(p) = U_g p U_g†, on a set of matrices that the
    /// group must leave invariant.
    pub fn by_conjugation(group: &FiniteMatrixGroup, points: &[CMat]) -> Result<Self> {
        let index: HashMap<MatKey, usize> =
            points.iter().enumerate().map(|(i, p)| (matrix_key(p), i)).collect();
        let find = |m: &CMat| -> Option<usize> {
            if let Some(&i) = index.get(&matrix_key(m)) {
                return Some(i);
            }
            points.iter().position(|p| p.max_abs_diff(m) < 1e-7)
        };
        let rows = map_indices(group.order(), Execution::Parallel, |g| {
            points
                .iter()
                .map(|p| find(&group.conjugate(g, p)))
                .collect::<Option<Vec<usize>>>()
        });
        let images = rows
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidAction("point set is not invariant under conjugation".into()))?;
        Self::new(group, images)
    }

    /// The trivial action on `n_points` points.
    pub fn trivial(group: &FiniteMatrixGroup, n_points: usize) -> Self {
        let row: Vec<u32> = (0..n_points as u32).collect();
        PermAction { n_points, images: row.repeat(group.order()) }
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn group_order(&self) -> usize {
        self.images.len().checked_div(self.n_points).unwrap_or(0)
    }

    #[inline]
    pub fn apply(&self, g: usize, x: usize) -> usize {
        self.images[g * self.n_points + x] as usize
    }

    pub fn row(&self, g: usize) -> Vec<usize> {
        (0..self.n_points).map(|x| self.apply(g, x)).collect()
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        (0..self.group_order()).map(|g| self.row(g)).collect()
    }

    pub fn stabilizer(&self, point: usize) -> Vec<usize> {
        (0..self.group_order()).filter(|&g| self.apply(g, point) == point).collect()
    }

    pub fn orbit(&self, point: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n_points];
        for g in 0..self.group_order() {
            seen[self.apply(g, point)] = true;
        }
        (0..self.n_points).filter(|&x| seen[x]).collect()
    }

    /// Orbits sorted by least element, each sorted ascending.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut label = vec![usize::MAX; self.n_points];
        let mut out = Vec::new();
        for x in 0..self.n_points {
            if label[x] != usize::MAX {
                continue;
            }
            let orb = self.orbit(x);
            for &y in &orb {
                label[y] = out.len();
            }
            out.push(orb);
        }
        out
    }

    pub fn is_transitive(&self) -> bool {
        self.n_points > 0 && self.orbits().len() == 1
    }

    /// Some g with g(from) = to.
    pub fn transporter(&self, from: usize, to: usize) -> Option<usize> {
        (0..self.group_order()).find(|&g| self.apply(g, from) == to)
    }
}
