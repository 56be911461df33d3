//! Conjugacy classes of subgroups by cyclic extension.
//!
//! Starting from the trivial subgroup, every class representative H is
//! extended by each element g outside it; ⟨H, g⟩ is new unless one of its
//! conjugates has been seen. Elements n·g·h·n⁻¹ (n in the normaliser of H,
//! h in H) give conjugate extensions, so they are skipped once g is tried.

use std::collections::HashSet;

use super::FiniteMatrixGroup;
use crate::error::{Error, Result};

pub const DEFAULT_SUBGROUP_CAP: usize = 5000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(n: usize) -> Self {
        BitSet { words: vec![0; n.div_ceil(64)] }
    }

    pub fn from_indices(n: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut b = Self::new(n);
        for i in idx {
            b.insert(i);
        }
        b
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| k * 64 + b)
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgroupClass {
    /// Lexicographically least conjugate, sorted element indices.
    pub representative: Vec<usize>,
    pub order: usize,
    /// Number of distinct conjugates.
    pub class_size: usize,
    /// Generators of the representative.
    pub generators: Vec<usize>,
}

/// The subgroup generated by `gens`, as a bit set over group indices.
pub fn subgroup_closure(group: &FiniteMatrixGroup, gens: &[usize]) -> BitSet {
    let n = group.order();
    let mut set = BitSet::new(n);
    let id = group.identity_index();
    set.insert(id);
    let mut stack = vec![id];
    while let Some(x) = stack.pop() {
        for &g in gens {
            let y = group.mul(x, g);
            if !set.contains(y) {
                set.insert(y);
                stack.push(y);
            }
        }
    }
    set
}

fn conjugate_set(group: &FiniteMatrixGroup, x: usize, h: &BitSet) -> BitSet {
    let n = group.order();
    let xi = group.inv(x);
    BitSet::from_indices(n, h.iter().map(|e| group.mul(group.mul(x, e), xi)))
}

/// One representative per conjugacy class of subgroups, sorted by
/// (order, representative).
pub fn enumerate_subgroup_classes(
    group: &FiniteMatrixGroup,
    cap: usize,
) -> Result<Vec<SubgroupClass>> {
    let n = group.order();
    if n > cap {
        return Err(Error::TooLarge { what: "group order", size: n as u128, cap: cap as u128 });
    }
    group.mult_table();
    let mut seen: HashSet<BitSet> = HashSet::new();
    let mut classes: Vec<(BitSet, SubgroupClass)> = Vec::new();

    let mut add_class = |k: BitSet, gens: Vec<usize>, classes: &mut Vec<(BitSet, SubgroupClass)>| {
        if seen.contains(&k) {
            return;
        }
        let mut conj: Vec<(Vec<usize>, usize)> = Vec::new();
        let mut local: HashSet<BitSet> = HashSet::new();
        for x in 0..n {
            let c = conjugate_set(group, x, &k);
            if local.insert(c.clone()) {
                conj.push((c.to_vec(), x));
            }
        }
        let (rep, x) = conj.iter().min().cloned().expect("at least one conjugate");
        let xi = group.inv(x);
        let gens = gens.iter().map(|&g| group.mul(group.mul(x, g), xi)).collect();
        let order = rep.len();
        let class = SubgroupClass { representative: rep.clone(), order, class_size: local.len(), generators: gens };
        seen.extend(local);
        classes.push((BitSet::from_indices(n, rep), class));
    };

    add_class(BitSet::from_indices(n, [group.identity_index()]), Vec::new(), &mut classes);
    let mut i = 0;
    while i < classes.len() {
        let (h, hclass) = classes[i].clone();
        let normalizer: Vec<usize> =
            (0..n).filter(|&x| conjugate_set(group, x, &h) == h).collect();
        let mut done = h.clone();
        for g in 0..n {
            if done.contains(g) {
                continue;
            }
            for &m in &normalizer {
                let mi = group.inv(m);
                for e in h.iter() {
                    done.insert(group.mul(group.mul(m, group.mul(g, e)), mi));
                }
            }
            let mut gens = hclass.generators.clone();
            gens.push(g);
            let k = subgroup_closure(group, &gens);
            add_class(k, gens, &mut classes);
        }
        i += 1;
    }
    let mut out: Vec<SubgroupClass> = classes.into_iter().map(|(_, c)| c).collect();
    out.sort_by(|a, b| (a.order, &a.representative).cmp(&(b.order, &b.representative)));
    Ok(out)
}
