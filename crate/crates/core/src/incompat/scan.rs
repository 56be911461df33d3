//! Section statistics λ = max_s maxEig(Σ_x A_{s(x)}) and
//! μ = min_s minEig(Σ_x A_{s(x)}), by exhaustive scan or greedy search.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::bundle::{Assemblage, Section, DEFAULT_SECTION_CAP};
use crate::error::Result;
use crate::numerics::{extreme_eigenvalues, CMat};
use crate::par::{chunk_ranges, default_chunks, map_ranges, Execution};

/// Ties closer than this keep the earlier candidate in greedy search.
pub const GREEDY_TIE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extreme {
    /// Largest top eigenvalue.
    Max,
    /// Smallest bottom eigenvalue.
    Min,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMethod {
    Exhaustive,
    Greedy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundDirection {
    Exact,
    LowerBound,
    UpperBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionStatistic {
    pub value: f64,
    pub section: Section,
    pub method: ScanMethod,
    pub bound: BoundDirection,
}

impl Extreme {
    fn pick(self, (lo, hi): (f64, f64)) -> f64 {
        match self {
            Extreme::Max => hi,
            Extreme::Min => lo,
        }
    }

    fn better(self, candidate: f64, incumbent: f64) -> bool {
        match self {
            Extreme::Max => candidate > incumbent,
            Extreme::Min => candidate < incumbent,
        }
    }

    fn worst(self) -> f64 {
        match self {
            Extreme::Max => f64::NEG_INFINITY,
            Extreme::Min => f64::INFINITY,
        }
    }

    fn greedy_bound(self) -> BoundDirection {
        match self {
            Extreme::Max => BoundDirection::LowerBound,
            Extreme::Min => BoundDirection::UpperBound,
        }
    }
}

fn add_into(dst: &mut CMat, a: &CMat, b: &CMat) {
    for ((d, x), y) in dst.entries_mut().iter_mut().zip(a.entries()).zip(b.entries()) {
        *d = x + y;
    }
}

/// Best (value, local index) over the sections with lexicographic index in
/// `range`. Prefix sums are only recomputed from the first changed digit.
fn scan_range(fibres: &[Vec<CMat>], dim: usize, ext: Extreme, range: Range<u64>) -> (f64, u64) {
    let m = fibres.len();
    let mut digits = vec![0usize; m];
    let mut rest = range.start;
    for x in (0..m).rev() {
        let k = fibres[x].len() as u64;
        digits[x] = (rest % k) as usize;
        rest /= k;
    }
    let mut prefix = vec![CMat::zeros(dim); m + 1];
    let mut from = 0;
    let mut best = (ext.worst(), range.start);
    for idx in range {
        for k in from..m {
            let (lo, hi) = prefix.split_at_mut(k + 1);
            add_into(&mut hi[0], &lo[k], &fibres[k][digits[k]]);
        }
        let v = ext.pick(extreme_eigenvalues(&prefix[m]));
        if ext.better(v, best.0) {
            best = (v, idx);
        }
        let mut x = m;
        while x > 0 {
            x -= 1;
            digits[x] += 1;
            if digits[x] < fibres[x].len() {
                break;
            }
            digits[x] = 0;
        }
        from = x;
    }
    best
}

/// Exhaustive extreme over all sections of arbitrary per-fibre operators.
/// Returns the value and the lexicographic index of the first optimiser;
/// the result does not depend on `exec`.
pub fn extreme_over_sections(
    fibres: &[Vec<CMat>],
    ext: Extreme,
    cap: u128,
    exec: Execution,
) -> Result<(f64, u64)> {
    let sizes: Vec<usize> = fibres.iter().map(Vec::len).collect();
    let total = crate::bundle::OutcomeBundle::from_fibre_sizes(&sizes)?.check_section_cap(cap)?;
    let dim = fibres[0][0].dim();
    let ranges = chunk_ranges(total, default_chunks());
    let parts = map_ranges(&ranges, exec, |r| scan_range(fibres, dim, ext, r));
    let mut best = (ext.worst(), 0);
    for p in parts {
        if ext.better(p.0, best.0) {
            best = p;
        }
    }
    Ok(best)
}

fn exhaustive(a: &Assemblage, ext: Extreme, cap: u128, exec: Execution) -> Result<SectionStatistic> {
    let (value, idx) = extreme_over_sections(&a.measurements(), ext, cap, exec)?;
    Ok(SectionStatistic {
        value,
        section: a.bundle().section_at(idx),
        method: ScanMethod::Exhaustive,
        bound: BoundDirection::Exact,
    })
}

pub fn lambda_exhaustive(a: &Assemblage) -> Result<SectionStatistic> {
    exhaustive(a, Extreme::Max, DEFAULT_SECTION_CAP, Execution::default())
}

pub fn mu_exhaustive(a: &Assemblage) -> Result<SectionStatistic> {
    exhaustive(a, Extreme::Min, DEFAULT_SECTION_CAP, Execution::default())
}

pub fn lambda_exhaustive_with(a: &Assemblage, cap: u128, exec: Execution) -> Result<SectionStatistic> {
    exhaustive(a, Extreme::Max, cap, exec)
}

pub fn mu_exhaustive_with(a: &Assemblage, cap: u128, exec: Execution) -> Result<SectionStatistic> {
    exhaustive(a, Extreme::Min, cap, exec)
}

/// One greedy run: starting from outcome `start` of measurement 0, keep
/// adding the (measurement, outcome) pair that improves the running extreme
/// most, lowest index first on ties.
fn greedy_from(a: &Assemblage, ext: Extreme, start: usize) -> (f64, Vec<usize>) {
    let b = a.bundle();
    let m = b.n_measurements();
    let mut choice = vec![usize::MAX; m];
    choice[0] = start;
    let mut sum = a.effect(start).clone();
    let mut value = ext.pick(extreme_eigenvalues(&sum));
    let mut trial = CMat::zeros(a.dim());
    for _ in 1..m {
        let mut best: Option<(f64, usize, usize)> = None;
        for (x, fibre) in b.fibres().iter().enumerate() {
            if choice[x] != usize::MAX {
                continue;
            }
            for &z in fibre {
                add_into(&mut trial, &sum, a.effect(z));
                let v = ext.pick(extreme_eigenvalues(&trial));
                let wins = match best {
                    None => true,
                    Some((bv, _, _)) => match ext {
                        Extreme::Max => v > bv + GREEDY_TIE_TOL,
                        Extreme::Min => v < bv - GREEDY_TIE_TOL,
                    },
                };
                if wins {
                    best = Some((v, x, z));
                }
            }
        }
        let (v, x, z) = best.expect("an unassigned measurement remains");
        choice[x] = z;
        sum += a.effect(z);
        value = v;
    }
    (value, choice)
}

fn greedy(a: &Assemblage, ext: Extreme) -> SectionStatistic {
    let mut best: Option<(f64, Vec<usize>)> = None;
    for &start in a.bundle().fibre(0) {
        let run = greedy_from(a, ext, start);
        let wins = match &best {
            None => true,
            Some((bv, _)) => match ext {
                Extreme::Max => run.0 > bv + GREEDY_TIE_TOL,
                Extreme::Min => run.0 < bv - GREEDY_TIE_TOL,
            },
        };
        if wins {
            best = Some(run);
        }
    }
    let (value, choice) = best.expect("fibres are non-empty");
    SectionStatistic { value, section: Section { choice }, method: ScanMethod::Greedy, bound: ext.greedy_bound() }
}

/// Greedy lower bound on λ.
pub fn lambda_greedy(a: &Assemblage) -> SectionStatistic {
    greedy(a, Extreme::Max)
}

/// Greedy upper bound on μ.
pub fn mu_greedy(a: &Assemblage) -> SectionStatistic {
    greedy(a, Extreme::Min)
}
