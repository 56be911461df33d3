//! Outcome bundles, sections, assemblages and their symmetry data.
//!
//! Outcomes are numbered globally; a section picks one outcome per
//! measurement and is stored by those global ids. Sections are enumerated in
//! lexicographic order with measurement 0 most significant, which also gives
//! every section a mixed-radix index used to split scans into ranges.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::{commutant_basis, isotypic_projections, FiniteMatrixGroup, PermAction};
use crate::numerics::{eigenvalues_unchecked, CMat, HERMITIAN_TOL};
use crate::par::{map_indices, Execution};

/// Default cap on |Γ(Ω)| for enumerations.
pub const DEFAULT_SECTION_CAP: u128 = 100_000_000;

/// Sections beyond this count are never materialised as an orbit table.
pub const ORBIT_SECTION_CAP: u128 = 20_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutcomeBundle {
    projection: Vec<usize>,
    fibres: Vec<Vec<usize>>,
}

impl OutcomeBundle {
    /// Contiguous numbering: fibre 0 holds outcomes 0..n0, and so on.
    pub fn from_fibre_sizes(sizes: &[usize]) -> Result<Self> {
        let mut projection = Vec::new();
        for (x, &n) in sizes.iter().enumerate() {
            projection.extend(std::iter::repeat_n(x, n));
        }
        Self::from_projection(projection, sizes.len())
    }

    pub fn from_projection(projection: Vec<usize>, n_measurements: usize) -> Result<Self> {
        let mut fibres = vec![Vec::new(); n_measurements];
        for (z, &x) in projection.iter().enumerate() {
            if x >= n_measurements {
                return Err(Error::InvariantViolation(format!("outcome {z} maps to missing measurement {x}")));
            }
            fibres[x].push(z);
        }
        if let Some(x) = fibres.iter().position(Vec::is_empty) {
            return Err(Error::InvariantViolation(format!("fibre {x} is empty")));
        }
        Ok(OutcomeBundle { projection, fibres })
    }

    pub fn n_outcomes(&self) -> usize {
        self.projection.len()
    }

    pub fn n_measurements(&self) -> usize {
        self.fibres.len()
    }

    pub fn fibre(&self, x: usize) -> &[usize] {
        &self.fibres[x]
    }

    pub fn fibres(&self) -> &[Vec<usize>] {
        &self.fibres
    }

    pub fn measurement_of(&self, z: usize) -> usize {
        self.projection[z]
    }

    pub fn fibre_sizes(&self) -> Vec<usize> {
        self.fibres.iter().map(Vec::len).collect()
    }

    /// |Γ(Ω)| = Π |fibre|, saturating.
    pub fn section_count(&self) -> u128 {
        self.fibres.iter().fold(1u128, |acc, f| acc.saturating_mul(f.len() as u128))
    }

    pub fn check_section_cap(&self, cap: u128) -> Result<u64> {
        let n = self.section_count();
        if n > cap || n > u64::MAX as u128 {
            return Err(Error::TooManySections(n, cap));
        }
        Ok(n as u64)
    }

    /// Mixed-radix decoding of a lexicographic section index.
    pub fn section_at(&self, mut index: u64) -> Section {
        let m = self.n_measurements();
        let mut choice = vec![0; m];
        for x in (0..m).rev() {
            let k = self.fibres[x].len() as u64;
            choice[x] = self.fibres[x][(index % k) as usize];
            index /= k;
        }
        Section { choice }
    }

    pub fn section_index(&self, s: &Section) -> u64 {
        let mut idx = 0u64;
        for (x, &z) in s.choice.iter().enumerate() {
            let pos = self.fibres[x].iter().position(|&w| w == z).expect("section respects fibres");
            idx = idx * self.fibres[x].len() as u64 + pos as u64;
        }
        idx
    }

    /// Lexicographic streaming enumeration of Γ(Ω).
    pub fn sections(&self, cap: u128) -> Result<SectionIter<'_>> {
        self.check_section_cap(cap)?;
        Ok(SectionIter { bundle: self, digits: vec![0; self.n_measurements()], done: false })
    }

    pub fn is_section(&self, s: &Section) -> bool {
        s.choice.len() == self.n_measurements()
            && s.choice.iter().enumerate().all(|(x, &z)| z < self.n_outcomes() && self.projection[z] == x)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, serde::Deserialize)]
pub struct Section {
    /// Global outcome chosen for each measurement.
    pub choice: Vec<usize>,
}

pub struct SectionIter<'a> {
    bundle: &'a OutcomeBundle,
    digits: Vec<usize>,
    done: bool,
}

impl Iterator for SectionIter<'_> {
    type Item = Section;
    fn next(&mut self) -> Option<Section> {
        if self.done {
            return None;
        }
        let fibres = &self.bundle.fibres;
        let out = Section { choice: self.digits.iter().enumerate().map(|(x, &k)| fibres[x][k]).collect() };
        let mut x = self.digits.len();
        loop {
            if x == 0 {
                self.done = true;
                break;
            }
            x -= 1;
            self.digits[x] += 1;
            if self.digits[x] < fibres[x].len() {
                break;
            }
            self.digits[x] = 0;
        }
        Some(out)
    }
}

#[derive(Clone, Debug)]
pub struct Assemblage {
    name: String,
    dim: usize,
    bundle: OutcomeBundle,
    effects: Vec<CMat>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormalizationCheck {
    pub ok: bool,
    pub residual: f64,
}

impl Assemblage {
    /// Validates dimensions, PSD effects and per-fibre normalisation (1e-9).
    pub fn new(name: impl Into<String>, dim: usize, measurements: Vec<Vec<CMat>>) -> Result<Self> {
        let a = Self::new_unchecked(name, dim, measurements)?;
        a.validate(HERMITIAN_TOL)?;
        Ok(a)
    }

    /// Builds the assemblage checking only shapes.
    pub fn new_unchecked(name: impl Into<String>, dim: usize, measurements: Vec<Vec<CMat>>) -> Result<Self> {
        let sizes: Vec<usize> = measurements.iter().map(Vec::len).collect();
        let bundle = OutcomeBundle::from_fibre_sizes(&sizes)?;
        let effects: Vec<CMat> = measurements.into_iter().flatten().collect();
        if let Some(e) = effects.iter().find(|e| e.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: e.dim() });
        }
        Ok(Assemblage { name: name.into(), dim, bundle, effects })
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        for (z, e) in self.effects.iter().enumerate() {
            let h = e.hermiticity_defect();
            if h > tol {
                return Err(Error::InvariantViolation(format!("effect {z} is not Hermitian ({h:e})")));
            }
            let lo = eigenvalues_unchecked(&e.hermitian_part())[0];
            if lo < -tol {
                return Err(Error::InvariantViolation(format!("effect {z} has eigenvalue {lo:e}")));
            }
        }
        let n = self.check_normalization(tol);
        if !n.ok {
            return Err(Error::InvariantViolation(format!("fibre sums deviate from 1 by {:e}", n.residual)));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bundle(&self) -> &OutcomeBundle {
        &self.bundle
    }

    pub fn effects(&self) -> &[CMat] {
        &self.effects
    }

    pub fn effect(&self, z: usize) -> &CMat {
        &self.effects[z]
    }

    pub fn n_outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn n_measurements(&self) -> usize {
        self.bundle.n_measurements()
    }

    pub fn measurements(&self) -> Vec<Vec<CMat>> {
        self.bundle.fibres().iter().map(|f| f.iter().map(|&z| self.effects[z].clone()).collect()).collect()
    }

    /// Σ_{z∈fibre(x)} A_z = 1 for every x.
    pub fn check_normalization(&self, tol: f64) -> NormalizationCheck {
        let id = CMat::identity(self.dim);
        let residual = self
            .bundle
            .fibres()
            .iter()
            .map(|f| {
                let mut s = CMat::zeros(self.dim);
                for &z in f {
                    s += &self.effects[z];
                }
                s.max_abs_diff(&id)
            })
            .fold(0.0, f64::max);
        NormalizationCheck { ok: residual <= tol, residual }
    }

    /// Σ_x A_{s(x)}.
    pub fn section_sum(&self, s: &Section) -> CMat {
        let mut m = CMat::zeros(self.dim);
        for &z in &s.choice {
            m += &self.effects[z];
        }
        m
    }

    /// All effects conjugated by a fixed unitary.
    pub fn conjugated(&self, u: &CMat) -> Self {
        let mut out = self.clone();
        for e in &mut out.effects {
            *e = e.conjugate_by(u).hermitian_part();
        }
        out
    }

    /// Effects with measurements and outcomes within fibres permuted.
    /// `measurement_order[k]` is the old measurement placed at position k;
    /// `outcome_orders[k]` reorders its fibre.
    pub fn relabeled(&self, measurement_order: &[usize], outcome_orders: &[Vec<usize>]) -> Result<Self> {
        let meas = self.measurements();
        let mut out = Vec::with_capacity(meas.len());
        for (k, &x) in measurement_order.iter().enumerate() {
            let fibre = meas.get(x).ok_or_else(|| Error::InvalidArgument("bad measurement index".into()))?;
            out.push(outcome_orders[k].iter().map(|&i| fibre[i].clone()).collect());
        }
        Assemblage::new(self.name.clone(), self.dim, out)
    }
}

#[derive(Clone, Debug)]
pub struct SymmetryData {
    group: Arc<FiniteMatrixGroup>,
    outcome_action: PermAction,
    measurement_action: PermAction,
}

#[derive(Clone, Debug)]
pub struct CovarianceCheck {
    pub ok: bool,
    pub measurement_action: Option<PermAction>,
}

/// g[π(z)] = π[g(z)]: every group element maps fibres onto fibres.
pub fn check_covariance(group: &FiniteMatrixGroup, bundle: &OutcomeBundle, act: &PermAction) -> CovarianceCheck {
    let fail = CovarianceCheck { ok: false, measurement_action: None };
    if act.n_points() != bundle.n_outcomes() || act.group_order() != group.order() {
        return fail;
    }
    let mut rows = Vec::with_capacity(group.order());
    for g in 0..group.order() {
        let mut row = Vec::with_capacity(bundle.n_measurements());
        for f in bundle.fibres() {
            let y = bundle.measurement_of(act.apply(g, f[0]));
            if bundle.fibre(y).len() != f.len() || f.iter().any(|&z| bundle.measurement_of(act.apply(g, z)) != y) {
                return fail;
            }
            row.push(y);
        }
        rows.push(row);
    }
    match PermAction::new(group, rows) {
        Ok(m) => CovarianceCheck { ok: true, measurement_action: Some(m) },
        Err(_) => fail,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SymmetryCheck {
    pub ok: bool,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitRigidity {
    pub representative: usize,
    pub orbit_size: usize,
    pub stabilizer_order: usize,
    pub commutant_dim: usize,
    /// Rank of the smaller spanning projection when the commutant has the
    /// rigid form.
    pub projection_rank: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RigidityReport {
    pub rigid: bool,
    pub orbits: Vec<OrbitRigidity>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectionOrbits {
    pub representatives: Vec<Section>,
    pub orbit_sizes: Vec<usize>,
    pub total: u64,
}

impl SymmetryData {
    /// Packages a group with its action on outcomes; the measurement action is
    /// derived and covariance is required.
    pub fn new(group: Arc<FiniteMatrixGroup>, bundle: &OutcomeBundle, outcome_action: PermAction) -> Result<Self> {
        let cov = check_covariance(&group, bundle, &outcome_action);
        let measurement_action = cov
            .measurement_action
            .ok_or_else(|| Error::InvalidAction("outcome action is not covariant with the bundle".into()))?;
        Ok(SymmetryData { group, outcome_action, measurement_action })
    }

    /// Outcome action read off from conjugating the effects.
    pub fn from_conjugation(group: Arc<FiniteMatrixGroup>, a: &Assemblage) -> Result<Self> {
        let act = PermAction::by_conjugation(&group, a.effects())?;
        Self::new(group, a.bundle(), act)
    }

    pub fn trivial(a: &Assemblage) -> Self {
        let group = Arc::new(FiniteMatrixGroup::trivial(a.dim()));
        let outcome_action = PermAction::trivial(&group, a.n_outcomes());
        let measurement_action = PermAction::trivial(&group, a.n_measurements());
        SymmetryData { group, outcome_action, measurement_action }
    }

    pub fn group(&self) -> &FiniteMatrixGroup {
        &self.group
    }

    pub fn group_arc(&self) -> Arc<FiniteMatrixGroup> {
        self.group.clone()
    }

    pub fn outcome_action(&self) -> &PermAction {
        &self.outcome_action
    }

    pub fn measurement_action(&self) -> &PermAction {
        &self.measurement_action
    }

    /// A_{g(z)} = U_g A_z U_g† for all g, z.
    pub fn check_symmetry(&self, a: &Assemblage, tol: f64) -> SymmetryCheck {
        let g = &self.group;
        let worst = map_indices(g.order(), Execution::Parallel, |k| {
            (0..a.n_outcomes())
                .map(|z| g.conjugate(k, a.effect(z)).max_abs_diff(a.effect(self.outcome_action.apply(k, z))))
                .fold(0.0, f64::max)
        })
        .into_iter()
        .fold(0.0, f64::max);
        SymmetryCheck { ok: worst <= tol, residual: worst }
    }

    pub fn is_uniform(&self) -> bool {
        self.outcome_action.is_transitive()
    }

    /// Commutant of U(G_z) at one outcome per orbit.
    pub fn rigidity(&self, a: &Assemblage) -> RigidityReport {
        let mut orbits = Vec::new();
        for orb in self.outcome_action.orbits() {
            let z = orb[0];
            let stab = self.outcome_action.stabilizer(z);
            let mats: Vec<CMat> = stab.iter().map(|&g| self.group.element(g).clone()).collect();
            let basis = commutant_basis(a.dim(), &mats);
            let projection_rank = isotypic_projections(&basis).and_then(|(p, q)| {
                let ok = (&p + &q).max_abs_diff(&CMat::identity(a.dim())) < 1e-10;
                let r = p.trace().re.round() as usize;
                (ok && r >= 1 && r < a.dim()).then_some(r)
            });
            orbits.push(OrbitRigidity {
                representative: z,
                orbit_size: orb.len(),
                stabilizer_order: stab.len(),
                commutant_dim: basis.len(),
                projection_rank,
            });
        }
        let rigid = !orbits.is_empty() && orbits.iter().all(|o| o.commutant_dim == 2 && o.projection_rank.is_some());
        RigidityReport { rigid, orbits }
    }

    pub fn is_rigid(&self, a: &Assemblage) -> bool {
        self.rigidity(a).rigid
    }

    /// [g(s)](x) = g(s[g⁻¹(x)]).
    pub fn act_on_section(&self, g: usize, s: &Section) -> Section {
        let mut choice = vec![0; s.choice.len()];
        for (x, &z) in s.choice.iter().enumerate() {
            choice[self.measurement_action.apply(g, x)] = self.outcome_action.apply(g, z);
        }
        Section { choice }
    }

    /// Orbit representatives of outcomes (least element of each orbit).
    pub fn outcome_orbits(&self) -> (Vec<usize>, Vec<usize>) {
        let orbs = self.outcome_action.orbits();
        (orbs.iter().map(|o| o[0]).collect(), orbs.iter().map(Vec::len).collect())
    }

    /// Lexicographically least representative of every section orbit.
    pub fn section_orbits(&self, bundle: &OutcomeBundle, cap: u128) -> Result<SectionOrbits> {
        let total = bundle.check_section_cap(cap.min(ORBIT_SECTION_CAP))?;
        let mut visited = crate::groups::BitSet::new(total as usize);
        let mut representatives = Vec::new();
        let mut orbit_sizes = Vec::new();
        for idx in 0..total {
            if visited.contains(idx as usize) {
                continue;
            }
            let s = bundle.section_at(idx);
            let mut size = 0;
            for g in 0..self.group.order() {
                let j = bundle.section_index(&self.act_on_section(g, &s)) as usize;
                if !visited.contains(j) {
                    visited.insert(j);
                    size += 1;
                }
            }
            representatives.push(s);
            orbit_sizes.push(size);
        }
        Ok(SectionOrbits { representatives, orbit_sizes, total })
    }
}
