//! Symmetric assemblages from a group and its representation.
//!
//! For each conjugacy class of subgroups whose commutant is two-dimensional,
//! the two isotypic projections are taken, their conjugation orbits are
//! formed, and each orbit is split into measurements. A grouping is kept only
//! if the group permutes its blocks, i.e. the orbit of one block under the
//! group already partitions the projection orbit.
//!
//! Qubit assemblages from regular polyhedra are also built directly from
//! vertex coordinates.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use serde::Serialize;

use crate::bundle::{check_covariance, Assemblage, SymmetryData};
use crate::error::{Error, Result};
use crate::groups::{
    commutant_basis, enumerate_subgroup_classes, isotypic_projections, matrix_key, FiniteMatrixGroup, MatKey,
    PermAction, SubgroupClass,
};
use crate::numerics::{bloch_projector, extreme_eigenvalues, is_projection, CMat, C64};

const ORTHO_TOL: f64 = 1e-8;
const SUM_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Solid {
    Octahedron,
    Cube,
    Cuboctahedron,
    Icosahedron,
    Dodecahedron,
    Icosidodecahedron,
}

impl Solid {
    pub const ALL: [Solid; 6] = [
        Solid::Octahedron,
        Solid::Cube,
        Solid::Cuboctahedron,
        Solid::Icosahedron,
        Solid::Dodecahedron,
        Solid::Icosidodecahedron,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Solid::Octahedron => "octahedron",
            Solid::Cube => "cube",
            Solid::Cuboctahedron => "cuboctahedron",
            Solid::Icosahedron => "icosahedron",
            Solid::Dodecahedron => "dodecahedron",
            Solid::Icosidodecahedron => "icosidodecahedron",
        }
    }

    pub fn parse(s: &str) -> Option<Solid> {
        Solid::ALL.into_iter().find(|x| x.name() == s.to_ascii_lowercase())
    }
}

fn cyclic_perms(v: [f64; 3]) -> [[f64; 3]; 3] {
    [v, [v[2], v[0], v[1]], [v[1], v[2], v[0]]]
}

fn sign_variants(v: [f64; 3]) -> Vec<[f64; 3]> {
    let mut out = Vec::new();
    for sx in [1.0, -1.0] {
        for sy in [1.0, -1.0] {
            for sz in [1.0, -1.0] {
                let w = [v[0] * sx, v[1] * sy, v[2] * sz];
                if !out.contains(&w) {
                    out.push(w);
                }
            }
        }
    }
    out
}

/// Unit vertex vectors of the solid.
pub fn platonic_vertices(solid: Solid) -> Vec<[f64; 3]> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut raw: Vec<[f64; 3]> = Vec::new();
    let add_family = |v: [f64; 3], raw: &mut Vec<[f64; 3]>| {
        for p in cyclic_perms(v) {
            for w in sign_variants(p) {
                if !raw.contains(&w) {
                    raw.push(w);
                }
            }
        }
    };
    match solid {
        Solid::Octahedron => add_family([1.0, 0.0, 0.0], &mut raw),
        Solid::Cube => add_family([1.0, 1.0, 1.0], &mut raw),
        Solid::Cuboctahedron => add_family([1.0, 1.0, 0.0], &mut raw),
        Solid::Icosahedron => add_family([0.0, 1.0, phi], &mut raw),
        Solid::Dodecahedron => {
            add_family([1.0, 1.0, 1.0], &mut raw);
            add_family([0.0, phi, 1.0 / phi], &mut raw);
        }
        Solid::Icosidodecahedron => {
            add_family([0.0, 0.0, phi], &mut raw);
            add_family([0.5, phi * phi / 2.0, phi / 2.0], &mut raw);
        }
    }
    raw.into_iter()
        .map(|v| {
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            [v[0] / n + 0.0, v[1] / n + 0.0, v[2] / n + 0.0]
        })
        .collect()
}

/// Antipodal vertex pairs as two-outcome measurements (1 ± n·σ)/2. Vertices
/// are taken in descending lexicographic order, so the "+" outcome comes first.
pub fn platonic_assemblage(solid: Solid) -> Assemblage {
    let mut verts = platonic_vertices(solid);
    verts.sort_by(|a, b| b.partial_cmp(a).expect("finite coordinates"));
    let mut used = vec![false; verts.len()];
    let mut meas = Vec::new();
    for i in 0..verts.len() {
        if used[i] {
            continue;
        }
        let v = verts[i];
        let j = (0..verts.len())
            .find(|&j| !used[j] && (0..3).all(|k| (verts[j][k] + v[k]).abs() < 1e-12))
            .expect("vertex sets are centrally symmetric");
        used[i] = true;
        used[j] = true;
        meas.push(vec![bloch_projector(v), bloch_projector(verts[j])]);
    }
    Assemblage::new(solid.name(), 2, meas).expect("projector pairs are normalised")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupingMode {
    /// Mutually orthogonal projections summing to the identity.
    Projective,
    /// n projections summing to a multiple of the identity.
    Povm(usize),
}

#[derive(Clone, Debug)]
pub struct GeneratingProjection {
    pub projection: CMat,
    pub stabilizer_class: SubgroupClass,
    pub orbit_size: usize,
}

#[derive(Clone, Debug)]
pub struct ProjectionOrbit {
    pub projections: Vec<CMat>,
    /// Conjugation stabiliser of the first projection.
    pub stabilizer: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Grouping {
    /// Blocks of orbit indices, sorted internally and by first element.
    pub blocks: Vec<Vec<usize>>,
}

/// Subgroup classes whose commutant is two-dimensional, with the commutant
/// basis of each representative.
pub fn candidate_stabilizers(group: &FiniteMatrixGroup, cap: usize) -> Result<Vec<(SubgroupClass, Vec<CMat>)>> {
    let classes = enumerate_subgroup_classes(group, cap)?;
    Ok(classes
        .into_iter()
        .filter_map(|cls| {
            let gens: Vec<CMat> = cls.generators.iter().map(|&g| group.element(g).clone()).collect();
            let basis = commutant_basis(group.dim(), &gens);
            (basis.len() == 2).then_some((cls, basis))
        })
        .collect())
}

/// The two complementary projections spanning the commutant of U(sub).
pub fn isotypic_projection(group: &FiniteMatrixGroup, sub: &[usize]) -> Option<(CMat, CMat)> {
    let mats: Vec<CMat> = sub.iter().map(|&g| group.element(g).clone()).collect();
    isotypic_projections(&commutant_basis(group.dim(), &mats))
}

/// Distinct conjugates U_g p U_g† (deduplicated at 1e-8) and the stabiliser of p.
pub fn orbit_of_projection(group: &FiniteMatrixGroup, p: &CMat) -> ProjectionOrbit {
    let mut seen: HashMap<MatKey, usize> = HashMap::new();
    let mut projections = Vec::new();
    let mut stabilizer = Vec::new();
    for g in 0..group.order() {
        let q = group.conjugate(g, p).hermitian_part();
        if q.max_abs_diff(p) < 1e-8 {
            stabilizer.push(g);
        }
        let key = matrix_key(&q);
        if seen.contains_key(&key) || projections.iter().any(|r: &CMat| r.max_abs_diff(&q) < 1e-8) {
            continue;
        }
        seen.insert(key, projections.len());
        projections.push(q);
    }
    ProjectionOrbit { projections, stabilizer }
}

struct BlockRules<'a> {
    orbit: &'a [CMat],
    dim: usize,
    ranks: Vec<usize>,
    mode: GroupingMode,
    /// c = n·rank/d for POVM blocks.
    target: f64,
    ortho: Vec<Vec<bool>>,
}

impl<'a> BlockRules<'a> {
    fn new(orbit: &'a [CMat], mode: GroupingMode) -> Self {
        let dim = orbit[0].dim();
        let ranks: Vec<usize> = orbit.iter().map(|p| is_projection(p, 1e-8).rank).collect();
        let n = orbit.len();
        let ortho = match mode {
            GroupingMode::Projective => (0..n)
                .map(|i| (0..n).map(|j| i != j && (&orbit[i] * &orbit[j]).max_abs() < ORTHO_TOL).collect())
                .collect(),
            GroupingMode::Povm(_) => Vec::new(),
        };
        let target = match mode {
            GroupingMode::Povm(k) => k as f64 * ranks[0] as f64 / dim as f64,
            GroupingMode::Projective => 1.0,
        };
        BlockRules { orbit, dim, ranks, mode, target, ortho }
    }

    /// All valid blocks whose least element is `first`, drawing further
    /// elements from `allowed` (indices greater than `first`).
    fn blocks_from(&self, first: usize, allowed: &[bool]) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut block = vec![first];
        match self.mode {
            GroupingMode::Projective => self.extend_projective(&mut block, self.ranks[first], allowed, &mut out),
            GroupingMode::Povm(k) => {
                let sum = self.orbit[first].clone();
                self.extend_povm(&mut block, sum, k, allowed, &mut out)
            }
        }
        out
    }

    fn extend_projective(&self, block: &mut Vec<usize>, rank: usize, allowed: &[bool], out: &mut Vec<Vec<usize>>) {
        if rank == self.dim {
            out.push(block.clone());
            return;
        }
        let last = *block.last().unwrap();
        for j in last + 1..self.orbit.len() {
            if !allowed[j] || rank + self.ranks[j] > self.dim || !block.iter().all(|&i| self.ortho[i][j]) {
                continue;
            }
            block.push(j);
            self.extend_projective(block, rank + self.ranks[j], allowed, out);
            block.pop();
        }
    }

    fn extend_povm(&self, block: &mut Vec<usize>, sum: CMat, k: usize, allowed: &[bool], out: &mut Vec<Vec<usize>>) {
        if block.len() == k {
            let target = CMat::identity(self.dim).scale_re(self.target);
            if sum.max_abs_diff(&target) < SUM_TOL {
                out.push(block.clone());
            }
            return;
        }
        let last = *block.last().unwrap();
        for j in last + 1..self.orbit.len() {
            if !allowed[j] {
                continue;
            }
            let s = &sum + &self.orbit[j];
            if extreme_eigenvalues(&s).1 > self.target + SUM_TOL {
                continue;
            }
            block.push(j);
            self.extend_povm(block, s, k, allowed, out);
            block.pop();
        }
    }

    fn scale(&self) -> f64 {
        match self.mode {
            GroupingMode::Projective => 1.0,
            GroupingMode::Povm(_) => 1.0 / self.target,
        }
    }
}

fn exact_cover(rules: &BlockRules<'_>, covered: &mut Vec<bool>, blocks: &mut Vec<Vec<usize>>) -> bool {
    let Some(first) = covered.iter().position(|&c| !c) else {
        return true;
    };
    let allowed: Vec<bool> = covered.iter().map(|&c| !c).collect();
    for b in rules.blocks_from(first, &allowed) {
        for &i in &b {
            covered[i] = true;
        }
        blocks.push(b.clone());
        if exact_cover(rules, covered, blocks) {
            return true;
        }
        blocks.pop();
        for &i in &b {
            covered[i] = false;
        }
    }
    false
}

/// First exact cover of the orbit by valid blocks, in canonical order.
pub fn group_into_measurements(orbit: &[CMat], mode: GroupingMode) -> Result<Grouping> {
    if orbit.is_empty() {
        return Err(Error::NoPartition);
    }
    let rules = BlockRules::new(orbit, mode);
    let mut covered = vec![false; orbit.len()];
    let mut blocks = Vec::new();
    if exact_cover(&rules, &mut covered, &mut blocks) {
        Ok(Grouping { blocks })
    } else {
        Err(Error::NoPartition)
    }
}

/// True iff the action maps every block onto a block.
pub fn verify_covariance_of_grouping(grouping: &Grouping, action: &PermAction) -> bool {
    let blocks: HashSet<Vec<usize>> = grouping.blocks.iter().cloned().collect();
    (0..action.group_order()).all(|g| {
        grouping.blocks.iter().all(|b| {
            let mut img: Vec<usize> = b.iter().map(|&z| action.apply(g, z)).collect();
            img.sort_unstable();
            blocks.contains(&img)
        })
    })
}

/// Every grouping whose blocks form a single orbit under the action.
pub fn covariant_groupings(orbit: &[CMat], action: &PermAction, mode: GroupingMode) -> Vec<Grouping> {
    if orbit.is_empty() {
        return Vec::new();
    }
    let rules = BlockRules::new(orbit, mode);
    let n = orbit.len();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for block in rules.blocks_from(0, &vec![true; n]) {
        let mut images: BTreeSet<Vec<usize>> = BTreeSet::new();
        for g in 0..action.group_order() {
            let mut img: Vec<usize> = block.iter().map(|&z| action.apply(g, z)).collect();
            img.sort_unstable();
            images.insert(img);
        }
        let mut count = vec![0u32; n];
        for b in &images {
            for &z in b {
                count[z] += 1;
            }
        }
        if count.iter().all(|&c| c == 1) {
            let mut blocks: Vec<Vec<usize>> = images.into_iter().collect();
            blocks.sort();
            let g = Grouping { blocks };
            if seen.insert(g.clone()) {
                out.push(g);
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct ConstructionOptions {
    pub mode: GroupingMode,
    pub subgroup_cap: usize,
    pub tol: f64,
}

impl Default for ConstructionOptions {
    fn default() -> Self {
        ConstructionOptions { mode: GroupingMode::Projective, subgroup_cap: crate::groups::DEFAULT_SUBGROUP_CAP, tol: 1e-9 }
    }
}

#[derive(Clone, Debug)]
pub struct ConstructedAssemblage {
    pub assemblage: Assemblage,
    pub symmetry: SymmetryData,
    pub stabilizer_order: usize,
    pub projection_rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    NoPartition,
    NotCovariant,
    FailedCheck(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct Rejection {
    pub orbit_size: usize,
    pub stabilizer_order: usize,
    pub projection_rank: usize,
    pub reason: RejectReason,
}

#[derive(Clone, Debug)]
pub struct ConstructionResult {
    pub assemblages: Vec<ConstructedAssemblage>,
    pub rejected: Vec<Rejection>,
    pub generating_projections: Vec<GeneratingProjection>,
}

fn orbit_key(orbit: &[CMat]) -> Vec<MatKey> {
    let mut keys: Vec<MatKey> = orbit.iter().map(matrix_key).collect();
    keys.sort();
    keys
}

/// Runs the full pipeline: candidate stabilisers, isotypic projections, their
/// orbits, covariant groupings and the structural checks.
pub fn construct_assemblages(group: Arc<FiniteMatrixGroup>, opts: &ConstructionOptions) -> Result<ConstructionResult> {
    let candidates = candidate_stabilizers(&group, opts.subgroup_cap)?;
    let mut seen_orbits = HashSet::new();
    let mut generating = Vec::new();
    let mut orbits: Vec<ProjectionOrbit> = Vec::new();
    for (cls, basis) in candidates {
        let Some((p, q)) = isotypic_projections(&basis) else { continue };
        for proj in [p, q] {
            let orbit = orbit_of_projection(&group, &proj);
            if !seen_orbits.insert(orbit_key(&orbit.projections)) {
                continue;
            }
            generating.push(GeneratingProjection {
                projection: orbit.projections[0].clone(),
                stabilizer_class: cls.clone(),
                orbit_size: orbit.projections.len(),
            });
            orbits.push(orbit);
        }
    }
    let rank_of = |p: &CMat| p.trace().re.round() as usize;
    orbits.sort_by_key(|o| (o.projections.len(), rank_of(&o.projections[0])));

    let mut assemblages: Vec<ConstructedAssemblage> = Vec::new();
    let mut rejected = Vec::new();
    let mut seen_assemblages = HashSet::new();
    for orbit in &orbits {
        let rank = rank_of(&orbit.projections[0]);
        let reject = |reason| Rejection {
            orbit_size: orbit.projections.len(),
            stabilizer_order: orbit.stabilizer.len(),
            projection_rank: rank,
            reason,
        };
        if let GroupingMode::Povm(k) = opts.mode {
            if k < 2 || orbit.projections.len() % k != 0 {
                rejected.push(reject(RejectReason::NoPartition));
                continue;
            }
        }
        let action = PermAction::by_conjugation(&group, &orbit.projections)?;
        let groupings = covariant_groupings(&orbit.projections, &action, opts.mode);
        if groupings.is_empty() {
            let reason = match group_into_measurements(&orbit.projections, opts.mode) {
                Ok(_) => RejectReason::NotCovariant,
                Err(_) => RejectReason::NoPartition,
            };
            rejected.push(reject(reason));
            continue;
        }
        let rules = BlockRules::new(&orbit.projections, opts.mode);
        for grouping in groupings {
            let meas: Vec<Vec<CMat>> = grouping
                .blocks
                .iter()
                .map(|b| b.iter().map(|&i| orbit.projections[i].scale(C64::new(rules.scale(), 0.0))).collect())
                .collect();
            let m = meas.len();
            let name = format!("{}-M{}-rank{}-stab{}", group.name(), m, rank, orbit.stabilizer.len());
            let assemblage = match Assemblage::new(name, group.dim(), meas) {
                Ok(a) => a,
                Err(e) => {
                    rejected.push(reject(RejectReason::FailedCheck(e.to_string())));
                    continue;
                }
            };
            let mut keys: Vec<MatKey> = assemblage.effects().iter().map(matrix_key).collect();
            keys.sort();
            if !seen_assemblages.insert((m, keys)) {
                continue;
            }
            match verify_constructed(&group, &assemblage, opts.tol) {
                Ok(symmetry) => assemblages.push(ConstructedAssemblage {
                    assemblage,
                    symmetry,
                    stabilizer_order: orbit.stabilizer.len(),
                    projection_rank: rank,
                }),
                Err(msg) => rejected.push(reject(RejectReason::FailedCheck(msg))),
            }
        }
    }
    assemblages.sort_by_key(|c| (c.assemblage.n_measurements(), c.assemblage.n_outcomes(), c.projection_rank));
    Ok(ConstructionResult { assemblages, rejected, generating_projections: generating })
}

fn verify_constructed(group: &Arc<FiniteMatrixGroup>, a: &Assemblage, tol: f64) -> std::result::Result<SymmetryData, String> {
    let symmetry = SymmetryData::from_conjugation(group.clone(), a).map_err(|e| e.to_string())?;
    if !a.check_normalization(tol).ok {
        return Err("normalisation".into());
    }
    if !check_covariance(group, a.bundle(), symmetry.outcome_action()).ok {
        return Err("covariance".into());
    }
    let sym = symmetry.check_symmetry(a, tol);
    if !sym.ok {
        return Err(format!("symmetry residual {:e}", sym.residual));
    }
    if !symmetry.is_uniform() {
        return Err("not uniform".into());
    }
    if !symmetry.is_rigid(a) {
        return Err("not rigid".into());
    }
    Ok(symmetry)
}
