//! Versioned JSON documents for groups, assemblages and symmetry data.
//!
//! Matrices are stored as separate `re` / `im` row arrays. serde_json writes
//! the shortest decimal that parses back to the same double, so an export
//! followed by an import reproduces every entry bit for bit.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bundle::{Assemblage, SymmetryData};
use crate::error::{Error, Result};
use crate::groups::{matrix_from_parts, ElementEquality, FiniteMatrixGroup, PermAction};
use crate::numerics::{CMat, HERMITIAN_TOL};

pub const SCHEMA_VERSION: u32 = 1;

/// Group closures read from files are capped at this order.
pub const FILE_GROUP_MAX_ORDER: usize = 100_000;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&CMat> for MatrixJson {
    fn from(m: &CMat) -> Self {
        let n = m.dim();
        MatrixJson {
            re: (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect(),
            im: (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect(),
        }
    }
}

impl MatrixJson {
    pub fn to_cmat(&self) -> Result<CMat> {
        matrix_from_parts(&self.re, &self.im)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupFile {
    #[serde(default)]
    pub schema_version: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_order: Option<usize>,
    #[serde(default)]
    pub equality: ElementEquality,
    pub generators: Vec<MatrixJson>,
}

impl GroupFile {
    /// Closes the generators and checks the expected order when given.
    pub fn build(&self) -> Result<FiniteMatrixGroup> {
        let gens = self.generators.iter().map(MatrixJson::to_cmat).collect::<Result<Vec<_>>>()?;
        let cap = self.expected_order.unwrap_or(FILE_GROUP_MAX_ORDER);
        let g = FiniteMatrixGroup::close(self.dim, &gens, cap, self.equality)?.with_name(self.name.clone());
        if let Some(n) = self.expected_order {
            if g.order() != n {
                return Err(Error::InvariantViolation(format!(
                    "group {} closes to order {}, expected {n}",
                    self.name,
                    g.order()
                )));
            }
        }
        Ok(g)
    }

    /// A self-contained description of a group: its generators, so that
    /// closing them again reproduces the element numbering.
    pub fn describe(group: &FiniteMatrixGroup) -> Self {
        GroupFile {
            schema_version: Some(SCHEMA_VERSION),
            kind: Some("group".into()),
            name: group.name().to_string(),
            description: None,
            dim: group.dim(),
            expected_order: Some(group.order()),
            equality: group.equality(),
            generators: group.generator_indices().iter().map(|&g| MatrixJson::from(group.element(g))).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupRef {
    Named(String),
    Inline(GroupFile),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymmetryFile {
    pub group: GroupRef,
    pub outcome_permutations: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssemblageFile {
    pub schema_version: u32,
    #[serde(default = "assemblage_kind")]
    pub kind: String,
    pub name: String,
    pub dim: usize,
    pub measurements: Vec<Vec<MatrixJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<SymmetryFile>,
}

fn assemblage_kind() -> String {
    "assemblage".into()
}

pub fn symmetry_file(s: &SymmetryData) -> SymmetryFile {
    SymmetryFile {
        group: GroupRef::Inline(GroupFile::describe(s.group())),
        outcome_permutations: s.outcome_action().rows(),
    }
}

pub fn assemblage_file(a: &Assemblage, s: Option<&SymmetryData>) -> AssemblageFile {
    AssemblageFile {
        schema_version: SCHEMA_VERSION,
        kind: assemblage_kind(),
        name: a.name().to_string(),
        dim: a.dim(),
        measurements: a
            .bundle()
            .fibres()
            .iter()
            .map(|f| f.iter().map(|&z| MatrixJson::from(a.effect(z))).collect())
            .collect(),
        symmetry: s.map(symmetry_file),
    }
}

pub fn export_assemblage(a: &Assemblage, s: Option<&SymmetryData>) -> String {
    serde_json::to_string_pretty(&assemblage_file(a, s)).expect("assemblage serialises")
}

fn check_schema(v: &Value) -> Result<()> {
    match v.get("schema_version").and_then(Value::as_u64) {
        Some(x) if x == SCHEMA_VERSION as u64 => Ok(()),
        Some(x) => Err(Error::SchemaMismatch(format!("schema_version {x}, expected {SCHEMA_VERSION}"))),
        None => Err(Error::SchemaMismatch("missing schema_version".into())),
    }
}

pub fn resolve_group(r: &GroupRef) -> Result<FiniteMatrixGroup> {
    match r {
        GroupRef::Named(name) => crate::data::load_group(name),
        GroupRef::Inline(file) => file.build(),
    }
}

/// Parses and re-validates an assemblage document (normalisation, PSD, and
/// covariance plus symmetry when a symmetry block is present).
pub fn import_assemblage(doc: &str) -> Result<(Assemblage, Option<SymmetryData>)> {
    let v: Value = serde_json::from_str(doc)?;
    check_schema(&v)?;
    let file: AssemblageFile = serde_json::from_value(v)?;
    if file.kind != "assemblage" {
        return Err(Error::SchemaMismatch(format!("kind {:?}, expected \"assemblage\"", file.kind)));
    }
    let meas = file
        .measurements
        .iter()
        .map(|f| f.iter().map(MatrixJson::to_cmat).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let a = Assemblage::new(file.name, file.dim, meas)?;
    let sym = match &file.symmetry {
        None => None,
        Some(sf) => Some(import_symmetry(&a, sf)?),
    };
    Ok((a, sym))
}

pub fn import_symmetry(a: &Assemblage, sf: &SymmetryFile) -> Result<SymmetryData> {
    let group = Arc::new(resolve_group(&sf.group)?);
    let act = PermAction::new(&group, sf.outcome_permutations.clone())?;
    let s = SymmetryData::new(group, a.bundle(), act)?;
    let chk = s.check_symmetry(a, HERMITIAN_TOL.max(1e-8));
    if !chk.ok {
        return Err(Error::NotSymmetric(chk.residual));
    }
    Ok(s)
}

/// Reads a standalone symmetry document ({"schema_version", "group",
/// "outcome_permutations"}) for an assemblage.
pub fn import_symmetry_doc(a: &Assemblage, doc: &str) -> Result<SymmetryData> {
    let v: Value = serde_json::from_str(doc)?;
    check_schema(&v)?;
    let sf: SymmetryFile = serde_json::from_value(v)?;
    import_symmetry(a, &sf)
}

pub fn export_symmetry_doc(s: &SymmetryData) -> String {
    let mut v = serde_json::to_value(symmetry_file(s)).expect("symmetry serialises");
    v["schema_version"] = Value::from(SCHEMA_VERSION);
    serde_json::to_string_pretty(&v).expect("value serialises")
}

pub fn parse_group_file(doc: &str) -> Result<GroupFile> {
    let file: GroupFile = serde_json::from_str(doc)?;
    if let Some(v) = file.schema_version {
        if v != SCHEMA_VERSION {
            return Err(Error::SchemaMismatch(format!("schema_version {v}, expected {SCHEMA_VERSION}")));
        }
    }
    Ok(file)
}
