//! Shipped group generator files, embedded at compile time. Setting
//! `SYMMETRA_DATA_DIR` makes `<dir>/groups/<name>.json` take precedence.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::groups::FiniteMatrixGroup;
use crate::io::{parse_group_file, GroupFile};

pub const DATA_DIR_ENV: &str = "SYMMETRA_DATA_DIR";

const GROUPS: &[(&str, &str)] = &[
    ("binary_octahedral", include_str!("../data/groups/binary_octahedral.json")),
    ("binary_icosahedral", include_str!("../data/groups/binary_icosahedral.json")),
    ("st8", include_str!("../data/groups/st8.json")),
    ("st16", include_str!("../data/groups/st16.json")),
    ("st24", include_str!("../data/groups/st24.json")),
    ("st25", include_str!("../data/groups/st25.json")),
    ("st27", include_str!("../data/groups/st27.json")),
    ("st28", include_str!("../data/groups/st28.json")),
];

pub fn group_names() -> Vec<&'static str> {
    GROUPS.iter().map(|(n, _)| *n).collect()
}

fn canonical_name(name: &str) -> String {
    let n = name.trim().to_ascii_lowercase().replace([' ', '-'], "");
    match n.as_str() {
        "2o" | "binaryoctahedral" | "binary_octahedral" => "binary_octahedral".into(),
        "2i" | "binaryicosahedral" | "binary_icosahedral" => "binary_icosahedral".into(),
        _ => n.strip_prefix("st").map_or(n.clone(), |rest| format!("st{rest}")),
    }
}

pub fn data_dir() -> Option<PathBuf> {
    std::env::var_os(DATA_DIR_ENV).map(PathBuf::from)
}

/// Resolves a group file by path, then by name in the data directory
/// override, then among the embedded files.
pub fn load_group_file(name_or_path: &str) -> Result<GroupFile> {
    let path = Path::new(name_or_path);
    if path.extension().is_some_and(|e| e == "json") || path.is_file() {
        return parse_group_file(&std::fs::read_to_string(path)?);
    }
    let name = canonical_name(name_or_path);
    if let Some(dir) = data_dir() {
        let p = dir.join("groups").join(format!("{name}.json"));
        if p.is_file() {
            return parse_group_file(&std::fs::read_to_string(p)?);
        }
    }
    GROUPS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, doc)| parse_group_file(doc))
        .unwrap_or_else(|| Err(Error::InvalidArgument(format!("unknown group {name_or_path:?}"))))
}

pub fn load_group(name_or_path: &str) -> Result<FiniteMatrixGroup> {
    load_group_file(name_or_path)?.build()
}
