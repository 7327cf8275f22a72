//! The audit manifest: a TOML file describing which feature files to score
//! against which attribute files.
//!
//! Schema (all paths are resolved relative to the manifest's directory):
//!
//! ```toml
//! model_label = "demo"
//! base_seed = 42            # optional
//! standardize = true        # optional, defaults to true
//!
//! [[cells]]
//! tag = "layer2"            # row label in the audit grid
//! features = "layer2.fbin"  # .fbin or .csv
//!
//! [[cells.attributes]]
//! name = "gender"
//! path = "gender.csv"
//! kind = "binary"           # "binary" | "continuous"
//! units = ""                # optional
//! ```
//!
//! Unknown fields anywhere in the file are rejected, so typos fail loudly
//! instead of being ignored.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::data::AttributeKind;
use crate::error::{Error, Result};

/// Parsed audit manifest with paths resolved.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditManifest {
    /// Label for the embedding model under audit; carried into reports.
    pub model_label: String,
    /// Base seed for the whole audit; `None` when the file omits it, so
    /// callers can fall back to their own default.
    #[serde(default)]
    pub base_seed: Option<u64>,
    /// Whether to standardize features before estimation.
    #[serde(default = "default_true")]
    pub standardize: bool,
    /// Grid rows, in the order they should appear.
    pub cells: Vec<ManifestCell>,
}

/// One feature file and the attributes to score it against.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestCell {
    /// Row label, e.g. a layer or epoch tag.
    pub tag: String,
    /// Feature file path; `.fbin` or `.csv` by extension.
    pub features: PathBuf,
    /// Attribute columns to estimate against this feature file.
    pub attributes: Vec<ManifestAttribute>,
}

/// One attribute column within a cell.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestAttribute {
    pub name: String,
    pub path: PathBuf,
    pub kind: AttributeKind,
    #[serde(default)]
    pub units: String,
}

fn default_true() -> bool {
    true
}

/// Reads and validates a manifest file.
///
/// Beyond the schema, this enforces: at least one cell, at least one
/// attribute per cell, non-empty tags, names, and paths, and no duplicate
/// `(tag, attribute)` pair across the whole file.
pub fn parse_manifest(path: impl AsRef<Path>) -> Result<AuditManifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display(), e))?;
    let mut manifest: AuditManifest = toml::from_str(&text).map_err(|e| {
        Error::Format(format!("{}: {}", path.display(), compact_toml_error(&e)))
    })?;

    if manifest.cells.is_empty() {
        return Err(Error::Data(format!(
            "{}: manifest lists no cells",
            path.display()
        )));
    }
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut seen = std::collections::HashSet::new();
    for cell in &mut manifest.cells {
        if cell.tag.is_empty() {
            return Err(Error::Data(format!(
                "{}: a cell has an empty tag",
                path.display()
            )));
        }
        if cell.features.as_os_str().is_empty() {
            return Err(Error::Data(format!(
                "{}: cell {} has an empty feature path",
                path.display(),
                cell.tag
            )));
        }
        if cell.attributes.is_empty() {
            return Err(Error::Data(format!(
                "{}: cell {} lists no attributes",
                path.display(),
                cell.tag
            )));
        }
        cell.features = base.join(&cell.features);
        for attr in &mut cell.attributes {
            if attr.name.is_empty() || attr.path.as_os_str().is_empty() {
                return Err(Error::Data(format!(
                    "{}: cell {} has an attribute with an empty name or path",
                    path.display(),
                    cell.tag
                )));
            }
            if !seen.insert((cell.tag.clone(), attr.name.clone())) {
                return Err(Error::Data(format!(
                    "{}: duplicate cell ({}, {})",
                    path.display(),
                    cell.tag,
                    attr.name
                )));
            }
            attr.path = base.join(&attr.path);
        }
    }
    Ok(manifest)
}

/// First line of a TOML error, which carries the span and message.
fn compact_toml_error(e: &toml::de::Error) -> String {
    e.to_string().lines().collect::<Vec<_>>().join(" ").trim().to_string()
}
