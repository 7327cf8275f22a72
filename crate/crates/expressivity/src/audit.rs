//! Grid audits: expressivity per (layer/epoch tag, attribute) cell.
//!
//! An audit walks a manifest's cells in order, loads each cell's feature
//! export and attribute columns, and computes expressivity for every
//! (tag, attribute) pair. All cells must describe the same number of
//! samples, since the point of a grid is cross-cell comparison. Cell
//! seeds derive from the grid's base seed and the cell's position, so a
//! grid is reproducible cell by cell.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;

use crate::data::{
    load_attributes_csv, load_feature_matrix, standardize_features, validate_pairing,
    AuditManifest, AttributeVector, FeatureFormat, FeatureMatrix,
};
use crate::error::{Error, Result};
use crate::expressivity::{compute_expressivity, ExpressivityResult};
use crate::mine::MineConfig;
use crate::rng::derive_seed;

/// Execution knobs for an audit.
#[derive(Debug, Clone, Default)]
pub struct AuditOptions {
    /// Record failing cells in the grid instead of aborting on the first.
    pub keep_going: bool,
    /// Train independent cells on the rayon pool. Results are identical
    /// to the sequential order either way.
    pub parallel_cells: bool,
    /// Replaces the manifest's base seed when set.
    pub seed_override: Option<u64>,
}

/// One (tag, attribute) entry of an audit grid.
#[derive(Debug)]
pub struct AuditCell {
    pub tag: String,
    pub attribute: String,
    pub outcome: Result<ExpressivityResult>,
}

/// Expressivity grid over layer/epoch tags and attributes.
///
/// Cells appear in manifest order: tags top to bottom as listed, and
/// within a tag the attributes as listed.
#[derive(Debug)]
pub struct AuditGrid {
    pub model_label: String,
    /// Base seed the cell seeds were derived from.
    pub base_seed: u64,
    /// Whether features were standardized before training.
    pub standardized: bool,
    pub cells: Vec<AuditCell>,
}

impl AuditGrid {
    /// Tags in first-appearance order.
    pub fn tags(&self) -> Vec<&str> {
        let mut seen = Vec::new();
        for cell in &self.cells {
            if !seen.contains(&cell.tag.as_str()) {
                seen.push(cell.tag.as_str());
            }
        }
        seen
    }

    /// Attribute names in first-appearance order.
    pub fn attributes(&self) -> Vec<&str> {
        let mut seen = Vec::new();
        for cell in &self.cells {
            if !seen.contains(&cell.attribute.as_str()) {
                seen.push(cell.attribute.as_str());
            }
        }
        seen
    }

    /// Mean expressivity per attribute for one tag, skipping failed cells.
    pub fn scores_for_tag(&self, tag: &str) -> HashMap<String, f64> {
        self.cells
            .iter()
            .filter(|c| c.tag == tag)
            .filter_map(|c| {
                c.outcome
                    .as_ref()
                    .ok()
                    .map(|r| (c.attribute.clone(), r.mean))
            })
            .collect()
    }

    /// The first failed cell's error, in grid order.
    pub fn first_error(&self) -> Option<&Error> {
        self.cells.iter().find_map(|c| c.outcome.as_ref().err())
    }
}

struct WorkItem {
    tag: String,
    attribute: String,
    loaded: Result<(Arc<FeatureMatrix>, Arc<AttributeVector>)>,
    seed: u64,
}

/// Runs the full grid described by `manifest`: every cell gets `runs`
/// estimator runs under `cfg` (the grid's seeds replace `cfg.seed`).
///
/// The first failing cell aborts the audit with an error naming the cell
/// unless `options.keep_going` is set, in which case the failure is
/// recorded in the grid and the remaining cells still execute. A sample
/// count mismatch between cells always aborts: mixed-n grids are not
/// comparable.
pub fn run_audit(
    manifest: &AuditManifest,
    runs: usize,
    cfg: &MineConfig,
    options: &AuditOptions,
) -> Result<AuditGrid> {
    let base_seed = options.seed_override.or(manifest.base_seed).unwrap_or(0);

    // Load everything up front so shape problems surface before any
    // training starts. Feature files shared between cells load once.
    let mut feature_cache: HashMap<PathBuf, Arc<FeatureMatrix>> = HashMap::new();
    let mut items: Vec<WorkItem> = Vec::new();
    let mut ordinal: u64 = 0;
    for cell in &manifest.cells {
        for attr in &cell.attributes {
            let loaded = load_cell(manifest, cell.features.as_path(), attr, &mut feature_cache)
                .map_err(|e| e.with_context(format!("cell ({}, {})", cell.tag, attr.name)));
            let loaded = match loaded {
                Err(e) if !options.keep_going => return Err(e),
                other => other,
            };
            items.push(WorkItem {
                tag: cell.tag.clone(),
                attribute: attr.name.clone(),
                loaded,
                seed: derive_seed(base_seed, ordinal),
            });
            ordinal += 1;
        }
    }

    check_uniform_sample_count(&items)?;

    let run_item = |item: WorkItem| -> AuditCell {
        let outcome = item.loaded.and_then(|(features, attrs)| {
            let cell_cfg = MineConfig {
                seed: item.seed,
                ..cfg.clone()
            };
            compute_expressivity(&features, &attrs, runs, &cell_cfg)
                .map(|r| r.with_tag(&item.tag))
                .map_err(|e| e.with_context(format!("cell ({}, {})", item.tag, item.attribute)))
        });
        AuditCell {
            tag: item.tag,
            attribute: item.attribute,
            outcome,
        }
    };

    let cells: Vec<AuditCell> = if options.parallel_cells {
        items.into_par_iter().map(run_item).collect()
    } else {
        let mut cells = Vec::with_capacity(items.len());
        for item in items {
            let cell = run_item(item);
            let failed = cell.outcome.is_err();
            cells.push(cell);
            // Without keep-going the first failure ends the audit; the
            // cells already trained are discarded along with the grid.
            if failed && !options.keep_going {
                break;
            }
        }
        cells
    };

    let mut grid = AuditGrid {
        model_label: manifest.model_label.clone(),
        base_seed,
        standardized: manifest.standardize,
        cells,
    };
    if !options.keep_going {
        if let Some(pos) = grid.cells.iter().position(|c| c.outcome.is_err()) {
            return Err(grid.cells.swap_remove(pos).outcome.unwrap_err());
        }
    }
    Ok(grid)
}

fn load_cell(
    manifest: &AuditManifest,
    feature_path: &std::path::Path,
    attr: &crate::data::ManifestAttribute,
    cache: &mut HashMap<PathBuf, Arc<FeatureMatrix>>,
) -> Result<(Arc<FeatureMatrix>, Arc<AttributeVector>)> {
    let features = match cache.get(feature_path) {
        Some(f) => Arc::clone(f),
        None => {
            let raw = load_feature_matrix(feature_path, FeatureFormat::from_path(feature_path))?;
            let prepared = if manifest.standardize {
                standardize_features(&raw)?.matrix
            } else {
                raw
            };
            let arc = Arc::new(prepared);
            cache.insert(feature_path.to_path_buf(), Arc::clone(&arc));
            arc
        }
    };
    let attrs = Arc::new(load_attributes_csv(
        &attr.path,
        &attr.name,
        attr.kind,
        &attr.units,
    )?);
    validate_pairing(&features, &attrs)?;
    Ok((features, attrs))
}

fn check_uniform_sample_count(items: &[WorkItem]) -> Result<()> {
    let mut reference: Option<(&str, &str, usize)> = None;
    for item in items {
        let Ok((features, _)) = &item.loaded else {
            continue;
        };
        let n = features.n();
        match reference {
            None => reference = Some((&item.tag, &item.attribute, n)),
            Some((tag0, attr0, n0)) if n != n0 => {
                return Err(Error::Data(format!(
                    "sample count mismatch across cells: ({tag0}, {attr0}) has {n0} rows, \
                     ({}, {}) has {n}",
                    item.tag, item.attribute
                )));
            }
            Some(_) => {}
        }
    }
    Ok(())
}
