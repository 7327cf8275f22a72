//! Feature and attribute containers, standardization, and pairing checks.
//!
//! Loaders in the submodules funnel everything through the constructors
//! here, so a value of these types always satisfies its invariants: feature
//! entries are finite, binary attributes hold exactly 0 or 1, continuous
//! attributes are finite.

mod csv;
mod fbin;
mod manifest;

pub use csv::{load_attributes_csv, load_features_csv, write_attributes_csv};
pub use fbin::{load_features_fbin, read_fbin_dims, write_feature_matrix};
pub use manifest::{parse_manifest, AuditManifest, ManifestAttribute, ManifestCell};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Declared encoding of an attribute column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeKind {
    /// Values are exactly 0 or 1.
    #[serde(alias = "binary-discrete", alias = "binary_discrete")]
    Binary,
    /// Any finite value.
    Continuous,
}

impl std::fmt::Display for AttributeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AttributeKind::Binary => write!(f, "binary"),
            AttributeKind::Continuous => write!(f, "continuous"),
        }
    }
}

/// An `n x m` matrix of embedding features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Matrix,
    /// Where the values came from; a path for loaded data, a generator
    /// label for synthetic data.
    pub source: String,
    /// Whether the columns have been standardized.
    pub standardized: bool,
}

impl FeatureMatrix {
    /// Wraps a matrix of finite values. The matrix must be non-empty in
    /// both dimensions.
    pub fn new(values: Matrix, source: impl Into<String>) -> Result<FeatureMatrix> {
        if values.rows() == 0 || values.cols() == 0 {
            return Err(Error::Data(format!(
                "feature matrix must be non-empty, got {}x{}",
                values.rows(),
                values.cols()
            )));
        }
        Ok(FeatureMatrix {
            values,
            source: source.into(),
            standardized: false,
        })
    }

    pub fn n(&self) -> usize {
        self.values.rows()
    }

    pub fn m(&self) -> usize {
        self.values.cols()
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }
}

/// A length-`n` attribute column paired with a feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeVector {
    values: Vec<f64>,
    pub kind: AttributeKind,
    pub name: String,
    /// Unit label carried through to reports; empty when unspecified.
    pub units: String,
}

impl AttributeVector {
    /// Validates `values` against `kind`: binary entries must be exactly
    /// 0 or 1, continuous entries finite. Empty input is rejected.
    pub fn new(
        name: impl Into<String>,
        kind: AttributeKind,
        values: Vec<f64>,
        units: impl Into<String>,
    ) -> Result<AttributeVector> {
        let name = name.into();
        if values.is_empty() {
            return Err(Error::Data(format!("attribute {name} has no values")));
        }
        for (i, v) in values.iter().enumerate() {
            match kind {
                AttributeKind::Binary => {
                    if !(*v == 0.0 || *v == 1.0) {
                        return Err(Error::Encoding(format!(
                            "attribute {name} is declared binary but row {i} holds {v}"
                        )));
                    }
                }
                AttributeKind::Continuous => {
                    if !v.is_finite() {
                        return Err(Error::Data(format!(
                            "attribute {name} has non-finite value {v} at row {i}"
                        )));
                    }
                }
            }
        }
        Ok(AttributeVector {
            values,
            kind,
            name,
            units: units.into(),
        })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// A standardized feature matrix together with the indices of columns that
/// were constant and therefore zeroed instead of scaled.
#[derive(Debug, Clone)]
pub struct Standardized {
    pub matrix: FeatureMatrix,
    pub constant_columns: Vec<usize>,
}

/// Column-wise z-scoring with the population standard deviation.
///
/// Columns whose standard deviation falls below `1e-12` carry no signal and
/// cannot be scaled; they are set to zero and reported. Requires at least
/// two rows. Standardizing an already standardized matrix changes nothing
/// beyond rounding noise.
pub fn standardize_features(f: &FeatureMatrix) -> Result<Standardized> {
    let (n, m) = (f.n(), f.m());
    if n < 2 {
        return Err(Error::Data(format!(
            "standardization needs at least 2 rows, got {n}"
        )));
    }
    let mut means = vec![0.0; m];
    for i in 0..n {
        for (mean, v) in means.iter_mut().zip(f.values.row(i)) {
            *mean += v;
        }
    }
    for mean in &mut means {
        *mean /= n as f64;
    }
    let mut vars = vec![0.0; m];
    for i in 0..n {
        for ((var, mean), v) in vars.iter_mut().zip(&means).zip(f.values.row(i)) {
            let d = v - mean;
            *var += d * d;
        }
    }
    for var in &mut vars {
        *var /= n as f64;
    }

    let stds: Vec<f64> = vars.iter().map(|v| v.sqrt()).collect();
    let constant_columns: Vec<usize> = stds
        .iter()
        .enumerate()
        .filter(|(_, s)| **s < 1e-12)
        .map(|(j, _)| j)
        .collect();

    let mut out = Matrix::zeros(n, m);
    for i in 0..n {
        let src = f.values.row(i);
        let dst = out.row_mut(i);
        for j in 0..m {
            dst[j] = if stds[j] < 1e-12 {
                0.0
            } else {
                (src[j] - means[j]) / stds[j]
            };
        }
    }
    let mut matrix = FeatureMatrix::new(out, f.source.clone())?;
    matrix.standardized = true;
    Ok(Standardized {
        matrix,
        constant_columns,
    })
}

/// Checks that features and attributes describe the same samples.
pub fn validate_pairing(f: &FeatureMatrix, a: &AttributeVector) -> Result<()> {
    if f.n() != a.n() {
        return Err(Error::Data(format!(
            "feature rows {} != attribute rows {}",
            f.n(),
            a.n()
        )));
    }
    Ok(())
}

/// On-disk representations of a feature matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureFormat {
    /// Headerless text, one row per line, comma-separated.
    Csv,
    /// The binary layout documented in [`fbin`](self::load_features_fbin).
    Fbin,
}

impl FeatureFormat {
    /// Infers the format from the file extension: `.fbin` selects the
    /// binary layout, anything else is read as CSV.
    pub fn from_path(path: &Path) -> FeatureFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("fbin") => FeatureFormat::Fbin,
            _ => FeatureFormat::Csv,
        }
    }
}

/// Loads a feature matrix in the named format.
pub fn load_feature_matrix(path: impl AsRef<Path>, format: FeatureFormat) -> Result<FeatureMatrix> {
    match format {
        FeatureFormat::Csv => load_features_csv(path),
        FeatureFormat::Fbin => load_features_fbin(path),
    }
}
