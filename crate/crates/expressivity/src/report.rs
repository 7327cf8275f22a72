//! Typed run reports and their JSON/CSV renderings.
//!
//! Every command assembles one of these structures and renders it with
//! [`to_json_pretty`] or its `to_csv` method. CSV cells are written with
//! [`json_number`], the exact digit sequence `serde_json` emits, so the
//! two formats always agree on every numeric value. Reports embed the
//! tool version, the full estimator configuration, the base seed, the
//! standardization flag, and a content digest of every input file, which
//! together are sufficient to reproduce the run.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::audit::AuditGrid;
use crate::error::{Error, Result};
use crate::expressivity::{format_ranking, rank_attributes, ExpressivityResult};
use crate::mine::MineConfig;

/// Version string embedded in every report.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Identity of one input file: the path as given and its content digest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Hex SHA-256 of a file's bytes, streamed in chunks.
pub fn sha256_file(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let mut file = File::open(path).map_err(|e| Error::io(path.display(), e))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let read = file
            .read(&mut buf)
            .map_err(|e| Error::io(path.display(), e))?;
        if read == 0 {
            break;
        }
        hasher.update(&buf[..read]);
    }
    Ok(hex_string(&hasher.finalize()))
}

/// Digest record for `path`, with the path rendered as given.
pub fn input_digest(path: impl AsRef<Path>) -> Result<InputDigest> {
    let path = path.as_ref();
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: sha256_file(path)?,
    })
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// The digit sequence `serde_json` uses for `v`, reused verbatim in CSV
/// cells so both formats print identical numbers.
pub fn json_number(v: f64) -> String {
    serde_json::to_string(&v).unwrap_or_else(|_| "null".to_string())
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let body = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Format(format!("report serialization: {e}")))?;
    Ok(format!("{body}\n"))
}

/// Report of a single feature/attribute estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub tool_version: String,
    pub command: String,
    pub config: MineConfig,
    pub base_seed: u64,
    pub standardized: bool,
    /// Feature columns that were constant before standardization.
    pub constant_columns: Vec<usize>,
    pub inputs: Vec<InputDigest>,
    pub result: ExpressivityResult,
}

impl EstimateReport {
    pub fn new(
        config: MineConfig,
        standardized: bool,
        constant_columns: Vec<usize>,
        inputs: Vec<InputDigest>,
        result: ExpressivityResult,
    ) -> EstimateReport {
        EstimateReport {
            tool_version: TOOL_VERSION.to_string(),
            command: "estimate".to_string(),
            base_seed: config.seed,
            config,
            standardized,
            constant_columns,
            inputs,
            result,
        }
    }

    /// One row per run, with the aggregate columns repeated on each row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("attribute,run,seed,value,mean,run_std\n");
        let mean = json_number(self.result.mean);
        let std = json_number(self.result.run_std());
        for (i, value) in self.result.run_values.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                csv_field(&self.result.attribute_name),
                i,
                self.result.run_seeds[i],
                json_number(*value),
                mean,
                std,
            ));
        }
        out
    }
}

/// One cell of an audit report: either a result or an error message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditCellReport {
    pub tag: String,
    pub attribute: String,
    /// Mean expressivity; absent when the cell failed.
    pub mean: Option<f64>,
    /// Failure message; absent when the cell succeeded.
    pub error: Option<String>,
    pub result: Option<ExpressivityResult>,
}

/// Descending expressivity ranking of one grid row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagRanking {
    pub tag: String,
    /// `(attribute, score)` pairs, strongest first.
    pub ranking: Vec<(String, f64)>,
    /// The same ranking as an `a > b > c` line.
    pub formatted: String,
}

/// Report of a full audit grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub tool_version: String,
    pub command: String,
    pub model_label: String,
    pub base_seed: u64,
    pub config: MineConfig,
    pub standardized: bool,
    pub inputs: Vec<InputDigest>,
    /// Row-major cells: manifest order of tags, then attributes.
    pub cells: Vec<AuditCellReport>,
    pub rankings: Vec<TagRanking>,
}

impl AuditReport {
    /// Flattens a grid into report cells plus per-tag rankings.
    pub fn from_grid(
        grid: &AuditGrid,
        config: MineConfig,
        inputs: Vec<InputDigest>,
    ) -> Result<AuditReport> {
        let cells = grid
            .cells
            .iter()
            .map(|cell| match &cell.outcome {
                Ok(result) => AuditCellReport {
                    tag: cell.tag.clone(),
                    attribute: cell.attribute.clone(),
                    mean: Some(result.mean),
                    error: None,
                    result: Some(result.clone()),
                },
                Err(e) => AuditCellReport {
                    tag: cell.tag.clone(),
                    attribute: cell.attribute.clone(),
                    mean: None,
                    error: Some(e.to_string()),
                    result: None,
                },
            })
            .collect();
        let mut rankings = Vec::new();
        for tag in grid.tags() {
            let scores = grid.scores_for_tag(tag);
            if scores.is_empty() {
                continue;
            }
            let ranked = rank_attributes(&scores)?;
            rankings.push(TagRanking {
                tag: tag.to_string(),
                formatted: format_ranking(&ranked),
                ranking: ranked,
            });
        }
        Ok(AuditReport {
            tool_version: TOOL_VERSION.to_string(),
            command: "audit".to_string(),
            model_label: grid.model_label.clone(),
            base_seed: grid.base_seed,
            config,
            standardized: grid.standardized,
            inputs,
            cells,
            rankings,
        })
    }

    /// Tags in first-appearance order.
    fn tags(&self) -> Vec<&str> {
        let mut tags: Vec<&str> = Vec::new();
        for cell in &self.cells {
            if !tags.contains(&cell.tag.as_str()) {
                tags.push(&cell.tag);
            }
        }
        tags
    }

    /// Attributes in first-appearance order.
    fn attributes(&self) -> Vec<&str> {
        let mut attrs: Vec<&str> = Vec::new();
        for cell in &self.cells {
            if !attrs.contains(&cell.attribute.as_str()) {
                attrs.push(&cell.attribute);
            }
        }
        attrs
    }

    /// Grid-shaped CSV: one row per tag, one column per attribute.
    /// Failed cells are left empty.
    pub fn to_csv(&self) -> String {
        let attrs = self.attributes();
        let mut out = String::from("tag");
        for attr in &attrs {
            out.push(',');
            out.push_str(&csv_field(attr));
        }
        out.push('\n');
        for tag in self.tags() {
            out.push_str(&csv_field(tag));
            for attr in &attrs {
                out.push(',');
                let mean = self
                    .cells
                    .iter()
                    .find(|c| c.tag == tag && c.attribute == *attr)
                    .and_then(|c| c.mean);
                if let Some(mean) = mean {
                    out.push_str(&json_number(mean));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// One synthetic-recovery case of a calibration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCase {
    /// Human-readable case label, e.g. `gaussian rho=0.8`.
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub runs: usize,
    pub max_iterations: usize,
    pub true_mi: f64,
    /// Estimated MI; absent when the case failed outright.
    pub estimate: Option<f64>,
    /// `|estimate - true_mi|`; absent when the case failed outright.
    pub abs_error: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    /// Failure message for cases that errored instead of finishing.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

/// Report of a calibration sweep over the synthetic suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub tool_version: String,
    pub command: String,
    pub quick: bool,
    pub base_seed: u64,
    pub config: MineConfig,
    pub cases: Vec<CalibrationCase>,
    pub all_passed: bool,
}

impl CalibrationReport {
    pub fn new(quick: bool, config: MineConfig, cases: Vec<CalibrationCase>) -> CalibrationReport {
        let all_passed = cases.iter().all(|c| c.passed);
        CalibrationReport {
            tool_version: TOOL_VERSION.to_string(),
            command: "calibrate".to_string(),
            quick,
            base_seed: config.seed,
            config,
            cases,
            all_passed,
        }
    }

    /// One row per case. Cases that failed outright leave the estimate
    /// columns empty and carry their message in the `error` column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "case,n,m,runs,max_iterations,true_mi,estimate,abs_error,tolerance,passed,error\n",
        );
        for case in &self.cases {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                csv_field(&case.name),
                case.n,
                case.m,
                case.runs,
                case.max_iterations,
                json_number(case.true_mi),
                case.estimate.map(json_number).unwrap_or_default(),
                case.abs_error.map(json_number).unwrap_or_default(),
                json_number(case.tolerance),
                case.passed,
                case.error.as_deref().map(csv_field).unwrap_or_default(),
            ));
        }
        out
    }
}

/// Sidecar metadata written next to generated datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenMeta {
    pub tool_version: String,
    pub generator: String,
    pub n: usize,
    pub m: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p_flip: Option<f64>,
    pub seed: u64,
    pub true_mi: f64,
    pub features_path: String,
    pub attributes_path: String,
    pub attribute_name: String,
    pub attribute_kind: String,
}

/// Quotes a CSV field when it contains a delimiter, quote, or newline.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
