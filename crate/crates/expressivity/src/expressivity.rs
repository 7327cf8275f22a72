//! Expressivity: averaged mutual-information estimates per attribute.
//!
//! The expressivity of a feature set with respect to an attribute is the
//! mean of several independent estimator runs, each training a fresh
//! critic on the augmented matrix `[F | A]`. Run seeds derive
//! deterministically from the base seed, so a result is reproducible as a
//! whole and per run. Ranking utilities order attributes by their scores.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{validate_pairing, AttributeVector, FeatureMatrix};
use crate::error::{Error, Result};
use crate::mine::{train_mine, MiEstimate, MineConfig};
use crate::numerics::Matrix;
use crate::rng::derive_seed;

/// Expressivity of one feature set with respect to one attribute.
///
/// `mean` is the arithmetic mean of `run_values`; `run_seeds[i]` is the
/// seed that reproduces run `i` in isolation. `layer_tag` and `epoch_tag`
/// locate the result inside an audit grid and stay empty for standalone
/// estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpressivityResult {
    pub attribute_name: String,
    pub runs: usize,
    pub run_values: Vec<f64>,
    pub run_seeds: Vec<u64>,
    pub mean: f64,
    pub layer_tag: Option<String>,
    pub epoch_tag: Option<String>,
    pub base_seed: u64,
    pub config_digest: String,
}

impl ExpressivityResult {
    /// Sample standard deviation of the run values; zero for a single run.
    pub fn run_std(&self) -> f64 {
        if self.run_values.len() < 2 {
            return 0.0;
        }
        let n = self.run_values.len() as f64;
        let var = self
            .run_values
            .iter()
            .map(|v| (v - self.mean) * (v - self.mean))
            .sum::<f64>()
            / (n - 1.0);
        var.sqrt()
    }

    /// Tags the result with the audit-grid row it belongs to. Labels
    /// beginning with `epoch` are recorded as epoch tags, everything else
    /// as a layer tag.
    pub fn with_tag(mut self, tag: &str) -> Self {
        if tag.to_ascii_lowercase().starts_with("epoch") {
            self.epoch_tag = Some(tag.to_string());
        } else {
            self.layer_tag = Some(tag.to_string());
        }
        self
    }
}

/// Appends the attribute as an extra column: `X[i] = [F[i] | A[i]]`.
///
/// The inputs are not modified. Row counts must match and the feature
/// matrix must have at least one column.
pub fn augment(f: &FeatureMatrix, a: &AttributeVector) -> Result<Matrix> {
    validate_pairing(f, a)?;
    let (n, m) = (f.n(), f.m());
    if m == 0 {
        return Err(Error::Data("feature matrix has no columns".into()));
    }
    let mut x = Matrix::zeros(n, m + 1);
    for i in 0..n {
        let row = x.row_mut(i);
        row[..m].copy_from_slice(f.values().row(i));
        row[m] = a.values()[i];
    }
    Ok(x)
}

/// Stable 16-hex-character digest of an estimator configuration, used to
/// tie reported numbers to the exact hyperparameters that produced them.
pub fn config_digest(cfg: &MineConfig) -> String {
    let encoded = serde_json::to_vec(cfg).expect("config serializes");
    let hash = Sha256::digest(&encoded);
    let mut out = String::with_capacity(16);
    for byte in &hash[..8] {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Computes expressivity as the mean of `runs` independent estimates, each
/// from a freshly initialized critic. Run `i` uses the seed
/// `derive_seed(cfg.seed, i)`; everything else about the runs is
/// identical. Errors from a run are annotated with its index.
pub fn compute_expressivity(
    f: &FeatureMatrix,
    a: &AttributeVector,
    runs: usize,
    cfg: &MineConfig,
) -> Result<ExpressivityResult> {
    compute_runs(f, a, runs, cfg, false)
}

/// Identical to [`compute_expressivity`] but executes the runs on the
/// rayon thread pool. The result is bitwise identical to the sequential
/// version: runs are independent and are reassembled in index order.
pub fn compute_expressivity_parallel(
    f: &FeatureMatrix,
    a: &AttributeVector,
    runs: usize,
    cfg: &MineConfig,
) -> Result<ExpressivityResult> {
    compute_runs(f, a, runs, cfg, true)
}

fn compute_runs(
    f: &FeatureMatrix,
    a: &AttributeVector,
    runs: usize,
    cfg: &MineConfig,
    parallel: bool,
) -> Result<ExpressivityResult> {
    if runs == 0 {
        return Err(Error::Parameter("run count must be at least 1".into()));
    }
    let run_seeds: Vec<u64> = (0..runs as u64).map(|i| derive_seed(cfg.seed, i)).collect();
    let run_one = |(i, seed): (usize, &u64)| -> Result<MiEstimate> {
        let run_cfg = MineConfig {
            seed: *seed,
            ..cfg.clone()
        };
        train_mine(f, a, &run_cfg).map_err(|e| e.with_context(format!("run {i}")))
    };

    let outcomes: Vec<Result<MiEstimate>> = if parallel {
        run_seeds.par_iter().enumerate().map(run_one).collect()
    } else {
        run_seeds.iter().enumerate().map(run_one).collect()
    };
    // First failing run wins deterministically, regardless of the order
    // the workers finished in.
    let mut run_values = Vec::with_capacity(runs);
    for outcome in outcomes {
        run_values.push(outcome?.value);
    }
    let mean = run_values.iter().sum::<f64>() / runs as f64;

    Ok(ExpressivityResult {
        attribute_name: a.name.clone(),
        runs,
        run_values,
        run_seeds,
        mean,
        layer_tag: None,
        epoch_tag: None,
        base_seed: cfg.seed,
        config_digest: config_digest(cfg),
    })
}

/// Orders attributes by descending expressivity; ties break by ascending
/// attribute name. The input map's iteration order never affects the
/// output.
pub fn rank_attributes(scores: &HashMap<String, f64>) -> Result<Vec<(String, f64)>> {
    if scores.is_empty() {
        return Err(Error::Usage("ranking needs at least one attribute".into()));
    }
    for (name, value) in scores {
        if !value.is_finite() {
            return Err(Error::Data(format!(
                "expressivity for {name} is not finite: {value}"
            )));
        }
    }
    let mut ranked: Vec<(String, f64)> = scores
        .iter()
        .map(|(name, value)| (name.clone(), *value))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(ranked)
}

/// Renders a ranking as `first > second > ...`.
pub fn format_ranking(ranked: &[(String, f64)]) -> String {
    ranked
        .iter()
        .map(|(name, _)| name.as_str())
        .collect::<Vec<_>>()
        .join(" > ")
}
