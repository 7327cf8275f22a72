//! Training loop for the neural mutual-information estimator.
//!
//! A critic network is trained to maximize the Donsker-Varadhan lower bound
//! `E_joint[T] - log E_marginal[exp(T)]` on the mutual information between
//! the feature rows and the attribute column of an augmented sample matrix.
//! Minibatches are drawn without replacement in epoch passes; the marginal
//! batch reuses the joint batch's features with its attribute entries
//! shuffled among themselves. Training stops when the per-window mean of
//! the bound stops moving between consecutive windows or after a hard
//! iteration cap, and the reported value is the bound averaged over fresh
//! evaluation batches scored without any further updates.

mod objective;
mod step;

pub use objective::{dv_objective, log_mean_exp, shuffle_marginal};
pub use step::{dv_gradient_step, EmaState};

use serde::{Deserialize, Serialize};

use crate::data::{AttributeVector, FeatureMatrix};
use crate::error::{Error, Result};
use crate::expressivity::augment;
use crate::numerics::{AdamState, Matrix, NetworkParams};
use crate::rng::{derive_seed, prng, Prng};

/// Absolute bound-magnitude above which training is declared divergent.
const DIVERGENCE_LIMIT: f64 = 50.0;

/// Stream indices for the independent generators a run derives from its
/// seed.
const STREAM_INIT: u64 = 0;
const STREAM_BATCH: u64 = 1;
const STREAM_MARGINAL: u64 = 2;
const STREAM_EVAL: u64 = 3;

/// Hyperparameters of one estimator run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MineConfig {
    /// Adam learning rate.
    pub learning_rate: f64,
    /// Minibatch size for both the joint and the marginal term.
    pub batch_size: usize,
    /// Hard cap on training iterations.
    pub max_iterations: usize,
    /// Width of the plateau detection window, in iterations.
    pub convergence_window: usize,
    /// Threshold on the change of the windowed mean of the bound.
    pub convergence_tol: f64,
    /// Decay of the moving average in the partition denominator.
    pub ema_decay: f64,
    /// Number of fresh batches averaged for the final value.
    pub eval_batches: usize,
    /// Base seed; all randomness of the run derives from it.
    pub seed: u64,
}

impl Default for MineConfig {
    fn default() -> Self {
        MineConfig {
            learning_rate: 1e-3,
            batch_size: 100,
            max_iterations: 5000,
            convergence_window: 50,
            convergence_tol: 1e-4,
            ema_decay: 0.99,
            eval_batches: 20,
            seed: 0,
        }
    }
}

impl MineConfig {
    /// Checks every field against its documented range.
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Usage(format!(
                "learning_rate must be positive and finite, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size < 2 {
            return Err(Error::Usage(format!(
                "batch_size must be at least 2, got {}",
                self.batch_size
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Usage("max_iterations must be at least 1".into()));
        }
        if self.convergence_window == 0 {
            return Err(Error::Usage("convergence_window must be at least 1".into()));
        }
        if !(self.convergence_tol.is_finite() && self.convergence_tol > 0.0) {
            return Err(Error::Usage(format!(
                "convergence_tol must be positive and finite, got {}",
                self.convergence_tol
            )));
        }
        if !(0.0 < self.ema_decay && self.ema_decay < 1.0) {
            return Err(Error::Usage(format!(
                "ema_decay must lie strictly between 0 and 1, got {}",
                self.ema_decay
            )));
        }
        if self.eval_batches == 0 {
            return Err(Error::Usage("eval_batches must be at least 1".into()));
        }
        Ok(())
    }
}

/// Result of one estimator run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiEstimate {
    /// Final bound value in nats, averaged over the evaluation batches.
    pub value: f64,
    /// Per-iteration batch values of the bound, in training order.
    pub trace: Vec<f64>,
    /// Number of training iterations actually executed.
    pub iterations_run: usize,
    /// Whether the plateau criterion fired before the iteration cap.
    pub converged: bool,
    /// Seed the run was started with.
    pub seed: u64,
}

/// Draws minibatch index blocks without replacement, reshuffling the index
/// pool on every pass; a trailing block smaller than the batch size is
/// dropped.
struct EpochBatcher {
    indices: Vec<usize>,
    cursor: usize,
    batch_size: usize,
}

impl EpochBatcher {
    fn new(n: usize, batch_size: usize) -> EpochBatcher {
        EpochBatcher {
            indices: (0..n).collect(),
            cursor: usize::MAX,
            batch_size,
        }
    }

    fn next_batch(&mut self, rng: &mut Prng) -> &[usize] {
        use rand::seq::SliceRandom;
        if self.cursor == usize::MAX || self.cursor + self.batch_size > self.indices.len() {
            self.indices.shuffle(rng);
            self.cursor = 0;
        }
        let block = &self.indices[self.cursor..self.cursor + self.batch_size];
        self.cursor += self.batch_size;
        block
    }
}

/// Copies the augmented rows listed in `idx` into `joint`, and the same
/// rows with a shuffled attribute column into `marginal`.
fn fill_batches(
    x: &Matrix,
    idx: &[usize],
    joint: &mut Matrix,
    marginal: &mut Matrix,
    shuffle_rng: &mut Prng,
) -> Result<()> {
    let d = x.cols();
    for (row, &i) in idx.iter().enumerate() {
        joint.row_mut(row).copy_from_slice(x.row(i));
        marginal.row_mut(row).copy_from_slice(x.row(i));
    }
    let attrs: Vec<f64> = idx.iter().map(|&i| x.get(i, d - 1)).collect();
    let shuffled = shuffle_marginal(&attrs, shuffle_rng)?;
    for (row, value) in shuffled.into_iter().enumerate() {
        marginal.set(row, d - 1, value);
    }
    Ok(())
}

/// Trains one critic from scratch and returns its mutual-information
/// estimate in nats.
///
/// Requires `F` and `A` to be paired (`n` rows each) with
/// `n >= 2 * batch_size`. The run is fully determined by `cfg.seed`:
/// identical inputs and config reproduce the estimate and trace bit for
/// bit. Training aborts with a numeric error if the bound's magnitude
/// exceeds 50 nats, naming the iteration.
pub fn train_mine(f: &FeatureMatrix, a: &AttributeVector, cfg: &MineConfig) -> Result<MiEstimate> {
    cfg.validate()?;
    let n = f.n();
    if n < 2 * cfg.batch_size {
        return Err(Error::Data(format!(
            "training needs at least 2 * batch_size = {} samples, got {}",
            2 * cfg.batch_size,
            n
        )));
    }
    let x = augment(f, a)?;
    let d_in = x.cols();

    let mut init_rng = prng(derive_seed(cfg.seed, STREAM_INIT));
    let mut batch_rng = prng(derive_seed(cfg.seed, STREAM_BATCH));
    let mut marginal_rng = prng(derive_seed(cfg.seed, STREAM_MARGINAL));
    let mut eval_rng = prng(derive_seed(cfg.seed, STREAM_EVAL));

    let mut params = NetworkParams::init(d_in, &mut init_rng)?;
    let mut adam = AdamState::new(cfg.learning_rate, d_in);
    let mut ema = EmaState::new(cfg.ema_decay)?;
    let mut batcher = EpochBatcher::new(n, cfg.batch_size);

    let mut joint = Matrix::zeros(cfg.batch_size, d_in);
    let mut marginal = Matrix::zeros(cfg.batch_size, d_in);
    let mut trace: Vec<f64> = Vec::with_capacity(cfg.max_iterations.min(1 << 20));
    let mut converged = false;

    for iteration in 0..cfg.max_iterations {
        let idx = batcher.next_batch(&mut batch_rng).to_vec();
        fill_batches(&x, &idx, &mut joint, &mut marginal, &mut marginal_rng)?;
        let v = dv_gradient_step(&mut params, &joint, &marginal, &mut ema, &mut adam)
            .map_err(|e| annotate_iteration(e, iteration))?;
        if !v.is_finite() || v.abs() > DIVERGENCE_LIMIT {
            return Err(Error::Numeric(format!(
                "training diverged at iteration {iteration}: |V| = {:.3} exceeds {} nats; \
                 consider a lower learning_rate",
                v.abs(),
                DIVERGENCE_LIMIT
            )));
        }
        trace.push(v);

        // Plateau test, evaluated once per completed window: the mean of
        // the newest window moved less than the tolerance relative to the
        // window before it. Checking mid-window would compare largely
        // overlapping histories and trip on batch noise instead of actual
        // convergence.
        let w = cfg.convergence_window;
        if trace.len() >= 2 * w && trace.len().is_multiple_of(w) {
            let recent = mean(&trace[trace.len() - w..]);
            let previous = mean(&trace[trace.len() - 2 * w..trace.len() - w]);
            if (recent - previous).abs() < cfg.convergence_tol {
                converged = true;
                break;
            }
        }
    }

    // Final value: fresh batches, fresh shuffles, no updates.
    let mut eval_batcher = EpochBatcher::new(n, cfg.batch_size);
    let mut eval_sum = 0.0;
    for _ in 0..cfg.eval_batches {
        let idx = eval_batcher.next_batch(&mut eval_rng).to_vec();
        fill_batches(&x, &idx, &mut joint, &mut marginal, &mut eval_rng)?;
        let (scores_j, _) = params.forward(&joint)?;
        let (scores_m, _) = params.forward(&marginal)?;
        eval_sum += dv_objective(scores_j.data(), scores_m.data())?;
    }
    let value = eval_sum / cfg.eval_batches as f64;
    if !value.is_finite() {
        return Err(Error::Numeric(
            "evaluation produced a non-finite estimate".into(),
        ));
    }

    Ok(MiEstimate {
        value,
        iterations_run: trace.len(),
        trace,
        converged,
        seed: cfg.seed,
    })
}

fn annotate_iteration(err: Error, iteration: usize) -> Error {
    match err {
        Error::Numeric(msg) => Error::Numeric(format!("{msg} (iteration {iteration})")),
        other => other,
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
