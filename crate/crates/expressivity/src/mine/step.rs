//! One training step: the bias-corrected gradient of the negated bound,
//! applied through Adam.
//!
//! The naive minibatch gradient of the log-partition term is biased because
//! the same small batch appears in both the numerator and the denominator.
//! The established fix replaces the denominator with an exponential moving
//! average of marginal-batch means of `exp(T)`: the step's gradient is
//!
//! `grad L = -( mean_joint[grad T] - mean_marginal[exp(T) * grad T] / ema )`
//!
//! where the average is refreshed with the current batch mean and then used,
//! so decay 0 degenerates to the plain biased gradient.

use crate::error::{Error, Result};
use crate::mine::objective::dv_objective;
use crate::numerics::{adam_step, AdamState, Matrix, NetworkParams};

/// Exponential moving average of marginal-batch means of `exp(T)`.
///
/// Starts unset; the first observation seeds it directly.
#[derive(Debug, Clone)]
pub struct EmaState {
    decay: f64,
    value: Option<f64>,
}

impl EmaState {
    /// `decay` must lie in `[0, 1)`; 0 keeps no history.
    pub fn new(decay: f64) -> Result<EmaState> {
        if !(0.0..1.0).contains(&decay) {
            return Err(Error::Parameter(format!(
                "ema decay must lie in [0, 1), got {decay}"
            )));
        }
        Ok(EmaState { decay, value: None })
    }

    /// Folds in one batch mean and returns the refreshed average.
    pub fn absorb(&mut self, batch_mean: f64) -> f64 {
        let next = match self.value {
            None => batch_mean,
            Some(v) => self.decay * v + (1.0 - self.decay) * batch_mean,
        };
        self.value = Some(next);
        next
    }

    /// Current average, if any observation has been absorbed.
    pub fn value(&self) -> Option<f64> {
        self.value
    }
}

/// Computes the bias-corrected loss gradient for one joint/marginal batch
/// pair and applies a single Adam update to `params` in place.
///
/// Returns the batch value of the bound (from the unmodified objective, not
/// the surrogate used for the gradient). Non-finite critic outputs or an
/// unusable partition denominator abort with a numeric error; lowering the
/// learning rate and restarting the run is the usual remedy.
pub fn dv_gradient_step(
    params: &mut NetworkParams,
    batch_joint: &Matrix,
    batch_marginal: &Matrix,
    ema: &mut EmaState,
    adam: &mut AdamState,
) -> Result<f64> {
    if batch_joint.rows() != batch_marginal.rows()
        || batch_joint.cols() != batch_marginal.cols()
    {
        return Err(Error::Dimension(format!(
            "joint batch is {}x{} but marginal batch is {}x{}",
            batch_joint.rows(),
            batch_joint.cols(),
            batch_marginal.rows(),
            batch_marginal.cols()
        )));
    }
    if batch_joint.rows() < 2 {
        return Err(Error::Batch(format!(
            "gradient step needs a batch of at least 2, got {}",
            batch_joint.rows()
        )));
    }

    let b = batch_joint.rows() as f64;
    let (scores_j, cache_j) = params.forward(batch_joint)?;
    let (scores_m, cache_m) = params.forward(batch_marginal)?;
    check_scores_finite(scores_j.data(), "joint")?;
    check_scores_finite(scores_m.data(), "marginal")?;

    let v = dv_objective(scores_j.data(), scores_m.data())?;

    let exp_t: Vec<f64> = scores_m.data().iter().map(|t| t.exp()).collect();
    if exp_t.iter().any(|e| !e.is_finite()) {
        return Err(Error::Numeric(
            "exp of a marginal critic score overflowed".into(),
        ));
    }
    let batch_mean = exp_t.iter().sum::<f64>() / b;
    let denominator = ema.absorb(batch_mean);
    if !denominator.is_finite() || denominator <= 0.0 {
        return Err(Error::Numeric(format!(
            "partition denominator became unusable: {denominator}"
        )));
    }

    let upstream_joint = vec![1.0 / b; batch_joint.rows()];
    let upstream_marginal: Vec<f64> = exp_t.iter().map(|e| e / (b * denominator)).collect();
    let grad_joint = params.backward(&cache_j, &upstream_joint)?;
    let mut loss_grad = params.backward(&cache_m, &upstream_marginal)?;
    // grad L = marginal term - joint term.
    loss_grad.zip_apply(&grad_joint, |g, gj| *g -= gj);
    adam_step(params, &loss_grad, adam)?;
    Ok(v)
}

fn check_scores_finite(scores: &[f64], which: &str) -> Result<()> {
    if let Some(pos) = scores.iter().position(|t| !t.is_finite()) {
        return Err(Error::Numeric(format!(
            "non-finite critic score in {which} batch at row {pos}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{elu, HIDDEN2};
    use crate::rng::prng;
    use rand_distr::{Distribution, Normal};

    fn random_batch(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = prng(seed);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let data = (0..rows * cols).map(|_| normal.sample(&mut rng)).collect();
        Matrix::from_vec(rows, cols, data).unwrap()
    }

    /// Second-layer activations recomputed directly from the input.
    fn hidden2(params: &NetworkParams, x: &Matrix) -> Matrix {
        let mut a1 = x.matmul(&params.w1).unwrap();
        a1.add_row_broadcast(&params.b1);
        for v in a1.data_mut() {
            *v = elu(*v);
        }
        let mut a2 = a1.matmul(&params.w2).unwrap();
        a2.add_row_broadcast(&params.b2);
        for v in a2.data_mut() {
            *v = elu(*v);
        }
        a2
    }

    /// Recomputes, independently of `dv_gradient_step`'s internals, the
    /// loss gradient a zero-decay step applies.
    fn analytic_loss_gradient(
        params: &NetworkParams,
        xj: &Matrix,
        xm: &Matrix,
    ) -> NetworkParams {
        let b = xj.rows() as f64;
        let (_, cj) = params.forward(xj).unwrap();
        let (sm, cm) = params.forward(xm).unwrap();
        let exp_t: Vec<f64> = sm.data().iter().map(|t| t.exp()).collect();
        let denom = exp_t.iter().sum::<f64>() / b;
        let up_j = vec![1.0 / b; xj.rows()];
        let up_m: Vec<f64> = exp_t.iter().map(|e| e / (b * denom)).collect();
        let gj = params.backward(&cj, &up_j).unwrap();
        let mut g = params.backward(&cm, &up_m).unwrap();
        g.zip_apply(&gj, |g, gj| *g -= gj);
        g
    }

    #[test]
    fn ema_seeds_on_first_observation_and_decays_afterwards() {
        let mut ema = EmaState::new(0.9).unwrap();
        assert_eq!(ema.value(), None);
        assert_eq!(ema.absorb(2.0), 2.0);
        let second = ema.absorb(4.0);
        assert!((second - (0.9 * 2.0 + 0.1 * 4.0)).abs() < 1e-15);
    }

    #[test]
    fn ema_with_zero_decay_tracks_the_current_batch() {
        let mut ema = EmaState::new(0.0).unwrap();
        assert_eq!(ema.absorb(3.0), 3.0);
        assert_eq!(ema.absorb(7.0), 7.0);
    }

    #[test]
    fn ema_rejects_decay_outside_the_unit_interval() {
        assert!(EmaState::new(1.0).is_err());
        assert!(EmaState::new(-0.1).is_err());
    }

    /// With decay 0 the denominator equals the current batch mean, which
    /// makes the step's gradient the exact gradient of the plain batch loss
    /// `-(mean(T_joint) - log_mean_exp(T_marginal))`; central finite
    /// differences of that loss verify the assembled gradient.
    #[test]
    fn zero_decay_gradient_matches_finite_differences_of_the_batch_loss() {
        let mut rng = prng(31);
        let params = NetworkParams::init(3, &mut rng).unwrap();
        let xj = random_batch(6, 3, 32);
        let xm = random_batch(6, 3, 33);

        let loss = |p: &NetworkParams| -> f64 {
            let (sj, _) = p.forward(&xj).unwrap();
            let (sm, _) = p.forward(&xm).unwrap();
            -dv_objective(sj.data(), sm.data()).unwrap()
        };
        let grads = analytic_loss_gradient(&params, &xj, &xm);

        let h = 1e-5;
        let mut checked = 0;
        for r in (0..HIDDEN2).step_by(7) {
            let mut plus = params.clone();
            plus.w3.set(r, 0, plus.w3.get(r, 0) + h);
            let mut minus = params.clone();
            minus.w3.set(r, 0, minus.w3.get(r, 0) - h);
            let numeric = (loss(&plus) - loss(&minus)) / (2.0 * h);
            let analytic = grads.w3.get(r, 0);
            let rel = (numeric - analytic).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
            assert!(rel < 1e-4, "w3[{r},0]: {analytic} vs {numeric}");
            checked += 1;
        }
        assert!(checked > 10);
    }

    /// The output layer's loss gradient has a short closed form:
    /// `dL/dw3[k] = sum_m e^{T_m} a2_m[k] / (b Z) - mean_j a2_j[k]` and
    /// `dL/db3 = sum_m e^{T_m} / (b Z) - 1`, with `Z` the marginal batch
    /// mean of `e^T`.
    #[test]
    fn output_layer_gradient_matches_the_symbolic_form() {
        let mut rng = prng(41);
        let params = NetworkParams::init(2, &mut rng).unwrap();
        let xj = random_batch(5, 2, 42);
        let xm = random_batch(5, 2, 43);
        let b = 5.0;

        let (_, cj) = params.forward(&xj).unwrap();
        let (sm, cm) = params.forward(&xm).unwrap();
        let a2j = hidden2(&params, &xj);
        let a2m = hidden2(&params, &xm);
        let exp_t: Vec<f64> = sm.data().iter().map(|t| t.exp()).collect();
        let z = exp_t.iter().sum::<f64>() / b;

        let gj = params.backward(&cj, &[1.0 / b; 5]).unwrap();
        let up_m: Vec<f64> = exp_t.iter().map(|e| e / (b * z)).collect();
        let mut g = params.backward(&cm, &up_m).unwrap();
        g.zip_apply(&gj, |g, gjv| *g -= gjv);

        for k in (0..HIDDEN2).step_by(11) {
            let mut expect = 0.0;
            for (i, e) in exp_t.iter().enumerate() {
                expect += e * a2m.get(i, k) / (b * z) - a2j.get(i, k) / b;
            }
            let got = g.w3.get(k, 0);
            assert!((got - expect).abs() < 1e-10, "k={k}: {got} vs {expect}");
        }
        let expect_b3: f64 = exp_t.iter().sum::<f64>() / (b * z) - 1.0;
        assert!((g.b3[0] - expect_b3).abs() < 1e-10);
    }

    #[test]
    fn step_reports_the_unmodified_batch_bound() {
        let mut rng = prng(51);
        let mut params = NetworkParams::init(2, &mut rng).unwrap();
        let xj = random_batch(4, 2, 52);
        let xm = random_batch(4, 2, 53);
        let (sj, _) = params.forward(&xj).unwrap();
        let (sm, _) = params.forward(&xm).unwrap();
        let expect = dv_objective(sj.data(), sm.data()).unwrap();

        let mut ema = EmaState::new(0.99).unwrap();
        let mut adam = AdamState::new(1e-3, 2);
        let v = dv_gradient_step(&mut params, &xj, &xm, &mut ema, &mut adam).unwrap();
        assert!((v - expect).abs() < 1e-15);
        assert!(ema.value().is_some());
    }

    #[test]
    fn step_rejects_mismatched_batches() {
        let mut rng = prng(61);
        let mut params = NetworkParams::init(2, &mut rng).unwrap();
        let xj = random_batch(4, 2, 1);
        let xm = random_batch(3, 2, 2);
        let mut ema = EmaState::new(0.5).unwrap();
        let mut adam = AdamState::new(1e-3, 2);
        let err = dv_gradient_step(&mut params, &xj, &xm, &mut ema, &mut adam).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }
}
