//! The Donsker-Varadhan objective and its batch ingredients.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::Prng;

/// `log((1/b) * sum_i exp(t[i]))`, evaluated with max-subtraction so large
/// magnitudes neither overflow nor underflow.
pub fn log_mean_exp(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Dimension(
            "log_mean_exp requires a non-empty input".into(),
        ));
    }
    let max = values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let sum: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    Ok(max + (sum / values.len() as f64).ln())
}

/// The batch value of the Donsker-Varadhan bound:
/// `mean(t_joint) - log_mean_exp(t_marginal)`.
///
/// `t_joint` holds critic scores on paired samples, `t_marginal` scores on
/// pairing-broken samples; both must have the same length.
pub fn dv_objective(t_joint: &[f64], t_marginal: &[f64]) -> Result<f64> {
    if t_joint.len() != t_marginal.len() {
        return Err(Error::Dimension(format!(
            "joint and marginal score lengths differ: {} vs {}",
            t_joint.len(),
            t_marginal.len()
        )));
    }
    if t_joint.is_empty() {
        return Err(Error::Dimension(
            "objective requires a non-empty batch".into(),
        ));
    }
    let mean_joint = t_joint.iter().sum::<f64>() / t_joint.len() as f64;
    Ok(mean_joint - log_mean_exp(t_marginal)?)
}

/// Breaks the feature-attribute pairing of a minibatch by shuffling the
/// attribute values among themselves (Fisher-Yates on a copy).
///
/// The result holds exactly the same multiset of values in permuted order,
/// which turns the minibatch into a draw from the product of marginals.
pub fn shuffle_marginal(batch_attrs: &[f64], rng: &mut Prng) -> Result<Vec<f64>> {
    if batch_attrs.len() < 2 {
        return Err(Error::Batch(format!(
            "marginal shuffle needs a batch of at least 2, got {}",
            batch_attrs.len()
        )));
    }
    let mut shuffled = batch_attrs.to_vec();
    shuffled.shuffle(rng);
    Ok(shuffled)
}
