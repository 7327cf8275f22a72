//! Adam optimizer over the statistics network's parameter blocks.

use crate::error::{Error, Result};
use crate::numerics::NetworkParams;

/// Adam state: hyperparameters, step counter, and first/second moment
/// accumulators shaped like the parameters they track.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub t: u64,
    m: NetworkParams,
    v: NetworkParams,
}

impl AdamState {
    /// Fresh state with the standard moment decays (0.9, 0.999) and
    /// epsilon 1e-8.
    pub fn new(learning_rate: f64, d_in: usize) -> AdamState {
        AdamState {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            t: 0,
            m: NetworkParams::zeros(d_in),
            v: NetworkParams::zeros(d_in),
        }
    }
}

/// One Adam update of `params` against `grads`, with bias-corrected moment
/// estimates. Rejects non-finite gradients, naming the offending block.
pub fn adam_step(
    params: &mut NetworkParams,
    grads: &NetworkParams,
    state: &mut AdamState,
) -> Result<()> {
    if params.d_in != grads.d_in || params.d_in != state.m.d_in {
        return Err(Error::Dimension(
            "parameters, gradients, and optimizer state have mismatched shapes".into(),
        ));
    }
    for (name, block) in grads.blocks() {
        if block.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite gradient in block {name}"
            )));
        }
    }

    state.t += 1;
    let (b1, b2) = (state.beta1, state.beta2);
    let bc1 = 1.0 - b1.powi(state.t as i32);
    let bc2 = 1.0 - b2.powi(state.t as i32);
    let lr = state.learning_rate;
    let eps = state.epsilon;

    state.m.zip_apply(grads, |m, g| *m = b1 * *m + (1.0 - b1) * g);
    state.v.zip_apply(grads, |v, g| *v = b2 * *v + (1.0 - b2) * g * g);
    apply_update(params, &state.m, &state.v, lr, eps, bc1, bc2);
    Ok(())
}

fn apply_update(
    params: &mut NetworkParams,
    m: &NetworkParams,
    v: &NetworkParams,
    lr: f64,
    eps: f64,
    bc1: f64,
    bc2: f64,
) {
    let update = |p: &mut [f64], m: &[f64], v: &[f64]| {
        for ((p, m), v) in p.iter_mut().zip(m).zip(v) {
            let m_hat = m / bc1;
            let v_hat = v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    };
    update(params.w1.data_mut(), m.w1.data(), v.w1.data());
    update(&mut params.b1, &m.b1, &v.b1);
    update(params.w2.data_mut(), m.w2.data(), v.w2.data());
    update(&mut params.b2, &m.b2, &v.b2);
    update(params.w3.data_mut(), m.w3.data(), v.w3.data());
    update(&mut params.b3, &m.b3, &v.b3);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::prng;

    #[test]
    fn zero_gradients_from_fresh_state_leave_parameters_unchanged() {
        let mut rng = prng(2);
        let mut params = NetworkParams::init(3, &mut rng).unwrap();
        let before = params.clone();
        let grads = NetworkParams::zeros(3);
        let mut state = AdamState::new(1e-3, 3);
        adam_step(&mut params, &grads, &mut state).unwrap();
        assert_eq!(params, before);
        assert_eq!(state.t, 1);
    }

    #[test]
    fn first_step_moves_each_coordinate_by_the_learning_rate() {
        // With bias correction, the first update is lr * g / (|g| + eps'),
        // i.e. lr * sign(g) up to epsilon-level error.
        let mut params = NetworkParams::zeros(2);
        let mut grads = NetworkParams::zeros(2);
        grads.w1.set(0, 0, 0.37);
        grads.w1.set(1, 1, -4.2);
        grads.b2[5] = 1e-3;
        let mut state = AdamState::new(1e-3, 2);
        adam_step(&mut params, &grads, &mut state).unwrap();
        assert!((params.w1.get(0, 0) + 1e-3).abs() < 1e-10);
        assert!((params.w1.get(1, 1) - 1e-3).abs() < 1e-10);
        // Epsilon shifts a gradient of 1e-3 by about lr * eps / |g| = 1e-8.
        assert!((params.b2[5] + 1e-3).abs() < 2e-8);
        // Untouched coordinates stay put.
        assert_eq!(params.w2.get(0, 0), 0.0);
    }

    #[test]
    fn steps_are_deterministic() {
        let mut rng = prng(8);
        let grads = NetworkParams::init(2, &mut rng).unwrap();
        let run = || {
            let mut params = NetworkParams::zeros(2);
            let mut state = AdamState::new(1e-3, 2);
            for _ in 0..5 {
                adam_step(&mut params, &grads, &mut state).unwrap();
            }
            params
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn non_finite_gradients_name_the_offending_block() {
        let mut params = NetworkParams::zeros(2);
        let mut grads = NetworkParams::zeros(2);
        grads.b2[3] = f64::NAN;
        let mut state = AdamState::new(1e-3, 2);
        let err = adam_step(&mut params, &grads, &mut state).unwrap_err();
        assert!(err.to_string().contains("block b2"), "{err}");
        assert!(matches!(err, Error::Numeric(_)));
    }
}
