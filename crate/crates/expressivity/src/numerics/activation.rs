//! Exponential linear unit.

/// ELU with unit scale: `x` for `x > 0`, `exp(x) - 1` otherwise.
pub fn elu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        x.exp() - 1.0
    }
}

/// Derivative of [`elu`], expressed through the activation value itself.
///
/// For `x <= 0` the output `a = exp(x) - 1` satisfies `elu'(x) = a + 1`
/// exactly, so the backward pass never needs the pre-activation.
pub fn elu_deriv_from_output(a: f64) -> f64 {
    if a > 0.0 {
        1.0
    } else {
        a + 1.0
    }
}
