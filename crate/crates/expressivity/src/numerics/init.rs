//! Weight initialization.

use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::rng::Prng;

/// Draws a `fan_in x fan_out` weight matrix from the Xavier normal
/// distribution, `N(0, 2 / (fan_in + fan_out))`.
///
/// Entries are drawn in row-major order so a given generator state always
/// produces the same matrix.
pub fn xavier_normal_init(fan_in: usize, fan_out: usize, rng: &mut Prng) -> Result<Matrix> {
    if fan_in == 0 || fan_out == 0 {
        return Err(Error::Dimension(format!(
            "xavier init requires positive fan dimensions, got {fan_in}x{fan_out}"
        )));
    }
    let std = (2.0 / (fan_in + fan_out) as f64).sqrt();
    let normal = Normal::new(0.0, std).expect("finite positive std");
    let data: Vec<f64> = (0..fan_in * fan_out).map(|_| normal.sample(rng)).collect();
    Matrix::from_vec(fan_in, fan_out, data)
}
