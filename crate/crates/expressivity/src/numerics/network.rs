//! The statistics network: a fixed two-hidden-layer scalar-output MLP with
//! hand-written forward and backward passes.
//!
//! Architecture: `d_in -> 512 -> 128 -> 1` with ELU after each hidden layer
//! and a linear output. The backward pass returns exact analytic gradients
//! of `sum_i upstream[i] * score[i]` with respect to every parameter, which
//! is the only derivative the estimator needs: picking `upstream` turns it
//! into the joint or the weighted marginal term of the training gradient.

use crate::error::{Error, Result};
use crate::numerics::activation::{elu, elu_deriv_from_output};
use crate::numerics::init::xavier_normal_init;
use crate::numerics::Matrix;
use crate::rng::Prng;

/// Width of the first hidden layer.
pub const HIDDEN1: usize = 512;
/// Width of the second hidden layer.
pub const HIDDEN2: usize = 128;

/// Parameters of the statistics network (or a same-shaped block of
/// gradients or optimizer moments).
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub d_in: usize,
    pub w1: Matrix,
    pub b1: Vec<f64>,
    pub w2: Matrix,
    pub b2: Vec<f64>,
    pub w3: Matrix,
    pub b3: Vec<f64>,
}

/// Intermediate activations kept from a forward pass for use by `backward`.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    input: Matrix,
    a1: Matrix,
    a2: Matrix,
}

impl NetworkParams {
    /// Fresh parameters: Xavier-normal weights drawn layer by layer from
    /// `rng`, biases zero.
    pub fn init(d_in: usize, rng: &mut Prng) -> Result<NetworkParams> {
        if d_in == 0 {
            return Err(Error::Dimension(
                "network input dimension must be at least 1".into(),
            ));
        }
        Ok(NetworkParams {
            d_in,
            w1: xavier_normal_init(d_in, HIDDEN1, rng)?,
            b1: vec![0.0; HIDDEN1],
            w2: xavier_normal_init(HIDDEN1, HIDDEN2, rng)?,
            b2: vec![0.0; HIDDEN2],
            w3: xavier_normal_init(HIDDEN2, 1, rng)?,
            b3: vec![0.0; 1],
        })
    }

    /// All-zero parameter block of the same shape family; used for
    /// gradients and optimizer moments.
    pub fn zeros(d_in: usize) -> NetworkParams {
        NetworkParams {
            d_in,
            w1: Matrix::zeros(d_in, HIDDEN1),
            b1: vec![0.0; HIDDEN1],
            w2: Matrix::zeros(HIDDEN1, HIDDEN2),
            b2: vec![0.0; HIDDEN2],
            w3: Matrix::zeros(HIDDEN2, 1),
            b3: vec![0.0; 1],
        }
    }

    /// Scores a batch: returns a `b x 1` matrix of critic values along with
    /// the cache the backward pass needs.
    pub fn forward(&self, input: &Matrix) -> Result<(Matrix, ForwardCache)> {
        if input.cols() != self.d_in {
            return Err(Error::Dimension(format!(
                "input has {} columns but the network expects {}",
                input.cols(),
                self.d_in
            )));
        }
        if input.rows() == 0 {
            return Err(Error::Dimension("input batch is empty".into()));
        }
        let mut a1 = input.matmul(&self.w1)?;
        a1.add_row_broadcast(&self.b1);
        for v in a1.data_mut() {
            *v = elu(*v);
        }
        let mut a2 = a1.matmul(&self.w2)?;
        a2.add_row_broadcast(&self.b2);
        for v in a2.data_mut() {
            *v = elu(*v);
        }
        let mut scores = a2.matmul(&self.w3)?;
        scores.add_row_broadcast(&self.b3);
        let cache = ForwardCache {
            input: input.clone(),
            a1,
            a2,
        };
        Ok((scores, cache))
    }

    /// Gradients of `sum_i upstream[i] * score[i]` with respect to every
    /// parameter, given the cache of the forward pass that produced the
    /// scores. The cache must come from the latest `forward` on these
    /// parameters; a cache whose shapes disagree is rejected.
    pub fn backward(&self, cache: &ForwardCache, upstream: &[f64]) -> Result<NetworkParams> {
        let b = cache.input.rows();
        if cache.input.cols() != self.d_in
            || cache.a1.cols() != HIDDEN1
            || cache.a2.cols() != HIDDEN2
            || cache.a1.rows() != b
            || cache.a2.rows() != b
        {
            return Err(Error::Usage(
                "forward cache does not match this network".into(),
            ));
        }
        if upstream.len() != b {
            return Err(Error::Dimension(format!(
                "upstream length {} does not match batch size {}",
                upstream.len(),
                b
            )));
        }

        // dz3 = upstream, as a b x 1 matrix.
        let dz3 = Matrix::from_vec(b, 1, upstream.to_vec())?;
        let g_w3 = cache.a2.matmul_tn(&dz3)?;
        let g_b3 = dz3.col_sums();

        let mut dz2 = dz3.matmul_nt(&self.w3)?;
        for (d, a) in dz2.data_mut().iter_mut().zip(cache.a2.data()) {
            *d *= elu_deriv_from_output(*a);
        }
        let g_w2 = cache.a1.matmul_tn(&dz2)?;
        let g_b2 = dz2.col_sums();

        let mut dz1 = dz2.matmul_nt(&self.w2)?;
        for (d, a) in dz1.data_mut().iter_mut().zip(cache.a1.data()) {
            *d *= elu_deriv_from_output(*a);
        }
        let g_w1 = cache.input.matmul_tn(&dz1)?;
        let g_b1 = dz1.col_sums();

        Ok(NetworkParams {
            d_in: self.d_in,
            w1: g_w1,
            b1: g_b1,
            w2: g_w2,
            b2: g_b2,
            w3: g_w3,
            b3: g_b3,
        })
    }

    /// Applies `f` to each corresponding entry pair of the six blocks of
    /// `self` and `other`, mutating `self`.
    pub fn zip_apply(&mut self, other: &NetworkParams, mut f: impl FnMut(&mut f64, f64)) {
        assert_eq!(self.d_in, other.d_in, "parameter shapes must match");
        for (a, b) in self.w1.data_mut().iter_mut().zip(other.w1.data()) {
            f(a, *b);
        }
        for (a, b) in self.b1.iter_mut().zip(&other.b1) {
            f(a, *b);
        }
        for (a, b) in self.w2.data_mut().iter_mut().zip(other.w2.data()) {
            f(a, *b);
        }
        for (a, b) in self.b2.iter_mut().zip(&other.b2) {
            f(a, *b);
        }
        for (a, b) in self.w3.data_mut().iter_mut().zip(other.w3.data()) {
            f(a, *b);
        }
        for (a, b) in self.b3.iter_mut().zip(&other.b3) {
            f(a, *b);
        }
    }

    /// The six named parameter blocks, weights interleaved with biases.
    pub fn blocks(&self) -> [(&'static str, &[f64]); 6] {
        [
            ("w1", self.w1.data()),
            ("b1", &self.b1),
            ("w2", self.w2.data()),
            ("b2", &self.b2),
            ("w3", self.w3.data()),
            ("b3", &self.b3),
        ]
    }
}
