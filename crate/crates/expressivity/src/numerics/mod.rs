//! Deterministic dense linear algebra and training primitives for the
//! statistics network: the matrix type, ELU, Xavier initialization, the
//! network's forward/backward passes, and Adam. Everything is `f64`.

mod activation;
mod adam;
mod init;
mod matrix;
mod network;

pub use activation::{elu, elu_deriv_from_output};
pub use adam::{adam_step, AdamState};
pub use init::xavier_normal_init;
pub use matrix::Matrix;
pub use network::{ForwardCache, NetworkParams, HIDDEN1, HIDDEN2};
