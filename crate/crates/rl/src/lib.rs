//! From-scratch dense-network machinery and the three policy-optimization
//! agents used on the link simulator.
//!
//! - [`mlp`] — multilayer perceptron with exact reverse-mode gradients and
//!   forward-mode directional derivatives.
//! - [`adam`] — bias-corrected adaptive-moment updates on flat parameters.
//! - [`gaussian`] — diagonal-Gaussian policy head: sampling, log-density,
//!   entropy and KL in closed form.
//! - [`replay`] — bounded uniform replay buffer.
//! - [`gae`] — generalized advantage estimation.
//! - [`td3`] — twin-critic delayed deterministic policy gradient.
//! - [`a3c`] — advantage actor-critic with gradient-accumulating workers.
//! - [`trpo`] — trust-region policy optimization with conjugate-gradient
//!   steps and backtracking line search.
//! - [`checkpoint`] — flat binary parameter snapshots plus JSON metadata.
//! - [`diag`] — per-update diagnostics appended to CSV.

pub mod a3c;
pub mod adam;
pub mod checkpoint;
pub mod diag;
pub mod error;
pub mod gae;
pub mod gaussian;
pub mod mlp;
pub mod replay;
pub mod td3;
pub mod trpo;

pub use adam::AdamState;
pub use error::RlError;
pub use gaussian::GaussianPolicy;
pub use mlp::Mlp;
pub use replay::{BufferItem, ReplayBuffer};
