//! Fitted successor-feature learning and a matched fitted Q-iteration
//! baseline on tabular MDPs.
//!
//! The crate is organised bottom-up:
//!
//! - [`mdp`]: tabular MDPs, the gridworld and counterexample builders, sampling.
//! - [`features`]: one-hot basis, the linear SF model `ψ = Ψφ`, `Q = ψᵀw`.
//! - [`learn`]: losses, analytic gradients, Adagrad, ε-greedy exploration and
//!   the two agents.
//! - [`oracle`]: exact policy evaluation, exact successor features, value
//!   iteration and Monte-Carlo rollouts used as ground truth.
//! - [`experiments`]: the gridworld transfer protocols, repeated seeded runs
//!   and Welch's t-test.
//! - [`cli`]: config parsing, CSV output and the command implementations
//!   behind the `sftransfer` binary.
//!
//! State-action pairs are flattened as `s * num_actions + a` everywhere, so
//! columns of `Ψ`, entries of `w` and entries of `θ` line up.

pub mod checkpoint;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod features;
pub mod learn;
pub mod mdp;
pub mod oracle;

pub use error::{Error, Result};

/// Random source used by experiments. ChaCha is stable across platforms and
/// crate versions, which keeps CSV outputs reproducible from a seed.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Builds the simulation RNG for a seed.
pub fn sim_rng(seed: u64) -> SimRng {
    use rand::SeedableRng;
    SimRng::seed_from_u64(seed)
}
