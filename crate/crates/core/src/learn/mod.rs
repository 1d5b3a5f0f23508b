//! Fitted SF learning and fitted Q-iteration.
//!
//! Both agents buffer transitions and perform one Adagrad update per
//! `batch_size` collected steps, with bootstrap targets taken from a copy of
//! the parameters frozen at the previous update.

mod adagrad;
mod agent;
mod explore;
pub mod loss;

pub use adagrad::Adagrad;
pub use agent::{Agent, EpsilonGreedy, FittedQ, FittedSf, LossName, LossRecord};
pub use explore::{epsilon_greedy_probs, select_action, EpsilonKind, EpsilonSchedule, TieBreak};
pub use loss::SfTarget;

use rand::Rng;

use crate::mdp::{sample_transition, TabularMdp};
use crate::{Error, Result};

/// What happens to an agent's parameters when the reward function changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResetStrategy {
    /// Zero the reward weights `w`, keep `Ψ`.
    ResetWOnly,
    /// Reinitialise every parameter.
    ResetAll,
    KeepAll,
}

/// Policy whose action distribution at `s'` weights `ψ'(s', ·)` in the SF target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpectationPolicy {
    /// The agent's current ε-greedy behaviour policy.
    Behavior,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitScheme {
    Zero,
    /// Entries drawn uniformly from `[-scale, scale]`.
    Uniform { scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    pub lr_sf: f64,
    pub lr_reward: f64,
    pub lr_q: f64,
    pub batch_size: usize,
    pub reset_strategy: ResetStrategy,
    pub expectation_policy: ExpectationPolicy,
    pub tie_break: TieBreak,
    pub init: InitScheme,
    pub adagrad_epsilon: f64,
    pub initial_accumulator: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            lr_sf: 0.01,
            lr_reward: 0.1,
            lr_q: 0.01,
            batch_size: 100,
            reset_strategy: ResetStrategy::ResetWOnly,
            expectation_policy: ExpectationPolicy::Behavior,
            tie_break: TieBreak::Random,
            init: InitScheme::Zero,
            adagrad_epsilon: Adagrad::DEFAULT_EPSILON,
            initial_accumulator: Adagrad::DEFAULT_INITIAL_ACCUMULATOR,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, lr) in [("lr_sf", self.lr_sf), ("lr_reward", self.lr_reward), ("lr_q", self.lr_q)] {
            if !(lr.is_finite() && lr > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {lr}")));
            }
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if !(self.adagrad_epsilon.is_finite() && self.adagrad_epsilon > 0.0) {
            return Err(Error::Config("adagrad_epsilon must be positive".into()));
        }
        if !(self.initial_accumulator.is_finite() && self.initial_accumulator >= 0.0) {
            return Err(Error::Config("initial_accumulator must be non-negative".into()));
        }
        if let InitScheme::Uniform { scale } = self.init {
            if !(scale.is_finite() && scale >= 0.0) {
                return Err(Error::Config("init scale must be non-negative".into()));
            }
        }
        Ok(())
    }
}

/// Where the agent currently is in the environment between calls to
/// [`fitted_sf_step`] / [`fitted_q_step`]. Collection continues across
/// episode boundaries.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Cursor {
    state: Option<usize>,
}

/// Collects transitions with the ε-greedy policy until the agent has
/// performed exactly one update.
pub fn collect_and_update<A: Agent + ?Sized, R: Rng + ?Sized>(
    agent: &mut A,
    mdp: &TabularMdp,
    cursor: &mut Cursor,
    epsilon: f64,
    rng: &mut R,
) -> Result<()> {
    let starts = mdp.start_states();
    let before = agent.updates();
    let mut q = vec![0.0; mdp.num_actions()];
    while agent.updates() == before {
        let s = match cursor.state {
            Some(s) => s,
            None if starts.len() == 1 => starts[0],
            None => starts[rng.gen_range(0..starts.len())],
        };
        agent.q_values_into(s, &mut q);
        let a = select_action(&q, epsilon, agent.tie_break(), rng);
        let t = sample_transition(mdp, s, a, rng)?;
        agent.observe(t, epsilon)?;
        cursor.state = (!t.terminal).then_some(t.s_next);
    }
    Ok(())
}

/// One fitted-SF iteration: collect `batch_size` transitions with the
/// ε-greedy policy over `ψᵀw`, then update `w` and `Ψ` once each.
pub fn fitted_sf_step<R: Rng + ?Sized>(
    agent: &mut FittedSf,
    mdp: &TabularMdp,
    cursor: &mut Cursor,
    epsilon: f64,
    rng: &mut R,
) -> Result<()> {
    collect_and_update(agent, mdp, cursor, epsilon, rng)
}

/// One fitted Q-iteration step, matched to [`fitted_sf_step`].
pub fn fitted_q_step<R: Rng + ?Sized>(
    agent: &mut FittedQ,
    mdp: &TabularMdp,
    cursor: &mut Cursor,
    epsilon: f64,
    rng: &mut R,
) -> Result<()> {
    collect_and_update(agent, mdp, cursor, epsilon, rng)
}
