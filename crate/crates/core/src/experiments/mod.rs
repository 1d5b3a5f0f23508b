//! Gridworld transfer protocols, repeated seeded runs and summary statistics.

pub mod counterexample;
pub mod protocol;
pub mod runner;
pub mod stats;
pub mod sweep;

pub use protocol::{AgentKind, AgentSpec, Phase, Protocol, ProtocolKind};
pub use counterexample::{analyze_counterexample, CounterexampleReport};
pub use runner::{
    repeat_and_summarize, repeat_seed, run_protocol, run_repeats, summarize, AgentSummary, LearningCurve, Summary,
};
pub use sweep::{learning_rate_grid, sweep, SweepResult, SweepRow};
pub use stats::{welch_t_test, WelchTest};
