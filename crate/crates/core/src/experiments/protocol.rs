use std::fmt;
use std::str::FromStr;

use crate::learn::{AgentConfig, EpsilonKind, ResetStrategy, TieBreak};
use crate::mdp::{Cell, GridSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtocolKind {
    /// One fixed goal, constant ε = 0.3.
    SingleTask,
    /// Start and goal shift by one cell every phase; three positions, cycled.
    SlightShift,
    /// Goal rotates through the four corners, ε annealed per phase.
    CornerRotation,
    /// Corner rotation with 400-episode phases, constant ε = 0.3 and
    /// lowest-index argmax ties.
    FailureCase,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 4] =
        [ProtocolKind::SingleTask, ProtocolKind::SlightShift, ProtocolKind::CornerRotation, ProtocolKind::FailureCase];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::SingleTask => "single_task",
            ProtocolKind::SlightShift => "slight_shift",
            ProtocolKind::CornerRotation => "corner_rotation",
            ProtocolKind::FailureCase => "failure_case",
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProtocolKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown protocol {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentKind {
    FittedSf,
    FittedQ,
}

/// A named learner with its full configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentSpec {
    pub name: String,
    pub kind: AgentKind,
    pub config: AgentConfig,
}

/// One reward configuration: where episodes start and where the goal is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phase {
    pub start: Cell,
    pub goal: Cell,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    pub kind: ProtocolKind,
    pub width: usize,
    pub height: usize,
    pub slip_prob: f64,
    pub goal_reward: f64,
    pub gamma: f64,
    pub episodes_per_phase: usize,
    pub step_cap: usize,
    pub phases: Vec<Phase>,
    pub epsilon: EpsilonKind,
    pub batch_size: usize,
    /// Learning rates of the `sf` agent: (Ψ, w).
    pub sf_rates: (f64, f64),
    /// Learning rates of the `sf-reset-all` agent: (Ψ, w).
    pub sf_reset_all_rates: (f64, f64),
    pub fqi_rate: f64,
    pub sf_reset: ResetStrategy,
    pub fqi_reset: ResetStrategy,
    /// Settings shared by every agent (init, tie-break, Adagrad constants,
    /// target expectation policy). Learning rates and reset strategies in
    /// here are overwritten per agent.
    pub agent_defaults: AgentConfig,
}

const SIZE: usize = 10;

fn corners(width: usize, height: usize) -> [Cell; 4] {
    let (r, t) = (width - 1, height - 1);
    // clockwise from the top-right
    [Cell::new(r, t), Cell::new(r, 0), Cell::new(0, 0), Cell::new(0, t)]
}

/// Goal rotates through the corners; start is the diagonally opposite one.
pub fn corner_phases(width: usize, height: usize, num_phases: usize) -> Vec<Phase> {
    let c = corners(width, height);
    (0..num_phases)
        .map(|i| Phase { goal: c[i % 4], start: c[(i + 2) % 4] })
        .collect()
}

/// Goal on the top edge and start on the bottom edge, both shifted one cell
/// left per phase from the right-hand column; three positions, cycled.
pub fn shift_phases(width: usize, height: usize, num_phases: usize) -> Vec<Phase> {
    (0..num_phases)
        .map(|i| {
            let col = width - 1 - (i % 3).min(width - 1);
            Phase { start: Cell::new(col, 0), goal: Cell::new(col, height - 1) }
        })
        .collect()
}

impl Protocol {
    pub fn defaults(kind: ProtocolKind) -> Self {
        let base = Protocol {
            kind,
            width: SIZE,
            height: SIZE,
            slip_prob: 0.05,
            goal_reward: 1.0,
            gamma: 0.9,
            episodes_per_phase: 600,
            step_cap: 4000,
            phases: vec![Phase { start: Cell::new(SIZE - 1, 0), goal: Cell::new(SIZE - 1, SIZE - 1) }],
            epsilon: EpsilonKind::Constant(0.3),
            batch_size: 100,
            sf_rates: (0.01, 0.1),
            sf_reset_all_rates: (0.01, 0.1),
            fqi_rate: 0.01,
            sf_reset: ResetStrategy::ResetWOnly,
            fqi_reset: ResetStrategy::KeepAll,
            agent_defaults: AgentConfig::default(),
        };
        match kind {
            ProtocolKind::SingleTask => base,
            ProtocolKind::SlightShift => Protocol {
                episodes_per_phase: 400,
                step_cap: 200,
                phases: shift_phases(SIZE, SIZE, 6),
                sf_rates: (0.0001, 0.1),
                sf_reset_all_rates: (0.001, 0.01),
                fqi_rate: 0.1,
                ..base
            },
            ProtocolKind::CornerRotation => Protocol {
                episodes_per_phase: 100,
                step_cap: 4000,
                phases: corner_phases(SIZE, SIZE, 12),
                epsilon: EpsilonKind::ANNEALED,
                fqi_reset: ResetStrategy::ResetAll,
                ..base
            },
            ProtocolKind::FailureCase => Protocol {
                episodes_per_phase: 400,
                step_cap: 200,
                phases: corner_phases(SIZE, SIZE, 5),
                agent_defaults: AgentConfig { tie_break: TieBreak::LowestIndex, ..AgentConfig::default() },
                ..base
            },
        }
    }

    pub fn grid_spec(&self, phase: &Phase) -> GridSpec {
        GridSpec {
            width: self.width,
            height: self.height,
            start: phase.start,
            goal: phase.goal,
            slip_prob: self.slip_prob,
            goal_reward: self.goal_reward,
        }
    }

    pub fn total_episodes(&self) -> usize {
        self.episodes_per_phase * self.phases.len()
    }

    /// Rejects inconsistent settings before anything runs.
    pub fn validate(&self) -> Result<()> {
        if self.phases.is_empty() {
            return Err(Error::Config("protocol needs at least one phase".into()));
        }
        if self.episodes_per_phase == 0 || self.step_cap == 0 {
            return Err(Error::Config("episodes_per_phase and step_cap must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("gamma {} not in [0, 1)", self.gamma)));
        }
        for p in &self.phases {
            self.grid_spec(p).validate()?;
        }
        self.epsilon.validate()?;
        for name in ["sf", "fqi", "sf-reset-all"] {
            self.agent(name)?.config.validate()?;
        }
        if self.fqi_reset == ResetStrategy::ResetWOnly {
            return Err(Error::Config("fqi_reset must be keep_all or reset_all".into()));
        }
        Ok(())
    }

    /// Resolves an agent name: `sf`, `fqi`, or `sf-reset-all`.
    pub fn agent(&self, name: &str) -> Result<AgentSpec> {
        let base = AgentConfig { batch_size: self.batch_size, ..self.agent_defaults.clone() };
        let (kind, config) = match name {
            "sf" => (
                AgentKind::FittedSf,
                AgentConfig { lr_sf: self.sf_rates.0, lr_reward: self.sf_rates.1, reset_strategy: self.sf_reset, ..base },
            ),
            "sf-reset-all" => (
                AgentKind::FittedSf,
                AgentConfig {
                    lr_sf: self.sf_reset_all_rates.0,
                    lr_reward: self.sf_reset_all_rates.1,
                    reset_strategy: ResetStrategy::ResetAll,
                    ..base
                },
            ),
            "fqi" => (AgentKind::FittedQ, AgentConfig { lr_q: self.fqi_rate, reset_strategy: self.fqi_reset, ..base }),
            other => return Err(Error::Config(format!("unknown agent {other:?} (expected sf, fqi, sf-reset-all)"))),
        };
        Ok(AgentSpec { name: name.to_string(), kind, config })
    }
}
