use rayon::prelude::*;

use super::protocol::{AgentKind, AgentSpec, Protocol};
use super::stats::{mean, variance, welch_t_test, WelchTest};
use crate::features::OneHotBasis;
use crate::learn::{Agent, EpsilonGreedy, EpsilonSchedule, FittedQ, FittedSf, LossRecord};
use crate::mdp::{build_gridworld, run_episode};
use crate::{sim_rng, Result};

/// Everything recorded during one run of one agent on one protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    pub protocol: String,
    pub agent: String,
    pub seed: u64,
    pub steps: Vec<usize>,
    pub capped: Vec<bool>,
    pub phase: Vec<usize>,
    pub losses: Vec<LossRecord>,
    pub episodes_per_phase: usize,
}

impl LearningCurve {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn mean_steps(&self) -> f64 {
        self.mean_over(0..self.len())
    }

    pub fn mean_over(&self, range: std::ops::Range<usize>) -> f64 {
        let xs = &self.steps[range];
        xs.iter().sum::<usize>() as f64 / xs.len() as f64
    }

    /// Episode index range of phase `p`.
    pub fn phase_range(&self, p: usize) -> std::ops::Range<usize> {
        p * self.episodes_per_phase..(p + 1) * self.episodes_per_phase
    }

    pub fn capped_fraction(&self, range: std::ops::Range<usize>) -> f64 {
        let xs = &self.capped[range];
        xs.iter().filter(|&&c| c).count() as f64 / xs.len() as f64
    }
}

fn build_agent(spec: &AgentSpec, basis: OneHotBasis, gamma: f64, rng: &mut crate::SimRng) -> Result<Box<dyn Agent + Send>> {
    Ok(match spec.kind {
        AgentKind::FittedSf => Box::new(FittedSf::new(basis, gamma, spec.config.clone(), rng)?),
        AgentKind::FittedQ => Box::new(FittedQ::new(basis, gamma, spec.config.clone(), rng)?),
    })
}

/// Runs every phase of `protocol` with one agent. On each phase change the
/// agent's reset strategy is applied and the ε schedule restarts at t = 0.
pub fn run_protocol(protocol: &Protocol, spec: &AgentSpec, seed: u64) -> Result<LearningCurve> {
    protocol.validate()?;
    let mdps = protocol
        .phases
        .iter()
        .map(|p| build_gridworld(&protocol.grid_spec(p), protocol.gamma))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = sim_rng(seed);
    let basis = OneHotBasis::new(protocol.width * protocol.height, 4)?;
    let mut agent = build_agent(spec, basis, protocol.gamma, &mut rng)?;
    let mut schedule = EpsilonSchedule::new(protocol.epsilon)?;

    let n = protocol.total_episodes();
    let mut curve = LearningCurve {
        protocol: protocol.kind.to_string(),
        agent: spec.name.clone(),
        seed,
        steps: Vec::with_capacity(n),
        capped: Vec::with_capacity(n),
        phase: Vec::with_capacity(n),
        losses: Vec::new(),
        episodes_per_phase: protocol.episodes_per_phase,
    };
    for (p, mdp) in mdps.iter().enumerate() {
        if p > 0 {
            agent.task_changed(&mut rng);
            schedule.reset();
        }
        for _ in 0..protocol.episodes_per_phase {
            let mut controller = EpsilonGreedy::new(agent.as_mut(), schedule.current());
            let episode = run_episode(mdp, &mut controller, &mut rng, protocol.step_cap)?;
            curve.steps.push(episode.steps);
            curve.capped.push(episode.capped);
            curve.phase.push(p);
            schedule.advance();
        }
    }
    curve.losses = agent.losses().to_vec();
    Ok(curve)
}

/// Per-agent aggregate over repetitions.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentSummary {
    pub agent: String,
    /// Mean episode length of each repetition.
    pub run_means: Vec<f64>,
    pub mean_steps: f64,
    /// Population standard deviation (ddof = 0) of `run_means`.
    pub std_steps: f64,
    /// Mean and population std of the step count at each episode index.
    pub per_episode: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub agents: Vec<AgentSummary>,
    /// Welch's test between the first two agents' run means.
    pub welch: Option<WelchTest>,
    /// `curves[i][r]`: agent `i`, repetition `r`.
    pub curves: Vec<Vec<LearningCurve>>,
}

/// Seed of repetition `r`. Every agent sees the same seed for the same `r`.
pub fn repeat_seed(base_seed: u64, r: usize) -> u64 {
    base_seed.wrapping_add(r as u64)
}

fn summarize_agent(curves: &[LearningCurve]) -> AgentSummary {
    let run_means: Vec<f64> = curves.iter().map(LearningCurve::mean_steps).collect();
    let episodes = curves.iter().map(LearningCurve::len).min().unwrap_or(0);
    let per_episode = (0..episodes)
        .map(|e| {
            let xs: Vec<f64> = curves.iter().map(|c| c.steps[e] as f64).collect();
            (mean(&xs), variance(&xs, 0).sqrt())
        })
        .collect();
    AgentSummary {
        agent: curves.first().map(|c| c.agent.clone()).unwrap_or_default(),
        mean_steps: mean(&run_means),
        std_steps: variance(&run_means, 0).sqrt(),
        run_means,
        per_episode,
    }
}

/// Runs `num_repeats` seeded repetitions of every agent (in parallel).
/// `result[i][r]` is agent `i`, repetition `r`.
pub fn run_repeats(
    protocol: &Protocol,
    agents: &[AgentSpec],
    num_repeats: usize,
    base_seed: u64,
) -> Result<Vec<Vec<LearningCurve>>> {
    if num_repeats == 0 {
        return Err(crate::Error::Config("repeats must be positive".into()));
    }
    protocol.validate()?;
    let jobs: Vec<(usize, usize)> = (0..agents.len())
        .flat_map(|i| (0..num_repeats).map(move |r| (i, r)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(i, r)| run_protocol(protocol, &agents[i], repeat_seed(base_seed, r)))
        .collect::<Result<Vec<_>>>()?;
    let mut curves: Vec<Vec<LearningCurve>> = vec![Vec::with_capacity(num_repeats); agents.len()];
    for ((i, _), c) in jobs.into_iter().zip(results) {
        curves[i].push(c);
    }
    Ok(curves)
}

/// Aggregates curves grouped per agent. The Welch test is only computed
/// when the first two agents both have at least two repetitions.
pub fn summarize(curves: Vec<Vec<LearningCurve>>) -> Result<Summary> {
    let summaries: Vec<AgentSummary> = curves.iter().map(|c| summarize_agent(c)).collect();
    let welch = match summaries.as_slice() {
        [a, b, ..] if a.run_means.len() >= 2 && b.run_means.len() >= 2 => {
            Some(welch_t_test(&a.run_means, &b.run_means)?)
        }
        _ => None,
    };
    Ok(Summary { agents: summaries, welch, curves })
}

/// Runs `num_repeats` seeded repetitions of every agent and aggregates them
/// in seed order.
pub fn repeat_and_summarize(
    protocol: &Protocol,
    agents: &[AgentSpec],
    num_repeats: usize,
    base_seed: u64,
) -> Result<Summary> {
    if num_repeats < 2 {
        return Err(crate::Error::Config("need at least two repetitions".into()));
    }
    summarize(run_repeats(protocol, agents, num_repeats, base_seed)?)
}
