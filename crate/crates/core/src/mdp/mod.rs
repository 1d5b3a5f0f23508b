//! Tabular MDPs, environment builders and transition/episode sampling.

mod counterexample;
mod grid;

pub use counterexample::{build_counterexample, CounterexampleVariant, ACTION_A, ACTION_B};
pub use grid::{build_gridworld, Cell, GridAction, GridSpec};

use rand::Rng;

use crate::{Error, Result};

const ROW_TOLERANCE: f64 = 1e-12;

/// Finite MDP with dense transition and reward tensors indexed `(s, a, s')`.
///
/// Terminal states are absorbing and reward-free. Episodes stop on entering
/// one, and learners treat them as contributing nothing after entry.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    num_states: usize,
    num_actions: usize,
    transition: Vec<f64>,
    reward: Vec<f64>,
    gamma: f64,
    terminal: Vec<bool>,
    start_states: Vec<usize>,
    /// Nonzero entries of each `(s, a)` row, in increasing `s'` order.
    successors: Vec<Vec<(usize, f64)>>,
}

/// One sampled step `(s, a, r, s', terminal(s'))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub s: usize,
    pub a: usize,
    pub r: f64,
    pub s_next: usize,
    pub terminal: bool,
}

impl TabularMdp {
    /// Builds an MDP and checks every invariant.
    ///
    /// `transition` and `reward` are flat, laid out as
    /// `(s * num_actions + a) * num_states + s'`.
    pub fn new(
        num_states: usize,
        num_actions: usize,
        transition: Vec<f64>,
        reward: Vec<f64>,
        gamma: f64,
        terminal: Vec<bool>,
        start_states: Vec<usize>,
    ) -> Result<Self> {
        let mut mdp = TabularMdp {
            num_states,
            num_actions,
            transition,
            reward,
            gamma,
            terminal,
            start_states,
            successors: Vec::new(),
        };
        mdp.validate()?;
        mdp.successors = (0..num_states * num_actions)
            .map(|sa| {
                let row = &mdp.transition[sa * num_states..(sa + 1) * num_states];
                row.iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(s2, &p)| (s2, p))
                    .collect()
            })
            .collect();
        Ok(mdp)
    }

    /// Checks the structural invariants: normalised non-negative rows,
    /// `gamma` in `[0, 1)`, absorbing reward-free terminals, valid starts.
    pub fn validate(&self) -> Result<()> {
        let (ns, na) = (self.num_states, self.num_actions);
        if ns == 0 || na == 0 {
            return Err(Error::InvalidMdp("need at least one state and one action".into()));
        }
        let cube = ns * na * ns;
        if self.transition.len() != cube || self.reward.len() != cube {
            return Err(Error::InvalidMdp(format!(
                "transition/reward tensors must have {cube} entries"
            )));
        }
        if self.terminal.len() != ns {
            return Err(Error::InvalidMdp("terminal flags must cover every state".into()));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::InvalidMdp(format!("gamma {} not in [0, 1)", self.gamma)));
        }
        for sa in 0..ns * na {
            let row = &self.transition[sa * ns..(sa + 1) * ns];
            if let Some(p) = row.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
                return Err(Error::InvalidMdp(format!("bad probability {p} in row {sa}")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::InvalidMdp(format!("row {sa} sums to {total}")));
            }
            if let Some(r) = self.reward[sa * ns..(sa + 1) * ns].iter().find(|r| !r.is_finite()) {
                return Err(Error::InvalidMdp(format!("non-finite reward {r} in row {sa}")));
            }
        }
        for s in (0..ns).filter(|&s| self.terminal[s]) {
            for a in 0..na {
                if self.p(s, a, s) != 1.0 || self.r(s, a, s) != 0.0 {
                    return Err(Error::InvalidMdp(format!(
                        "terminal state {s} must be absorbing with zero reward"
                    )));
                }
            }
        }
        if self.start_states.is_empty() {
            return Err(Error::InvalidMdp("no start states".into()));
        }
        for &s in &self.start_states {
            if s >= ns {
                return Err(Error::OutOfRange { what: "start state", index: s, limit: ns });
            }
        }
        Ok(())
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        self.terminal[s]
    }

    pub fn terminal_flags(&self) -> &[bool] {
        &self.terminal
    }

    pub fn start_states(&self) -> &[usize] {
        &self.start_states
    }

    #[inline]
    fn offset(&self, s: usize, a: usize) -> usize {
        (s * self.num_actions + a) * self.num_states
    }

    /// `p(s, a, s')`.
    pub fn p(&self, s: usize, a: usize, s_next: usize) -> f64 {
        self.transition[self.offset(s, a) + s_next]
    }

    /// `r(s, a, s')`.
    pub fn r(&self, s: usize, a: usize, s_next: usize) -> f64 {
        self.reward[self.offset(s, a) + s_next]
    }

    pub fn transition_row(&self, s: usize, a: usize) -> &[f64] {
        let o = self.offset(s, a);
        &self.transition[o..o + self.num_states]
    }

    pub fn transition_tensor(&self) -> &[f64] {
        &self.transition
    }

    pub fn reward_tensor(&self) -> &[f64] {
        &self.reward
    }

    /// Nonzero `(s', p)` pairs of the `(s, a)` row.
    pub fn successors(&self, s: usize, a: usize) -> &[(usize, f64)] {
        &self.successors[s * self.num_actions + a]
    }

    /// Expected immediate reward `Σ_{s'} p(s,a,s') r(s,a,s')`.
    pub fn expected_reward(&self, s: usize, a: usize) -> f64 {
        let o = self.offset(s, a);
        self.successors(s, a)
            .iter()
            .map(|&(s2, p)| p * self.reward[o + s2])
            .sum()
    }

    /// Returns a copy with a different discount factor.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        let mut out = self.clone();
        out.gamma = gamma;
        out.validate()?;
        Ok(out)
    }

    fn check_indices(&self, s: usize, a: usize) -> Result<()> {
        if s >= self.num_states {
            return Err(Error::OutOfRange { what: "state", index: s, limit: self.num_states });
        }
        if a >= self.num_actions {
            return Err(Error::OutOfRange { what: "action", index: a, limit: self.num_actions });
        }
        Ok(())
    }
}

/// Draws `s' ~ p(s, a, ·)` and returns the resulting transition.
pub fn sample_transition<R: Rng + ?Sized>(
    mdp: &TabularMdp,
    s: usize,
    a: usize,
    rng: &mut R,
) -> Result<Transition> {
    mdp.check_indices(s, a)?;
    if mdp.is_terminal(s) {
        return Err(Error::TerminalState(s));
    }
    let succ = mdp.successors(s, a);
    let s_next = if succ.len() == 1 {
        succ[0].0
    } else {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut chosen = succ[succ.len() - 1].0;
        for &(s2, p) in succ {
            acc += p;
            if u < acc {
                chosen = s2;
                break;
            }
        }
        chosen
    };
    Ok(Transition {
        s,
        a,
        r: mdp.r(s, a, s_next),
        s_next,
        terminal: mdp.is_terminal(s_next),
    })
}

/// Action-selection rule driven by [`run_episode`].
///
/// `observe` is called after every sampled step, which lets learning agents
/// update in the middle of an episode.
pub trait Policy {
    fn act<R: Rng + ?Sized>(&mut self, state: usize, rng: &mut R) -> Result<usize>;

    fn observe(&mut self, _transition: &Transition) -> Result<()> {
        Ok(())
    }
}

/// Fixed deterministic action per state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicPolicy(pub Vec<usize>);

impl Policy for DeterministicPolicy {
    fn act<R: Rng + ?Sized>(&mut self, state: usize, _rng: &mut R) -> Result<usize> {
        self.0
            .get(state)
            .copied()
            .ok_or(Error::OutOfRange { what: "state", index: state, limit: self.0.len() })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Episode {
    pub transitions: Vec<Transition>,
    pub steps: usize,
    /// True when the episode was cut off at the step cap.
    pub capped: bool,
}

/// Runs one episode from a start state until a terminal state or `step_cap`.
///
/// With several start states one is drawn uniformly; with a single start
/// state no randomness is consumed for it.
pub fn run_episode<P: Policy, R: Rng + ?Sized>(
    mdp: &TabularMdp,
    policy: &mut P,
    rng: &mut R,
    step_cap: usize,
) -> Result<Episode> {
    let starts = mdp.start_states();
    let mut s = if starts.len() == 1 {
        starts[0]
    } else {
        starts[rng.gen_range(0..starts.len())]
    };
    if mdp.is_terminal(s) {
        return Err(Error::TerminalState(s));
    }
    let mut episode = Episode::default();
    while episode.steps < step_cap {
        let a = policy.act(s, rng)?;
        let t = sample_transition(mdp, s, a, rng)?;
        policy.observe(&t)?;
        episode.transitions.push(t);
        episode.steps += 1;
        if t.terminal {
            return Ok(episode);
        }
        s = t.s_next;
    }
    episode.capped = true;
    Ok(episode)
}
