use rand::Rng;

use crate::{Error, Result};

/// How ε evolves with the episode index `t` of the current task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonKind {
    Constant(f64),
    /// `ε_t = scale · base^t + floor`.
    Decay { scale: f64, base: f64, floor: f64 },
}

impl EpsilonKind {
    /// Anneals from 1.0 towards 0.1: `ε_t = 0.9 · 0.95^t + 0.1`.
    pub const ANNEALED: EpsilonKind = EpsilonKind::Decay { scale: 0.9, base: 0.95, floor: 0.1 };

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            EpsilonKind::Constant(e) => (0.0..=1.0).contains(&e),
            EpsilonKind::Decay { scale, base, floor } => {
                scale >= 0.0 && floor >= 0.0 && scale + floor <= 1.0 && (0.0..=1.0).contains(&base)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("epsilon schedule {self:?} can leave [0, 1]")))
        }
    }

    pub fn at(&self, t: usize) -> f64 {
        let e = match *self {
            EpsilonKind::Constant(e) => e,
            EpsilonKind::Decay { scale, base, floor } => scale * base.powi(t.min(i32::MAX as usize) as i32) + floor,
        };
        e.clamp(0.0, 1.0)
    }
}

/// ε schedule together with the episode index of the current task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonSchedule {
    pub kind: EpsilonKind,
    episode: usize,
}

impl EpsilonSchedule {
    pub fn new(kind: EpsilonKind) -> Result<Self> {
        kind.validate()?;
        Ok(EpsilonSchedule { kind, episode: 0 })
    }

    pub fn episode(&self) -> usize {
        self.episode
    }

    pub fn current(&self) -> f64 {
        self.kind.at(self.episode)
    }

    pub fn advance(&mut self) {
        self.episode += 1;
    }

    /// Called on every reward-function change.
    pub fn reset(&mut self) {
        self.episode = 0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Uniform among maximisers, drawn from the run's random source.
    #[default]
    Random,
    LowestIndex,
}

fn argmax_set(q: &[f64], out: &mut Vec<usize>) {
    out.clear();
    let best = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    out.extend(q.iter().enumerate().filter(|(_, &v)| v == best).map(|(i, _)| i));
}

/// ε-greedy action selection.
pub fn select_action<R: Rng + ?Sized>(q: &[f64], epsilon: f64, tie: TieBreak, rng: &mut R) -> usize {
    debug_assert!(!q.is_empty());
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        return rng.gen_range(0..q.len());
    }
    match tie {
        TieBreak::LowestIndex => {
            let mut best = 0;
            for (i, &v) in q.iter().enumerate().skip(1) {
                if v > q[best] {
                    best = i;
                }
            }
            best
        }
        TieBreak::Random => {
            let mut ties = Vec::with_capacity(q.len());
            argmax_set(q, &mut ties);
            if ties.len() == 1 {
                ties[0]
            } else {
                ties[rng.gen_range(0..ties.len())]
            }
        }
    }
}

/// Action distribution of the ε-greedy policy. Tied maximisers share the
/// greedy mass equally, which is the expectation of random tie-breaking.
pub fn epsilon_greedy_probs(q: &[f64], epsilon: f64, out: &mut [f64]) {
    let n = q.len() as f64;
    let mut ties = Vec::with_capacity(q.len());
    argmax_set(q, &mut ties);
    out.fill(epsilon / n);
    let share = (1.0 - epsilon) / ties.len() as f64;
    for &i in &ties {
        out[i] += share;
    }
}
