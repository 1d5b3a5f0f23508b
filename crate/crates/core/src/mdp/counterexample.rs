use super::TabularMdp;
use crate::Result;

pub const ACTION_A: usize = 0;
pub const ACTION_B: usize = 1;

/// Which of the two reward assignments to build. Both share the same
/// dynamics: 1 -a-> 2, 2 -a-> 3, 2 -b-> 4, with 3 and 4 looping on `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CounterexampleVariant {
    /// Reward 1 on `(2, a)`; the all-`a` policy is optimal.
    A,
    /// Reward 1 on `(2, b)`; taking `b` at state 2 is optimal.
    B,
}

/// Four-state, two-action deterministic MDP whose optimal policy flips
/// between variants while the dynamics stay identical.
///
/// States are indexed 0..4 in the order 1..4. Action `b` at states 1, 3
/// and 4 is a reward-free self-loop.
pub fn build_counterexample(variant: CounterexampleVariant) -> Result<TabularMdp> {
    const NS: usize = 4;
    const NA: usize = 2;
    let next = |s: usize, a: usize| -> usize {
        match (s, a) {
            (0, ACTION_A) => 1,
            (1, ACTION_A) => 2,
            (1, ACTION_B) => 3,
            (s, _) => s,
        }
    };
    let mut transition = vec![0.0; NS * NA * NS];
    let mut reward = vec![0.0; NS * NA * NS];
    for s in 0..NS {
        for a in 0..NA {
            transition[(s * NA + a) * NS + next(s, a)] = 1.0;
        }
    }
    let (rs, ra) = match variant {
        CounterexampleVariant::A => (1, ACTION_A),
        CounterexampleVariant::B => (1, ACTION_B),
    };
    reward[(rs * NA + ra) * NS + next(rs, ra)] = 1.0;

    TabularMdp::new(NS, NA, transition, reward, 0.9, vec![false; NS], vec![0])
}
