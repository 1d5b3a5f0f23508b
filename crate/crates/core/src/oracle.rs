//! Exact, non-learning solvers used as ground truth.
//!
//! Transitions into terminal states contribute nothing afterwards, in both
//! the Q and SF solvers, so the exact quantities match the learners'
//! terminal targets (`y = r`, `y = φ`).

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::features::OneHotBasis;
use crate::mdp::{sample_transition, TabularMdp};
use crate::{Error, Result};

const ROW_TOLERANCE: f64 = 1e-12;

/// Stochastic policy `π(a | s)`, stored row-major by state.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTable {
    num_states: usize,
    num_actions: usize,
    probs: Vec<f64>,
}

impl PolicyTable {
    pub fn new(num_states: usize, num_actions: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != num_states * num_actions {
            return Err(Error::DimensionMismatch { expected: num_states * num_actions, got: probs.len() });
        }
        for (s, row) in probs.chunks(num_actions).enumerate() {
            if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                return Err(Error::InvalidPolicy(format!("negative or non-finite entry in row {s}")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::InvalidPolicy(format!("row {s} sums to {total}")));
            }
        }
        Ok(PolicyTable { num_states, num_actions, probs })
    }

    pub fn uniform(num_states: usize, num_actions: usize) -> Self {
        let p = 1.0 / num_actions as f64;
        PolicyTable { num_states, num_actions, probs: vec![p; num_states * num_actions] }
    }

    pub fn deterministic(actions: &[usize], num_actions: usize) -> Result<Self> {
        let mut probs = vec![0.0; actions.len() * num_actions];
        for (s, &a) in actions.iter().enumerate() {
            if a >= num_actions {
                return Err(Error::OutOfRange { what: "action", index: a, limit: num_actions });
            }
            probs[s * num_actions + a] = 1.0;
        }
        Ok(PolicyTable { num_states: actions.len(), num_actions, probs })
    }

    /// Greedy policy of a Q table. Actions within `tol` of the best value
    /// count as tied and the lowest index wins.
    pub fn greedy(q: &DVector<f64>, num_actions: usize, tol: f64) -> Result<Self> {
        Self::deterministic(&greedy_actions(q, num_actions, tol), num_actions)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn prob(&self, s: usize, a: usize) -> f64 {
        self.probs[s * self.num_actions + a]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.probs[s * self.num_actions..(s + 1) * self.num_actions]
    }

    /// The action taken with probability one at every state, if deterministic.
    pub fn as_deterministic(&self) -> Option<Vec<usize>> {
        (0..self.num_states)
            .map(|s| self.row(s).iter().position(|&p| p == 1.0))
            .collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, s: usize, rng: &mut R) -> usize {
        let row = self.row(s);
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (a, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return a;
            }
        }
        row.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }

    fn check(&self, mdp: &TabularMdp) -> Result<()> {
        if self.num_states != mdp.num_states() {
            return Err(Error::DimensionMismatch { expected: mdp.num_states(), got: self.num_states });
        }
        if self.num_actions != mdp.num_actions() {
            return Err(Error::DimensionMismatch { expected: mdp.num_actions(), got: self.num_actions });
        }
        Ok(())
    }
}

/// Greedy actions of a flattened Q table with lowest-index tie-breaking.
pub fn greedy_actions(q: &DVector<f64>, num_actions: usize, tol: f64) -> Vec<usize> {
    q.as_slice()
        .chunks(num_actions)
        .map(|row| {
            let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            row.iter().position(|&v| v >= best - tol).unwrap_or(0)
        })
        .collect()
}

/// Expected immediate rewards `r̄(s, a)`, flattened like `φ`.
pub fn expected_rewards(mdp: &TabularMdp) -> DVector<f64> {
    let na = mdp.num_actions();
    DVector::from_fn(mdp.num_states() * na, |i, _| mdp.expected_reward(i / na, i % na))
}

/// State-action transition operator `M[(s,a), (s',a')] = p(s,a,s') π(a'|s')`
/// with terminal successors dropped.
pub fn policy_transition_matrix(mdp: &TabularMdp, pi: &PolicyTable) -> Result<DMatrix<f64>> {
    pi.check(mdp)?;
    let na = mdp.num_actions();
    let d = mdp.num_states() * na;
    let mut m = DMatrix::zeros(d, d);
    for s in 0..mdp.num_states() {
        for a in 0..na {
            let i = s * na + a;
            for &(s2, p) in mdp.successors(s, a) {
                if mdp.is_terminal(s2) {
                    continue;
                }
                for a2 in 0..na {
                    m[(i, s2 * na + a2)] += p * pi.prob(s2, a2);
                }
            }
        }
    }
    Ok(m)
}

fn bellman_system(mdp: &TabularMdp, pi: &PolicyTable) -> Result<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    let m = policy_transition_matrix(mdp, pi)?;
    let d = m.nrows();
    Ok((DMatrix::identity(d, d) - m * mdp.gamma()).lu())
}

/// Solves `Q = r̄ + γ M Q` directly.
pub fn exact_policy_eval(mdp: &TabularMdp, pi: &PolicyTable) -> Result<DVector<f64>> {
    let lu = bellman_system(mdp, pi)?;
    lu.solve(&expected_rewards(mdp))
        .ok_or_else(|| Error::InvalidMdp("singular Bellman system".into()))
}

/// Exact SF matrix of `π`: column `(s,a)` is `ψ^π(s, a)`, the solution of
/// `ψ(s,a) = φ(s,a) + γ Σ M[(s,a),(s',a')] ψ(s',a')`, i.e.
/// `Ψ = ((I − γM)⁻¹)ᵀ`.
pub fn exact_sf(mdp: &TabularMdp, pi: &PolicyTable, basis: &OneHotBasis) -> Result<DMatrix<f64>> {
    let d = mdp.num_states() * mdp.num_actions();
    if basis.dimension() != d {
        return Err(Error::DimensionMismatch { expected: d, got: basis.dimension() });
    }
    let lu = bellman_system(mdp, pi)?;
    let inv = lu
        .solve(&DMatrix::identity(d, d))
        .ok_or_else(|| Error::InvalidMdp("singular Bellman system".into()))?;
    Ok(inv.transpose())
}

/// Exact Q, SF matrix and reward weights of one policy.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub q: DVector<f64>,
    pub psi: DMatrix<f64>,
    pub w: DVector<f64>,
}

impl ExactSolution {
    pub fn solve(mdp: &TabularMdp, pi: &PolicyTable) -> Result<Self> {
        let basis = OneHotBasis::new(mdp.num_states(), mdp.num_actions())?;
        Ok(ExactSolution {
            q: exact_policy_eval(mdp, pi)?,
            psi: exact_sf(mdp, pi, &basis)?,
            w: expected_rewards(mdp),
        })
    }

    /// `max |Q − Ψᵀw|`.
    pub fn split_error(&self) -> f64 {
        (self.psi.tr_mul(&self.w) - &self.q).amax()
    }
}

/// One application of the Bellman optimality operator.
pub fn bellman_optimality(mdp: &TabularMdp, q: &DVector<f64>) -> DVector<f64> {
    let na = mdp.num_actions();
    let values: Vec<f64> = (0..mdp.num_states())
        .map(|s| {
            if mdp.is_terminal(s) {
                0.0
            } else {
                q.rows(s * na, na).max()
            }
        })
        .collect();
    DVector::from_fn(q.len(), |i, _| {
        let (s, a) = (i / na, i % na);
        let future: f64 = mdp.successors(s, a).iter().map(|&(s2, p)| p * values[s2]).sum();
        mdp.expected_reward(s, a) + mdp.gamma() * future
    })
}

/// Optimal Q table with `‖T Q − Q‖∞ < tol`.
pub fn value_iteration(mdp: &TabularMdp, tol: f64) -> Result<DVector<f64>> {
    if !(tol > 0.0) {
        return Err(Error::Config(format!("value iteration tolerance must be positive, got {tol}")));
    }
    let mut q = DVector::zeros(mdp.num_states() * mdp.num_actions());
    loop {
        let next = bellman_optimality(mdp, &q);
        let residual = (&next - &q).amax();
        q = next;
        if residual < tol {
            // The residual of the returned table is at most γ · residual.
            return Ok(q);
        }
    }
}

/// `max |Ψ − (Φ + γ Ψ Mᵀ)|` for a candidate SF matrix.
pub fn sf_bellman_residual(mdp: &TabularMdp, pi: &PolicyTable, psi: &DMatrix<f64>) -> Result<f64> {
    let m = policy_transition_matrix(mdp, pi)?;
    let d = m.nrows();
    let rhs = DMatrix::identity(d, d) + psi * m.transpose() * mdp.gamma();
    Ok((psi - rhs).amax())
}

/// `max |Q − (r̄ + γ M Q)|`.
pub fn q_bellman_residual(mdp: &TabularMdp, pi: &PolicyTable, q: &DVector<f64>) -> Result<f64> {
    let m = policy_transition_matrix(mdp, pi)?;
    Ok((q - expected_rewards(mdp) - m * q * mdp.gamma()).amax())
}

/// Smallest horizon `h` with `γ^h < tol`.
pub fn horizon_for(gamma: f64, tol: f64) -> usize {
    if gamma <= 0.0 {
        return 1;
    }
    (tol.ln() / gamma.ln()).floor() as usize + 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct RolloutEstimate {
    pub mean: DVector<f64>,
    /// Standard error of each entry of `mean`.
    pub std_err: DVector<f64>,
}

/// Monte-Carlo estimate of `ψ^π(s, a)`: the mean over rollouts of
/// `Σ_t γ^t φ(s_t, a_t)`, truncated at `horizon` steps or on entering a
/// terminal state.
pub fn rollout_sf_estimate<R: Rng + ?Sized>(
    mdp: &TabularMdp,
    pi: &PolicyTable,
    s: usize,
    a: usize,
    horizon: usize,
    num_rollouts: usize,
    rng: &mut R,
) -> Result<RolloutEstimate> {
    pi.check(mdp)?;
    if num_rollouts == 0 {
        return Err(Error::Config("need at least one rollout".into()));
    }
    let na = mdp.num_actions();
    let d = mdp.num_states() * na;
    let mut sum = DVector::zeros(d);
    let mut sum_sq = DVector::zeros(d);
    let mut single = DVector::zeros(d);
    for _ in 0..num_rollouts {
        single.fill(0.0);
        let (mut state, mut action, mut discount) = (s, a, 1.0);
        for _ in 0..horizon {
            single[state * na + action] += discount;
            if mdp.is_terminal(state) {
                break;
            }
            let t = sample_transition(mdp, state, action, rng)?;
            if t.terminal {
                break;
            }
            discount *= mdp.gamma();
            if discount == 0.0 {
                break;
            }
            state = t.s_next;
            action = pi.sample(state, rng);
        }
        sum += &single;
        sum_sq += single.component_mul(&single);
    }
    let n = num_rollouts as f64;
    let mean = sum / n;
    let std_err = if num_rollouts > 1 {
        DVector::from_fn(d, |i, _| {
            let var = ((sum_sq[i] / n - mean[i] * mean[i]) * n / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        })
    } else {
        DVector::zeros(d)
    };
    Ok(RolloutEstimate { mean, std_err })
}
