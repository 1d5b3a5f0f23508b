use crate::features::OneHotBasis;
use crate::mdp::{build_counterexample, CounterexampleVariant, ACTION_A};
use crate::oracle::{exact_sf, value_iteration, PolicyTable};
use crate::{Error, Result};

/// Value-iteration stopping tolerance used for the report.
pub const SOLVER_TOL: f64 = 1e-12;

/// Optimal policies of both counterexample variants and their exact SFs at
/// `(state 0, a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleReport {
    pub gamma: f64,
    /// Greedy action per state under variant A's optimal Q.
    pub policy_a: Vec<usize>,
    pub policy_b: Vec<usize>,
    /// `ψ^{π_A}(0, a)`, flattened like `φ`.
    pub psi_a: Vec<f64>,
    pub psi_b: Vec<f64>,
    /// `‖ψ^{π_A}(0, a) − ψ^{π_B}(0, a)‖∞`.
    pub gap: f64,
}

fn optimal_policy(variant: CounterexampleVariant, gamma: f64) -> Result<(crate::mdp::TabularMdp, PolicyTable)> {
    let mdp = build_counterexample(variant)?.with_gamma(gamma)?;
    let q = value_iteration(&mdp, SOLVER_TOL)?;
    // Q gaps between distinct actions are at least of order (1 - γ)γ², far above this.
    let pi = PolicyTable::greedy(&q, mdp.num_actions(), 1e-9)?;
    Ok((mdp, pi))
}

pub fn analyze_counterexample(gamma: f64) -> Result<CounterexampleReport> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Config(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    let (mdp_a, pi_a) = optimal_policy(CounterexampleVariant::A, gamma)?;
    let (mdp_b, pi_b) = optimal_policy(CounterexampleVariant::B, gamma)?;
    let basis = OneHotBasis::new(mdp_a.num_states(), mdp_a.num_actions())?;
    let col = basis.index(0, ACTION_A)?;
    let psi_a: Vec<f64> = exact_sf(&mdp_a, &pi_a, &basis)?.column(col).iter().copied().collect();
    let psi_b: Vec<f64> = exact_sf(&mdp_b, &pi_b, &basis)?.column(col).iter().copied().collect();
    let gap = psi_a.iter().zip(&psi_b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(CounterexampleReport {
        gamma,
        policy_a: pi_a.as_deterministic().expect("greedy policy is deterministic"),
        policy_b: pi_b.as_deterministic().expect("greedy policy is deterministic"),
        psi_a,
        psi_b,
        gap,
    })
}
