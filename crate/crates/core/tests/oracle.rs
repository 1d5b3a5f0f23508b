mod common;

use nalgebra::DVector;
use proptest::prelude::*;
use sftransfer::features::OneHotBasis;
use sftransfer::mdp::*;
use sftransfer::oracle::*;
use sftransfer::sim_rng;

fn random_case(seed: u64, max_states: usize) -> (TabularMdp, PolicyTable) {
    use rand::Rng;
    let mut rng = sim_rng(seed);
    let gamma = rng.gen_range(0.0..0.95);
    let mdp = common::random_mdp(&mut rng, max_states, 4, gamma);
    let pi = common::random_policy(&mut rng, mdp.num_states(), mdp.num_actions());
    (mdp, pi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn direct_solves_match_fixed_point_iteration(seed in any::<u64>()) {
        let (mdp, pi) = random_case(seed, 12);
        let basis = OneHotBasis::new(mdp.num_states(), mdp.num_actions()).unwrap();
        let q = exact_policy_eval(&mdp, &pi).unwrap();
        let q_ref = common::iterative_q(&mdp, &pi);
        for (x, y) in q.iter().zip(&q_ref) {
            prop_assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
        let psi = exact_sf(&mdp, &pi, &basis).unwrap();
        let psi_ref = common::iterative_sf(&mdp, &pi);
        prop_assert!((&psi - &psi_ref).amax() < 1e-9);
    }

    #[test]
    fn sf_and_reward_weights_reproduce_q(seed in any::<u64>()) {
        let (mdp, pi) = random_case(seed, 20);
        let sol = ExactSolution::solve(&mdp, &pi).unwrap();
        prop_assert!(sol.split_error() < 1e-8, "split error {}", sol.split_error());
    }

    #[test]
    fn exact_solutions_have_tiny_bellman_residuals(seed in any::<u64>()) {
        let (mdp, pi) = random_case(seed, 20);
        let sol = ExactSolution::solve(&mdp, &pi).unwrap();
        prop_assert!(q_bellman_residual(&mdp, &pi, &sol.q).unwrap() < 1e-10);
        prop_assert!(sf_bellman_residual(&mdp, &pi, &sol.psi).unwrap() < 1e-10);
    }

    #[test]
    fn exact_sf_entries_are_bounded(seed in any::<u64>()) {
        let (mdp, pi) = random_case(seed, 20);
        let basis = OneHotBasis::new(mdp.num_states(), mdp.num_actions()).unwrap();
        let psi = exact_sf(&mdp, &pi, &basis).unwrap();
        let hi = 1.0 / (1.0 - mdp.gamma());
        prop_assert!(psi.iter().all(|&x| x >= -1e-12 && x <= hi + 1e-9));
    }

    #[test]
    fn value_iteration_meets_its_tolerance(seed in any::<u64>()) {
        let (mdp, _) = random_case(seed, 12);
        let q = value_iteration(&mdp, 1e-9).unwrap();
        prop_assert!((bellman_optimality(&mdp, &q) - &q).amax() < 1e-9);
    }
}

#[test]
fn absorbing_self_reward_is_a_geometric_series() {
    let mdp = TabularMdp::new(1, 1, vec![1.0], vec![1.0], 0.9, vec![false], vec![0]).unwrap();
    let q = exact_policy_eval(&mdp, &PolicyTable::uniform(1, 1)).unwrap();
    assert!((q[0] - 10.0).abs() < 1e-12);
}

#[test]
fn zero_discount_gives_identity_sf() {
    let (mdp, pi) = random_case(3, 8);
    let mdp = mdp.with_gamma(0.0).unwrap();
    let basis = OneHotBasis::new(mdp.num_states(), mdp.num_actions()).unwrap();
    let psi = exact_sf(&mdp, &pi, &basis).unwrap();
    let d = basis.dimension();
    assert_eq!(psi, nalgebra::DMatrix::identity(d, d));
    let est = rollout_sf_estimate(&mdp, &pi, 0, 1, 50, 10, &mut sim_rng(0)).unwrap();
    assert_eq!(est.mean, basis.phi(0, 1).unwrap());
}

#[test]
fn counterexample_closed_forms() {
    let g = 0.9;
    let a = build_counterexample(CounterexampleVariant::A).unwrap();
    let basis = OneHotBasis::new(4, 2).unwrap();
    let pi_aa = PolicyTable::deterministic(&[ACTION_A; 4], 2).unwrap();
    let q = exact_policy_eval(&a, &pi_aa).unwrap();
    assert!((q[basis.index(0, ACTION_A).unwrap()] - g).abs() < 1e-12);

    let psi = exact_sf(&a, &pi_aa, &basis).unwrap();
    let mut expected = DVector::zeros(8);
    expected[basis.index(0, ACTION_A).unwrap()] = 1.0;
    expected[basis.index(1, ACTION_A).unwrap()] = g;
    expected[basis.index(2, ACTION_A).unwrap()] = g * g / (1.0 - g);
    assert!((psi.column(0) - expected).amax() < 1e-12);

    let b = build_counterexample(CounterexampleVariant::B).unwrap();
    let qb = value_iteration(&b, 1e-12).unwrap();
    assert_eq!(greedy_actions(&qb, 2, 1e-9)[1], ACTION_B);
    let qa = value_iteration(&a, 1e-12).unwrap();
    assert_eq!(greedy_actions(&qa, 2, 1e-9)[..2], [ACTION_A, ACTION_A]);
}

#[test]
fn optimal_values_follow_shortest_paths() {
    for (w, h, goal) in [(3, 3, (2, 2)), (5, 4, (1, 3)), (6, 6, (0, 0)), (10, 10, (9, 9))] {
        let gamma = 0.9;
        let spec = GridSpec::new(w, h, Cell::new(if goal.0 == 0 { 1 } else { 0 }, 0), Cell::new(goal.0, goal.1), 0.0);
        let mdp = build_gridworld(&spec, gamma).unwrap();
        let q = value_iteration(&mdp, 1e-13).unwrap();
        let dist = common::grid_distances(w, h, goal);
        for s in (0..w * h).filter(|&s| !mdp.is_terminal(s)) {
            let best = (0..4).map(|a| q[s * 4 + a]).fold(f64::NEG_INFINITY, f64::max);
            let expected = gamma.powi(dist[s] as i32 - 1);
            assert!((best - expected).abs() < 1e-11, "{w}x{h} state {s}: {best} vs {expected}");
        }
    }
}

#[test]
fn deterministic_rollout_equals_truncated_exact_sf() {
    let a = build_counterexample(CounterexampleVariant::A).unwrap();
    let basis = OneHotBasis::new(4, 2).unwrap();
    let pi = PolicyTable::deterministic(&[ACTION_A, ACTION_B, ACTION_A, ACTION_A], 2).unwrap();
    let horizon = horizon_for(a.gamma(), 1e-13);
    assert!(a.gamma().powi(horizon as i32) < 1e-13);
    let est = rollout_sf_estimate(&a, &pi, 0, ACTION_A, horizon, 1, &mut sim_rng(0)).unwrap();
    let exact = exact_sf(&a, &pi, &basis).unwrap();
    assert!((est.mean - exact.column(0)).amax() < 1e-11);
}

#[test]
fn rollouts_agree_with_exact_sf_on_a_slippery_grid() {
    let spec = GridSpec::new(4, 4, Cell::new(0, 0), Cell::new(3, 3), 0.2);
    let mdp = build_gridworld(&spec, 0.8).unwrap();
    let basis = OneHotBasis::new(16, 4).unwrap();
    let pi = PolicyTable::uniform(16, 4);
    let exact = exact_sf(&mdp, &pi, &basis).unwrap();
    let horizon = horizon_for(0.8, 1e-10);
    let mut rng = sim_rng(77);
    for (s, a) in [(0, GridAction::Up.index()), (5, GridAction::Right.index())] {
        let est = rollout_sf_estimate(&mdp, &pi, s, a, horizon, 10_000, &mut rng).unwrap();
        let col = exact.column(basis.index(s, a).unwrap());
        for i in 0..col.len() {
            let gap = (est.mean[i] - col[i]).abs();
            assert!(gap <= 3.0 * est.std_err[i] + 1e-9, "({s},{a}) entry {i}: {} vs {} (se {})", est.mean[i], col[i], est.std_err[i]);
        }
    }
}
