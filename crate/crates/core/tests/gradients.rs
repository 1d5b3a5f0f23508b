mod common;

use nalgebra::DVector;
use proptest::prelude::*;
use sftransfer::features::{OneHotBasis, SfModel};
use sftransfer::learn::loss::*;
use sftransfer::learn::SfTarget;
use sftransfer::mdp::Transition;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn analytic_gradients_match_finite_differences(seed in any::<u64>()) {
        let (r, sf, q) = common::gradient_check_instance(seed);
        prop_assert!(r < 1e-5, "L_R relative error {r}");
        prop_assert!(sf < 1e-5, "L_SF relative error {sf}");
        prop_assert!(q < 1e-5, "L_Q relative error {q}");
    }

    #[test]
    fn sparse_and_dense_sf_gradients_agree(seed in any::<u64>(), n in 1usize..10) {
        use rand::Rng;
        let mut rng = sftransfer::sim_rng(seed);
        let basis = OneHotBasis::new(3, 2).unwrap();
        let d = basis.dimension();
        let model = SfModel::from_parts(
            nalgebra::DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0)),
            DVector::zeros(d),
            basis,
        ).unwrap();
        let batch: Vec<Transition> = (0..n)
            .map(|_| Transition { s: rng.gen_range(0..3), a: rng.gen_range(0..2), r: 0.0, s_next: 0, terminal: false })
            .collect();
        let targets: Vec<SfTarget> = (0..n).map(|_| SfTarget { y: DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0)) }).collect();
        let dense = sf_loss_grad(&batch, &targets, &model).unwrap();
        let mut touched = vec![false; d];
        for (col, g) in sf_loss_grad_columns(&batch, &targets, &model).unwrap() {
            prop_assert_eq!(dense.column(col).clone_owned(), g);
            touched[col] = true;
        }
        for (col, t) in touched.iter().enumerate() {
            if !t {
                prop_assert!(dense.column(col).iter().all(|&x| x == 0.0));
            }
        }
    }
}

#[test]
fn single_transition_reward_gradient_by_hand() {
    let basis = OneHotBasis::new(2, 2).unwrap();
    let model = SfModel::zeros(basis);
    let batch = [Transition { s: 1, a: 0, r: 1.0, s_next: 0, terminal: false }];
    assert_eq!(reward_loss(&batch, &model).unwrap(), 1.0);
    let g = reward_loss_grad(&batch, &model).unwrap();
    assert_eq!(g.as_slice(), &[0.0, 0.0, -2.0, 0.0]);
}

#[test]
fn one_hot_sf_gradient_is_a_single_column() {
    let basis = OneHotBasis::new(2, 2).unwrap();
    let mut model = SfModel::zeros(basis);
    model.psi[(0, 3)] = 0.5;
    let batch = [Transition { s: 1, a: 1, r: 0.0, s_next: 0, terminal: true }];
    let y = DVector::from_vec(vec![1.0, 0.0, 0.0, 2.0]);
    let g = sf_loss_grad(&batch, &[SfTarget { y: y.clone() }], &model).unwrap();
    let expected = (model.psi.column(3) - &y) * 2.0;
    assert_eq!(g.column(3).clone_owned(), expected);
    assert_eq!(g.columns(0, 3).amax(), 0.0);
}
