//! Reference computations used as ground truth by the integration tests.
//! None of them call into the library's solvers.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use sftransfer::mdp::TabularMdp;
use sftransfer::oracle::PolicyTable;

/// Random MDP with `2..=max_states` states and 2 or 3 actions. Transition
/// probabilities are multiples of `1 / quantum`, so an exhaustive batch with
/// integer multiplicities reproduces every expectation exactly. The last
/// zero to two states are terminal; state 0 is the start.
pub fn random_mdp<R: Rng>(rng: &mut R, max_states: usize, quantum: usize, gamma: f64) -> TabularMdp {
    let ns = rng.gen_range(2..=max_states);
    let na = rng.gen_range(2..=3);
    let num_terminal = rng.gen_range(0..=2usize.min(ns - 1));
    let terminal: Vec<bool> = (0..ns).map(|s| s >= ns - num_terminal).collect();
    let mut transition = vec![0.0; ns * na * ns];
    let mut reward = vec![0.0; ns * na * ns];
    for s in 0..ns {
        for a in 0..na {
            let row = (s * na + a) * ns;
            if terminal[s] {
                transition[row + s] = 1.0;
                continue;
            }
            let candidates: Vec<usize> = (0..3).map(|_| rng.gen_range(0..ns)).collect();
            for _ in 0..quantum {
                let s2 = candidates[rng.gen_range(0..candidates.len())];
                transition[row + s2] += 1.0 / quantum as f64;
            }
            for s2 in 0..ns {
                if transition[row + s2] > 0.0 {
                    reward[row + s2] = rng.gen_range(-1.0..1.0);
                }
            }
        }
    }
    TabularMdp::new(ns, na, transition, reward, gamma, terminal, vec![0]).expect("generator builds valid MDPs")
}

/// Random stochastic policy with every probability positive.
pub fn random_policy<R: Rng>(rng: &mut R, ns: usize, na: usize) -> PolicyTable {
    let mut probs = Vec::with_capacity(ns * na);
    for _ in 0..ns {
        let raw: Vec<f64> = (0..na).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        probs.extend(raw.iter().map(|p| p / total));
    }
    PolicyTable::new(ns, na, probs).unwrap()
}

/// Dense state-action operator built from `mdp.p` directly.
fn operator(mdp: &TabularMdp, pi: &PolicyTable) -> DMatrix<f64> {
    let (ns, na) = (mdp.num_states(), mdp.num_actions());
    let d = ns * na;
    let mut m = DMatrix::zeros(d, d);
    for s in 0..ns {
        for a in 0..na {
            for s2 in 0..ns {
                if mdp.is_terminal(s2) {
                    continue;
                }
                for a2 in 0..na {
                    m[(s * na + a, s2 * na + a2)] = mdp.p(s, a, s2) * pi.prob(s2, a2);
                }
            }
        }
    }
    m
}

fn mean_rewards(mdp: &TabularMdp) -> Vec<f64> {
    let (ns, na) = (mdp.num_states(), mdp.num_actions());
    let mut r = vec![0.0; ns * na];
    for s in 0..ns {
        for a in 0..na {
            r[s * na + a] = (0..ns).map(|s2| mdp.p(s, a, s2) * mdp.r(s, a, s2)).sum();
        }
    }
    r
}

/// `Q^π` by fixed-point iteration until successive iterates agree to 1e-14.
pub fn iterative_q(mdp: &TabularMdp, pi: &PolicyTable) -> Vec<f64> {
    let m = operator(mdp, pi);
    let r = mean_rewards(mdp);
    let g = mdp.gamma();
    let mut q = vec![0.0; r.len()];
    loop {
        let next: Vec<f64> = (0..q.len())
            .map(|i| r[i] + g * (0..q.len()).map(|j| m[(i, j)] * q[j]).sum::<f64>())
            .collect();
        let diff = next.iter().zip(&q).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        q = next;
        if diff < 1e-14 {
            return q;
        }
    }
}

/// SF matrix by iterating `X ← I + γ M X`; column `(s,a)` of `Xᵀ` is `ψ(s,a)`.
pub fn iterative_sf(mdp: &TabularMdp, pi: &PolicyTable) -> DMatrix<f64> {
    let m = operator(mdp, pi) * mdp.gamma();
    let d = m.nrows();
    let id = DMatrix::<f64>::identity(d, d);
    let mut x = id.clone();
    loop {
        let next = &id + &m * &x;
        let diff = (&next - &x).amax();
        x = next;
        if diff < 1e-13 {
            return x.transpose();
        }
    }
}

/// Breadth-first distances (in moves) to `goal` on a deterministic grid.
pub fn grid_distances(width: usize, height: usize, goal: (usize, usize)) -> Vec<usize> {
    let mut dist = vec![usize::MAX; width * height];
    let idx = |c: usize, r: usize| r * width + c;
    let mut queue = std::collections::VecDeque::new();
    dist[idx(goal.0, goal.1)] = 0;
    queue.push_back(goal);
    while let Some((c, r)) = queue.pop_front() {
        let here = dist[idx(c, r)];
        let mut nbrs = Vec::new();
        if c > 0 {
            nbrs.push((c - 1, r));
        }
        if c + 1 < width {
            nbrs.push((c + 1, r));
        }
        if r > 0 {
            nbrs.push((c, r - 1));
        }
        if r + 1 < height {
            nbrs.push((c, r + 1));
        }
        for (c2, r2) in nbrs {
            if dist[idx(c2, r2)] == usize::MAX {
                dist[idx(c2, r2)] = here + 1;
                queue.push_back((c2, r2));
            }
        }
    }
    dist
}

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Two-sided Student-t tail `P(|T| > |t|)` by composite Simpson quadrature
/// of the density after the substitution `x = √ν tan θ`.
pub fn student_two_sided(t: f64, nu: f64) -> f64 {
    let c = (ln_gamma((nu + 1.0) / 2.0) - ln_gamma(nu / 2.0)).exp() / (nu * std::f64::consts::PI).sqrt();
    let lo = (t.abs() / nu.sqrt()).atan();
    let hi = std::f64::consts::FRAC_PI_2;
    let n = 20_000;
    let h = (hi - lo) / n as f64;
    let f = |th: f64| th.cos().max(0.0).powf(nu - 1.0);
    let mut sum = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(lo + i as f64 * h);
    }
    2.0 * c * nu.sqrt() * sum * h / 3.0
}

/// Welch's t statistic, Welch–Satterthwaite dof and two-sided p.
pub fn reference_welch(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let stats = |x: &[f64]| {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let v = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
        (m, v, n)
    };
    let (ma, va, na) = stats(a);
    let (mb, vb, nb) = stats(b);
    let (qa, qb) = (va / na, vb / nb);
    let t = (ma - mb) / (qa + qb).sqrt();
    let dof = (qa + qb).powi(2) / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
    (t, dof, student_two_sided(t, dof))
}

/// `‖a − n‖ / max(‖a‖, ‖n‖)`, zero when both vanish.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = analytic.iter().zip(numeric).map(|(a, b)| a - b).collect();
    let scale = norm(analytic).max(norm(numeric));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}

/// Central finite-difference gradient of `f` at `x`.
pub fn numeric_gradient(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Every transition of every non-terminal `(s, a)`, each successor repeated
/// `p · quantum` times.
pub fn exhaustive_batch(mdp: &TabularMdp, quantum: usize) -> Vec<sftransfer::mdp::Transition> {
    let (ns, na) = (mdp.num_states(), mdp.num_actions());
    let mut batch = Vec::new();
    for s in (0..ns).filter(|&s| !mdp.is_terminal(s)) {
        for a in 0..na {
            for s2 in 0..ns {
                let copies = (mdp.p(s, a, s2) * quantum as f64).round() as usize;
                for _ in 0..copies {
                    batch.push(sftransfer::mdp::Transition {
                        s,
                        a,
                        r: mdp.r(s, a, s2),
                        s_next: s2,
                        terminal: mdp.is_terminal(s2),
                    });
                }
            }
        }
    }
    batch
}

/// Runs fitted SF updates on `batch` with successor actions weighted by the
/// fixed policy `pi` until `Ψ` stops moving (or `max_updates`). Returns the
/// agent and the number of updates.
pub fn train_fixed_policy(
    mdp: &TabularMdp,
    pi: &PolicyTable,
    batch: &[sftransfer::mdp::Transition],
    config: sftransfer::learn::AgentConfig,
    max_updates: usize,
) -> (sftransfer::learn::FittedSf, usize) {
    use sftransfer::features::OneHotBasis;
    let basis = OneHotBasis::new(mdp.num_states(), mdp.num_actions()).unwrap();
    let mut rng = sftransfer::sim_rng(0);
    let mut agent = sftransfer::learn::FittedSf::new(basis, mdp.gamma(), config, &mut rng).unwrap();
    let probs = |_: &sftransfer::features::SfModel, s: usize, out: &mut [f64]| out.copy_from_slice(pi.row(s));
    for k in 0..max_updates {
        let before = agent.model().psi.clone();
        agent.update_with(batch, &probs).unwrap();
        if (&agent.model().psi - before).amax() < 1e-12 {
            return (agent, k + 1);
        }
    }
    (agent, max_updates)
}

/// `max |Ψ_learned − Ψ_exact|` over columns of non-terminal states (the
/// learner never sees data for terminal columns).
pub fn sf_error_nonterminal(mdp: &TabularMdp, learned: &DMatrix<f64>, exact: &DMatrix<f64>) -> f64 {
    let na = mdp.num_actions();
    (0..learned.ncols())
        .filter(|&col| !mdp.is_terminal(col / na))
        .map(|col| (learned.column(col) - exact.column(col)).amax())
        .fold(0.0, f64::max)
}

/// Relative errors `(L_R, L_SF, L_Q)` between analytic and central
/// finite-difference gradients on one random instance: random sizes,
/// parameters, batch (with repeated pairs) and targets.
pub fn gradient_check_instance(seed: u64) -> (f64, f64, f64) {
    use nalgebra::DVector;
    use sftransfer::features::{OneHotBasis, QModel, SfModel};
    use sftransfer::learn::loss::*;
    use sftransfer::learn::SfTarget;
    use sftransfer::mdp::Transition;

    let mut rng = sftransfer::sim_rng(seed);
    let ns = rng.gen_range(1..=5);
    let na = rng.gen_range(1..=3);
    let basis = OneHotBasis::new(ns, na).unwrap();
    let d = basis.dimension();
    let n = rng.gen_range(1..=12);
    let batch: Vec<Transition> = (0..n)
        .map(|_| Transition {
            s: rng.gen_range(0..ns),
            a: rng.gen_range(0..na),
            r: rng.gen_range(-2.0..2.0),
            s_next: rng.gen_range(0..ns),
            terminal: rng.gen_bool(0.2),
        })
        .collect();
    let psi = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-3.0..3.0));
    let w = DVector::from_fn(d, |_, _| rng.gen_range(-3.0..3.0));
    let model = SfModel::from_parts(psi, w, basis).unwrap();
    let targets: Vec<SfTarget> =
        (0..n).map(|_| SfTarget { y: DVector::from_fn(d, |_, _| rng.gen_range(-3.0..3.0)) }).collect();
    let theta = DVector::from_fn(d, |_, _| rng.gen_range(-3.0..3.0));
    let q = QModel::from_theta(theta, basis).unwrap();
    let q_targets: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let h = 1e-6;

    let gw = reward_loss_grad(&batch, &model).unwrap();
    let nw = numeric_gradient(model.w.as_slice(), h, |x| {
        let mut m = model.clone();
        m.w.copy_from_slice(x);
        reward_loss(&batch, &m).unwrap()
    });
    let gpsi = sf_loss_grad(&batch, &targets, &model).unwrap();
    let npsi = numeric_gradient(model.psi.as_slice(), h, |x| {
        let mut m = model.clone();
        m.psi.copy_from_slice(x);
        sf_loss(&batch, &targets, &m).unwrap()
    });
    let gq = q_loss_grad(&batch, &q_targets, &q).unwrap();
    let nq = numeric_gradient(q.theta.as_slice(), h, |x| {
        let mut m = q.clone();
        m.theta.copy_from_slice(x);
        q_loss(&batch, &q_targets, &m).unwrap()
    });
    (
        relative_error(gw.as_slice(), &nw),
        relative_error(gpsi.as_slice(), &npsi),
        relative_error(gq.as_slice(), &nq),
    )
}
