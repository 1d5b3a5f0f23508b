//! Loss objectives, their analytic gradients and the bootstrap targets.
//!
//! All losses are batch means of squared residuals. Gradients are taken with
//! respect to the live model while targets come from a frozen snapshot.

use nalgebra::{DMatrix, DVector};

use crate::features::{QModel, SfModel};
use crate::mdp::Transition;
use crate::{Error, Result};

/// Regression target for `ψ(s, a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SfTarget {
    pub y: DVector<f64>,
}

/// `y = φ(s,a)` on terminal transitions, otherwise
/// `y = φ(s,a) + γ Σ_{a'} π(a'|s') ψ'(s', a')` with `ψ'` from `model_prev`.
pub fn sf_target(
    t: &Transition,
    model_prev: &SfModel,
    gamma: f64,
    policy_probs: &[f64],
) -> Result<SfTarget> {
    let basis = model_prev.basis();
    let i = basis.index(t.s, t.a)?;
    let mut y = DVector::zeros(basis.dimension());
    if !t.terminal && gamma != 0.0 {
        if policy_probs.len() != basis.num_actions() {
            return Err(Error::DimensionMismatch { expected: basis.num_actions(), got: policy_probs.len() });
        }
        for (a2, &p) in policy_probs.iter().enumerate() {
            if p != 0.0 {
                let j = basis.index(t.s_next, a2)?;
                y.axpy(gamma * p, &model_prev.psi.column(j), 1.0);
            }
        }
    }
    y[i] += 1.0;
    Ok(SfTarget { y })
}

fn nonempty<T>(batch: &[T]) -> Result<f64> {
    if batch.is_empty() {
        Err(Error::EmptyBatch)
    } else {
        Ok(batch.len() as f64)
    }
}

/// `mean (φᵀw − r)²`.
pub fn reward_loss(batch: &[Transition], model: &SfModel) -> Result<f64> {
    let n = nonempty(batch)?;
    batch.iter().try_fold(0.0, |acc, t| {
        let e = model.reward_predict(t.s, t.a)? - t.r;
        Ok(acc + e * e / n)
    })
}

/// `mean 2(φᵀw − r) φ`.
pub fn reward_loss_grad(batch: &[Transition], model: &SfModel) -> Result<DVector<f64>> {
    let n = nonempty(batch)?;
    let mut g = DVector::zeros(model.w.len());
    for t in batch {
        let i = model.basis().index(t.s, t.a)?;
        g[i] += 2.0 * (model.w[i] - t.r) / n;
    }
    Ok(g)
}

fn check_targets(batch: &[Transition], targets: &[SfTarget], dim: usize) -> Result<f64> {
    let n = nonempty(batch)?;
    if targets.len() != batch.len() {
        return Err(Error::DimensionMismatch { expected: batch.len(), got: targets.len() });
    }
    if let Some(t) = targets.iter().find(|t| t.y.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: t.y.len() });
    }
    Ok(n)
}

/// `mean ‖ψ(s,a) − y‖²`.
pub fn sf_loss(batch: &[Transition], targets: &[SfTarget], model: &SfModel) -> Result<f64> {
    let n = check_targets(batch, targets, model.basis().dimension())?;
    batch.iter().zip(targets).try_fold(0.0, |acc, (t, y)| {
        let i = model.basis().index(t.s, t.a)?;
        let d = (model.psi.column(i) - &y.y).norm_squared();
        Ok(acc + d / n)
    })
}

/// Sparse form of the SF gradient: with one-hot `φ`, only the columns of
/// `Ψ` indexed by the batch's `(s, a)` pairs are nonzero. Returned in order
/// of first appearance.
pub fn sf_loss_grad_columns(
    batch: &[Transition],
    targets: &[SfTarget],
    model: &SfModel,
) -> Result<Vec<(usize, DVector<f64>)>> {
    let dim = model.basis().dimension();
    let n = check_targets(batch, targets, dim)?;
    let mut slot = std::collections::HashMap::with_capacity(batch.len());
    let mut cols: Vec<(usize, DVector<f64>)> = Vec::new();
    for (t, y) in batch.iter().zip(targets) {
        let i = model.basis().index(t.s, t.a)?;
        let k = *slot.entry(i).or_insert_with(|| {
            cols.push((i, DVector::zeros(dim)));
            cols.len() - 1
        });
        let g = &mut cols[k].1;
        g.axpy(2.0 / n, &model.psi.column(i), 1.0);
        g.axpy(-2.0 / n, &y.y, 1.0);
    }
    Ok(cols)
}

/// `mean 2(ψ(s,a) − y) φ(s,a)ᵀ`, a matrix shaped like `Ψ`.
pub fn sf_loss_grad(batch: &[Transition], targets: &[SfTarget], model: &SfModel) -> Result<DMatrix<f64>> {
    let dim = model.basis().dimension();
    let mut g = DMatrix::zeros(dim, dim);
    for (i, col) in sf_loss_grad_columns(batch, targets, model)? {
        g.set_column(i, &col);
    }
    Ok(g)
}

/// `y = r` on terminal transitions, otherwise `r + γ max_{a'} Q'(s', a')`.
pub fn q_target(t: &Transition, q_prev: &QModel, gamma: f64) -> f64 {
    if t.terminal {
        t.r
    } else {
        t.r + gamma * q_prev.value(t.s_next)
    }
}

/// `mean (Q(s,a) − y)²`.
pub fn q_loss(batch: &[Transition], targets: &[f64], q: &QModel) -> Result<f64> {
    let n = nonempty(batch)?;
    if targets.len() != batch.len() {
        return Err(Error::DimensionMismatch { expected: batch.len(), got: targets.len() });
    }
    batch.iter().zip(targets).try_fold(0.0, |acc, (t, y)| {
        let e = q.q(t.s, t.a)? - y;
        Ok(acc + e * e / n)
    })
}

/// `mean 2(Q(s,a) − y) φ(s,a)`.
pub fn q_loss_grad(batch: &[Transition], targets: &[f64], q: &QModel) -> Result<DVector<f64>> {
    let n = nonempty(batch)?;
    if targets.len() != batch.len() {
        return Err(Error::DimensionMismatch { expected: batch.len(), got: targets.len() });
    }
    let mut g = DVector::zeros(q.theta.len());
    for (t, y) in batch.iter().zip(targets) {
        let i = q.basis().index(t.s, t.a)?;
        g[i] += 2.0 * (q.theta[i] - y) / n;
    }
    Ok(g)
}
