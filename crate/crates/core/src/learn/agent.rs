use std::fmt;

use rand::{Rng, RngCore};

use super::explore::{epsilon_greedy_probs, select_action, TieBreak};
use super::loss::{
    q_loss, q_loss_grad, q_target, reward_loss, reward_loss_grad, sf_loss, sf_loss_grad_columns, sf_target,
};
use super::{Adagrad, AgentConfig, ExpectationPolicy, InitScheme, ResetStrategy};
use crate::features::{OneHotBasis, QModel, SfModel};
use crate::mdp::{Policy, Transition};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossName {
    Sf,
    Reward,
    Q,
}

impl fmt::Display for LossName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossName::Sf => "L_SF",
            LossName::Reward => "L_R",
            LossName::Q => "L_Q",
        })
    }
}

/// Batch loss measured right before the update with index `update_index`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossRecord {
    pub update_index: usize,
    pub name: LossName,
    pub value: f64,
}

/// Interface shared by the two learners so the experiment runner can drive
/// either one.
pub trait Agent {
    fn num_actions(&self) -> usize;

    fn q_values_into(&self, s: usize, out: &mut [f64]);

    fn tie_break(&self) -> TieBreak;

    /// Buffers one transition; performs an update once the batch is full.
    /// `epsilon` is the behaviour policy's current exploration rate.
    fn observe(&mut self, t: Transition, epsilon: f64) -> Result<()>;

    /// Applies the configured reset strategy after a reward change and drops
    /// buffered transitions from the previous task.
    fn task_changed(&mut self, rng: &mut dyn RngCore);

    /// Number of gradient updates performed so far.
    fn updates(&self) -> usize;

    fn losses(&self) -> &[LossRecord];
}

fn fill_init(values: &mut [f64], init: InitScheme, rng: &mut dyn RngCore) {
    match init {
        InitScheme::Zero => values.fill(0.0),
        InitScheme::Uniform { scale } => {
            for v in values {
                *v = if scale > 0.0 { rng.gen_range(-scale..=scale) } else { 0.0 };
            }
        }
    }
}

/// Fitted successor-feature learner with linear `ψ = Ψφ` and reward model `w`.
#[derive(Debug, Clone)]
pub struct FittedSf {
    model: SfModel,
    /// Parameters frozen at the previous update; source of the SF targets.
    target: SfModel,
    psi_opt: Adagrad,
    w_opt: Adagrad,
    config: AgentConfig,
    gamma: f64,
    buffer: Vec<Transition>,
    losses: Vec<LossRecord>,
    updates: usize,
}

impl FittedSf {
    pub fn new(basis: OneHotBasis, gamma: f64, config: AgentConfig, rng: &mut dyn RngCore) -> Result<Self> {
        config.validate()?;
        let d = basis.dimension();
        let mut model = SfModel::zeros(basis);
        fill_init(model.psi.as_mut_slice(), config.init, rng);
        fill_init(model.w.as_mut_slice(), config.init, rng);
        let opt = |len, lr| Adagrad::with_params(len, lr, config.adagrad_epsilon, config.initial_accumulator);
        Ok(FittedSf {
            target: model.clone(),
            model,
            psi_opt: opt(d * d, config.lr_sf),
            w_opt: opt(d, config.lr_reward),
            buffer: Vec::with_capacity(config.batch_size),
            config,
            gamma,
            losses: Vec::new(),
            updates: 0,
        })
    }

    pub fn model(&self) -> &SfModel {
        &self.model
    }

    pub fn target_model(&self) -> &SfModel {
        &self.target
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    /// Replaces the live parameters (and the frozen copy).
    pub fn set_model(&mut self, model: SfModel) -> Result<()> {
        if model.basis() != self.model.basis() {
            return Err(Error::DimensionMismatch {
                expected: self.model.basis().dimension(),
                got: model.basis().dimension(),
            });
        }
        self.target = model.clone();
        self.model = model;
        Ok(())
    }

    pub fn psi_optimizer(&self) -> &Adagrad {
        &self.psi_opt
    }

    pub fn w_optimizer(&self) -> &Adagrad {
        &self.w_opt
    }

    /// SF targets for `batch`, computed from the frozen copy. `next_probs`
    /// fills the action distribution at a successor state given that copy.
    pub fn targets_for(
        &self,
        batch: &[Transition],
        next_probs: &dyn Fn(&SfModel, usize, &mut [f64]),
    ) -> Result<Vec<super::SfTarget>> {
        let mut probs = vec![0.0; self.model.basis().num_actions()];
        batch
            .iter()
            .map(|t| {
                if !t.terminal {
                    next_probs(&self.target, t.s_next, &mut probs);
                }
                sf_target(t, &self.target, self.gamma, &probs)
            })
            .collect()
    }

    /// One gradient update on `L_R` and `L_SF` for an explicit batch, with
    /// the successor action distribution supplied by the caller.
    pub fn update_with(
        &mut self,
        batch: &[Transition],
        next_probs: &dyn Fn(&SfModel, usize, &mut [f64]),
    ) -> Result<()> {
        let targets = self.targets_for(batch, next_probs)?;
        let idx = self.updates;
        self.losses.push(LossRecord { update_index: idx, name: LossName::Sf, value: sf_loss(batch, &targets, &self.model)? });
        self.losses.push(LossRecord { update_index: idx, name: LossName::Reward, value: reward_loss(batch, &self.model)? });

        let gw = reward_loss_grad(batch, &self.model)?;
        let gpsi = sf_loss_grad_columns(batch, &targets, &self.model)?;
        self.w_opt.step(self.model.w.as_mut_slice(), gw.as_slice())?;
        let d = self.model.basis().dimension();
        for (col, g) in &gpsi {
            let off = col * d;
            self.psi_opt.step_block(off, &mut self.model.psi.as_mut_slice()[off..off + d], g.as_slice())?;
        }
        self.target.clone_from(&self.model);
        self.updates += 1;
        Ok(())
    }

    /// Update using the configured expectation policy at successor states.
    pub fn update(&mut self, batch: &[Transition], epsilon: f64) -> Result<()> {
        let na = self.model.basis().num_actions();
        match self.config.expectation_policy {
            ExpectationPolicy::Behavior => self.update_with(batch, &|m: &SfModel, s: usize, out: &mut [f64]| {
                let mut q = vec![0.0; na];
                m.q_values_into(s, &mut q);
                epsilon_greedy_probs(&q, epsilon, out);
            }),
            ExpectationPolicy::Greedy => self.update_with(batch, &|m: &SfModel, s: usize, out: &mut [f64]| {
                let mut q = vec![0.0; na];
                m.q_values_into(s, &mut q);
                epsilon_greedy_probs(&q, 0.0, out);
            }),
        }
    }

    pub fn reset(&mut self, strategy: ResetStrategy, rng: &mut dyn RngCore) {
        match strategy {
            ResetStrategy::KeepAll => {}
            ResetStrategy::ResetWOnly => {
                fill_init(self.model.w.as_mut_slice(), self.config.init, rng);
                self.w_opt.reset();
            }
            ResetStrategy::ResetAll => {
                fill_init(self.model.psi.as_mut_slice(), self.config.init, rng);
                fill_init(self.model.w.as_mut_slice(), self.config.init, rng);
                self.psi_opt.reset();
                self.w_opt.reset();
            }
        }
        self.target.clone_from(&self.model);
    }
}

impl Agent for FittedSf {
    fn num_actions(&self) -> usize {
        self.model.basis().num_actions()
    }

    fn q_values_into(&self, s: usize, out: &mut [f64]) {
        self.model.q_values_into(s, out);
    }

    fn tie_break(&self) -> TieBreak {
        self.config.tie_break
    }

    fn observe(&mut self, t: Transition, epsilon: f64) -> Result<()> {
        self.buffer.push(t);
        if self.buffer.len() >= self.config.batch_size {
            let batch = std::mem::take(&mut self.buffer);
            self.update(&batch, epsilon)?;
            self.buffer = batch;
            self.buffer.clear();
        }
        Ok(())
    }

    fn task_changed(&mut self, rng: &mut dyn RngCore) {
        self.buffer.clear();
        self.reset(self.config.reset_strategy, rng);
    }

    fn updates(&self) -> usize {
        self.updates
    }

    fn losses(&self) -> &[LossRecord] {
        &self.losses
    }
}

/// Fitted Q-iteration over a tabular `θ`.
#[derive(Debug, Clone)]
pub struct FittedQ {
    model: QModel,
    target: QModel,
    opt: Adagrad,
    config: AgentConfig,
    gamma: f64,
    buffer: Vec<Transition>,
    losses: Vec<LossRecord>,
    updates: usize,
}

impl FittedQ {
    pub fn new(basis: OneHotBasis, gamma: f64, config: AgentConfig, rng: &mut dyn RngCore) -> Result<Self> {
        config.validate()?;
        if config.reset_strategy == ResetStrategy::ResetWOnly {
            return Err(Error::Config("fitted Q-iteration has no reward weights; use keep_all or reset_all".into()));
        }
        let mut model = QModel::zeros(basis);
        fill_init(model.theta.as_mut_slice(), config.init, rng);
        Ok(FittedQ {
            target: model.clone(),
            opt: Adagrad::with_params(basis.dimension(), config.lr_q, config.adagrad_epsilon, config.initial_accumulator),
            model,
            buffer: Vec::with_capacity(config.batch_size),
            config,
            gamma,
            losses: Vec::new(),
            updates: 0,
        })
    }

    pub fn model(&self) -> &QModel {
        &self.model
    }

    pub fn target_model(&self) -> &QModel {
        &self.target
    }

    pub fn optimizer(&self) -> &Adagrad {
        &self.opt
    }

    pub fn update(&mut self, batch: &[Transition]) -> Result<()> {
        let targets: Vec<f64> = batch.iter().map(|t| q_target(t, &self.target, self.gamma)).collect();
        self.losses.push(LossRecord {
            update_index: self.updates,
            name: LossName::Q,
            value: q_loss(batch, &targets, &self.model)?,
        });
        let g = q_loss_grad(batch, &targets, &self.model)?;
        self.opt.step(self.model.theta.as_mut_slice(), g.as_slice())?;
        self.target.clone_from(&self.model);
        self.updates += 1;
        Ok(())
    }
}

impl Agent for FittedQ {
    fn num_actions(&self) -> usize {
        self.model.basis().num_actions()
    }

    fn q_values_into(&self, s: usize, out: &mut [f64]) {
        self.model.q_values_into(s, out);
    }

    fn tie_break(&self) -> TieBreak {
        self.config.tie_break
    }

    fn observe(&mut self, t: Transition, _epsilon: f64) -> Result<()> {
        self.buffer.push(t);
        if self.buffer.len() >= self.config.batch_size {
            let batch = std::mem::take(&mut self.buffer);
            self.update(&batch)?;
            self.buffer = batch;
            self.buffer.clear();
        }
        Ok(())
    }

    fn task_changed(&mut self, rng: &mut dyn RngCore) {
        self.buffer.clear();
        if self.config.reset_strategy == ResetStrategy::ResetAll {
            fill_init(self.model.theta.as_mut_slice(), self.config.init, rng);
            self.opt.reset();
            self.target.clone_from(&self.model);
        }
    }

    fn updates(&self) -> usize {
        self.updates
    }

    fn losses(&self) -> &[LossRecord] {
        &self.losses
    }
}

/// ε-greedy controller over an agent's Q-values that feeds every observed
/// transition back into the agent.
pub struct EpsilonGreedy<'a, A: Agent + ?Sized> {
    pub agent: &'a mut A,
    pub epsilon: f64,
    q: Vec<f64>,
}

impl<'a, A: Agent + ?Sized> EpsilonGreedy<'a, A> {
    pub fn new(agent: &'a mut A, epsilon: f64) -> Self {
        let q = vec![0.0; agent.num_actions()];
        EpsilonGreedy { agent, epsilon, q }
    }
}

impl<A: Agent + ?Sized> Policy for EpsilonGreedy<'_, A> {
    fn act<R: Rng + ?Sized>(&mut self, state: usize, rng: &mut R) -> Result<usize> {
        self.agent.q_values_into(state, &mut self.q);
        Ok(select_action(&self.q, self.epsilon, self.agent.tie_break(), rng))
    }

    fn observe(&mut self, t: &Transition) -> Result<()> {
        self.agent.observe(*t, self.epsilon)
    }
}
