use crate::{Error, Result};

/// Adagrad optimizer state: one squared-gradient accumulator per parameter.
///
/// Update per parameter: `acc += g²; θ -= lr · g / (sqrt(acc) + ε)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Adagrad {
    accum: Vec<f64>,
    learning_rate: f64,
    epsilon: f64,
    initial_accumulator: f64,
}

impl Adagrad {
    pub const DEFAULT_EPSILON: f64 = 1e-8;
    /// Starting value of every accumulator in agents built from `AgentConfig::default()`.
    pub const DEFAULT_INITIAL_ACCUMULATOR: f64 = 0.0;

    pub fn new(len: usize, learning_rate: f64) -> Self {
        Self::with_params(len, learning_rate, Self::DEFAULT_EPSILON, Self::DEFAULT_INITIAL_ACCUMULATOR)
    }

    pub fn with_params(len: usize, learning_rate: f64, epsilon: f64, initial_accumulator: f64) -> Self {
        Adagrad { accum: vec![initial_accumulator; len], learning_rate, epsilon, initial_accumulator }
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn accumulators(&self) -> &[f64] {
        &self.accum
    }

    /// Forget all accumulated history.
    pub fn reset(&mut self) {
        self.accum.fill(self.initial_accumulator);
    }

    /// Dense step over every parameter.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) -> Result<()> {
        if params.len() != self.accum.len() {
            return Err(Error::DimensionMismatch { expected: self.accum.len(), got: params.len() });
        }
        self.step_block(0, params, grad)
    }

    /// Step on the contiguous parameter range starting at `offset`. Entries
    /// outside the block are treated as having zero gradient, which leaves
    /// them and their accumulators unchanged.
    pub fn step_block(&mut self, offset: usize, params: &mut [f64], grad: &[f64]) -> Result<()> {
        if params.len() != grad.len() {
            return Err(Error::DimensionMismatch { expected: params.len(), got: grad.len() });
        }
        if offset + params.len() > self.accum.len() {
            return Err(Error::DimensionMismatch { expected: self.accum.len(), got: offset + params.len() });
        }
        if let Some((i, &g)) = grad.iter().enumerate().find(|(_, g)| !g.is_finite()) {
            return Err(Error::NonFiniteGradient { index: offset + i, value: g });
        }
        let acc = &mut self.accum[offset..offset + params.len()];
        for ((p, &g), a) in params.iter_mut().zip(grad).zip(acc) {
            if g == 0.0 {
                continue;
            }
            *a += g * g;
            *p -= self.learning_rate * g / (a.sqrt() + self.epsilon);
        }
        Ok(())
    }
}
