//! One-hot reward features and the linear successor-feature model.
//!
//! With a one-hot `φ(s, a)`, `ψ(s, a) = Ψ φ(s, a)` is simply the `(s, a)`
//! column of `Ψ`, `φᵀw` is the `(s, a)` entry of `w`, and
//! `Q(s, a) = ψ(s, a)ᵀ w`.

use nalgebra::{DMatrix, DVector};

use crate::checkpoint::Checkpoint;
use crate::{Error, Result};

/// Tabular basis over state-action pairs, index `s * num_actions + a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OneHotBasis {
    num_states: usize,
    num_actions: usize,
}

impl OneHotBasis {
    pub fn new(num_states: usize, num_actions: usize) -> Result<Self> {
        if num_states == 0 || num_actions == 0 {
            return Err(Error::Config("basis needs at least one state and action".into()));
        }
        Ok(OneHotBasis { num_states, num_actions })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn dimension(&self) -> usize {
        self.num_states * self.num_actions
    }

    #[inline]
    pub fn index_unchecked(&self, s: usize, a: usize) -> usize {
        s * self.num_actions + a
    }

    pub fn index(&self, s: usize, a: usize) -> Result<usize> {
        if s >= self.num_states {
            return Err(Error::OutOfRange { what: "state", index: s, limit: self.num_states });
        }
        if a >= self.num_actions {
            return Err(Error::OutOfRange { what: "action", index: a, limit: self.num_actions });
        }
        Ok(self.index_unchecked(s, a))
    }

    /// `φ(s, a)`.
    pub fn phi(&self, s: usize, a: usize) -> Result<DVector<f64>> {
        let i = self.index(s, a)?;
        let mut v = DVector::zeros(self.dimension());
        v[i] = 1.0;
        Ok(v)
    }
}

/// Linear successor-feature model: SF matrix `Ψ` and reward weights `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct SfModel {
    pub psi: DMatrix<f64>,
    pub w: DVector<f64>,
    basis: OneHotBasis,
}

impl SfModel {
    pub fn zeros(basis: OneHotBasis) -> Self {
        let d = basis.dimension();
        SfModel { psi: DMatrix::zeros(d, d), w: DVector::zeros(d), basis }
    }

    pub fn from_parts(psi: DMatrix<f64>, w: DVector<f64>, basis: OneHotBasis) -> Result<Self> {
        let d = basis.dimension();
        if psi.nrows() != d || psi.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: psi.nrows().max(psi.ncols()) });
        }
        if w.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: w.len() });
        }
        Ok(SfModel { psi, w, basis })
    }

    pub fn basis(&self) -> &OneHotBasis {
        &self.basis
    }

    /// `ψ(s, a) = Ψ φ(s, a)`.
    pub fn sf_forward(&self, s: usize, a: usize) -> Result<DVector<f64>> {
        let i = self.basis.index(s, a)?;
        Ok(self.psi.column(i).into_owned())
    }

    /// `Q(s, a) = ψ(s, a)ᵀ w`.
    pub fn q_from_sf(&self, s: usize, a: usize) -> Result<f64> {
        let i = self.basis.index(s, a)?;
        Ok(self.q_at(i))
    }

    /// `φ(s, a)ᵀ w`.
    pub fn reward_predict(&self, s: usize, a: usize) -> Result<f64> {
        Ok(self.w[self.basis.index(s, a)?])
    }

    #[inline]
    pub(crate) fn q_at(&self, index: usize) -> f64 {
        self.psi.column(index).dot(&self.w)
    }

    /// Q-values of every action at `s`, written into `out`.
    pub fn q_values_into(&self, s: usize, out: &mut [f64]) {
        let base = s * self.basis.num_actions();
        for (a, q) in out.iter_mut().enumerate() {
            *q = self.q_at(base + a);
        }
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let mut ck = Checkpoint::default();
        ck.insert_matrix("psi", &self.psi);
        ck.insert_vector("w", &self.w);
        ck
    }

    pub fn from_checkpoint(ck: &Checkpoint, basis: OneHotBasis) -> Result<Self> {
        Self::from_parts(ck.matrix("psi")?, ck.vector("w")?, basis)
    }
}

/// Tabular Q-function `θ` for the fitted Q-iteration baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct QModel {
    pub theta: DVector<f64>,
    basis: OneHotBasis,
}

impl QModel {
    pub fn zeros(basis: OneHotBasis) -> Self {
        QModel { theta: DVector::zeros(basis.dimension()), basis }
    }

    pub fn from_theta(theta: DVector<f64>, basis: OneHotBasis) -> Result<Self> {
        if theta.len() != basis.dimension() {
            return Err(Error::DimensionMismatch { expected: basis.dimension(), got: theta.len() });
        }
        Ok(QModel { theta, basis })
    }

    pub fn basis(&self) -> &OneHotBasis {
        &self.basis
    }

    pub fn q(&self, s: usize, a: usize) -> Result<f64> {
        Ok(self.theta[self.basis.index(s, a)?])
    }

    /// `max_a Q(s, a)`.
    pub fn value(&self, s: usize) -> f64 {
        let base = s * self.basis.num_actions();
        self.theta.rows(base, self.basis.num_actions()).max()
    }

    pub fn q_values_into(&self, s: usize, out: &mut [f64]) {
        let base = s * self.basis.num_actions();
        out.copy_from_slice(&self.theta.as_slice()[base..base + out.len()]);
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let mut ck = Checkpoint::default();
        ck.insert_vector("theta", &self.theta);
        ck
    }

    pub fn from_checkpoint(ck: &Checkpoint, basis: OneHotBasis) -> Result<Self> {
        Self::from_theta(ck.vector("theta")?, basis)
    }
}
