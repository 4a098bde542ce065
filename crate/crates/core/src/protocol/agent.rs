//! Agent side: optimistic action selection and per-episode accumulation.

use crate::bandit_env::DecisionSet;
use crate::mathcore::{SpdFactor, SymMatrix, Vector};

/// The controller's synchronized model for one episode.
#[derive(Debug, Clone)]
pub struct ModelBroadcast {
    pub episode: usize,
    pub theta: Vector,
    pub lambda: SymMatrix,
    pub beta: f64,
    /// Regularization `λ_k` that was added to the aggregate.
    pub lambda_k: f64,
    factor: SpdFactor,
}

impl ModelBroadcast {
    /// Factorizes `lambda` once; every selection in the episode reuses it.
    pub fn new(
        episode: usize,
        theta: Vector,
        lambda: SymMatrix,
        beta: f64,
        lambda_k: f64,
    ) -> Result<Self, crate::mathcore::LinalgError> {
        let factor = SpdFactor::new(&lambda)?;
        Ok(Self {
            episode,
            theta,
            lambda,
            beta,
            lambda_k,
            factor,
        })
    }

    /// Replaces `θ_k`, keeping the factorization of `Λ_k`.
    pub fn with_theta(self, theta: Vector) -> Self {
        Self { theta, ..self }
    }

    pub fn factor(&self) -> &SpdFactor {
        &self.factor
    }

    /// `⟨x, θ_k⟩ + β_k ‖x‖_{Λ_k⁻¹}`.
    pub fn ucb(&self, x: &Vector) -> f64 {
        x.dot(&self.theta) + self.beta * self.factor.inv_norm(x)
    }
}

/// Index and arm maximizing the UCB index; the lowest index wins ties.
pub fn select_action<'a>(set: &'a DecisionSet, bc: &ModelBroadcast) -> (usize, &'a Vector) {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, x) in set.arms.iter().enumerate() {
        let v = bc.ucb(x);
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    (best, &set.arms[best])
}

/// One agent's running upload for the current episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Accumulator {
    pub gram: SymMatrix,
    pub sum: Vector,
    /// The `(x, η)` pairs seen this episode, kept so an attacker can replay them.
    pub history: Vec<(Vector, f64)>,
}

impl Accumulator {
    pub fn new(d: usize) -> Self {
        Self {
            gram: SymMatrix::zeros(d),
            sum: Vector::zeros(d),
            history: Vec::new(),
        }
    }

    pub fn push(&mut self, x: &Vector, r: f64, eta: f64) {
        accumulate(&mut self.gram, &mut self.sum, x, r);
        self.history.push((x.clone(), eta));
    }
}

/// `U += x xᵀ`, `u += r x`.
pub fn accumulate(gram: &mut SymMatrix, sum: &mut Vector, x: &Vector, r: f64) {
    gram.add_outer(x);
    sum.axpy(r, x, 1.0);
}
