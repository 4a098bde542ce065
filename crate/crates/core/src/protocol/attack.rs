//! Byzantine corruption of episode messages.

use nalgebra::DMatrix;
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::agent::Accumulator;
use crate::mathcore::Vector;

/// Factor applied by [`AttackMode::HugeNorm`].
pub const HUGE_NORM_SCALE: f64 = 1e6;

/// An upload as it reaches the controller: possibly asymmetric, possibly garbage.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeMessage {
    pub agent: usize,
    pub episode: usize,
    pub gram: DMatrix<f64>,
    pub sum: Vector,
}

impl EpisodeMessage {
    pub fn honest(agent: usize, episode: usize, acc: &Accumulator) -> Self {
        Self {
            agent,
            episode,
            gram: acc.gram.as_matrix().clone(),
            sum: acc.sum.clone(),
        }
    }

    pub fn zero(agent: usize, episode: usize, d: usize) -> Self {
        Self {
            agent,
            episode,
            gram: DMatrix::zeros(d, d),
            sum: Vector::zeros(d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackMode {
    /// Sends `(0, 0)`.
    ZeroOut,
    /// Keeps the Gram matrix and sends `−10⁶ u`.
    HugeNorm,
    /// Sends `(U, −u)`.
    SignFlip,
    /// Perturbs one off-diagonal entry of `U` (a NaN when `d = 1`).
    AsymmetricGarbage,
    /// Recomputes `u` from the recorded actions against `−θ*`.
    FakeParameter,
    /// Symmetric standard-normal `U` and standard-normal `u`.
    RandomGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Persistence {
    /// Corrupted agents attack in every episode.
    Always,
    /// Each corrupted agent attacks in each episode independently with probability `p`.
    PerEpisode { p: f64 },
}

/// Who is corrupted and how.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackSpec {
    /// Sorted indices of the corrupted agents.
    pub corrupted: Vec<usize>,
    /// Mode per corrupted agent, aligned with `corrupted`.
    pub modes: Vec<AttackMode>,
    pub persistence: Persistence,
}

impl AttackSpec {
    pub fn none() -> Self {
        Self {
            corrupted: Vec::new(),
            modes: Vec::new(),
            persistence: Persistence::Always,
        }
    }

    /// Picks `count` agents uniformly at random and hands out `modes` round-robin.
    pub fn random<R: Rng + ?Sized>(
        agents: usize,
        count: usize,
        modes: &[AttackMode],
        persistence: Persistence,
        rng: &mut R,
    ) -> Self {
        let mut corrupted = index::sample(rng, agents, count.min(agents)).into_vec();
        corrupted.sort_unstable();
        let modes = (0..corrupted.len())
            .map(|i| modes[i % modes.len()])
            .collect();
        Self {
            corrupted,
            modes,
            persistence,
        }
    }

    pub fn mode_of(&self, agent: usize) -> Option<AttackMode> {
        self.corrupted
            .binary_search(&agent)
            .ok()
            .map(|pos| self.modes[pos])
    }

    pub fn count(&self) -> usize {
        self.corrupted.len()
    }

    /// Per-agent attack flags for one episode, drawn in agent order.
    pub fn active<R: Rng + ?Sized>(&self, agents: usize, rng: &mut R) -> Vec<bool> {
        let mut flags = vec![false; agents];
        for &i in &self.corrupted {
            flags[i] = match self.persistence {
                Persistence::Always => true,
                Persistence::PerEpisode { p } => rng.random_bool(p.clamp(0.0, 1.0)),
            };
        }
        flags
    }
}

/// Corrupts one agent's honest message.
///
/// `theta` is the true parameter and `acc` the agent's record for the episode,
/// both only read by [`AttackMode::FakeParameter`].
pub fn apply_attack<R: Rng + ?Sized>(
    msg: EpisodeMessage,
    mode: AttackMode,
    acc: &Accumulator,
    theta: &Vector,
    rng: &mut R,
) -> EpisodeMessage {
    let d = msg.sum.len();
    let EpisodeMessage {
        agent,
        episode,
        mut gram,
        mut sum,
    } = msg;
    match mode {
        AttackMode::ZeroOut => return EpisodeMessage::zero(agent, episode, d),
        AttackMode::HugeNorm => sum *= -HUGE_NORM_SCALE,
        AttackMode::SignFlip => sum = -sum,
        AttackMode::AsymmetricGarbage => {
            if d >= 2 {
                gram[(0, 1)] += 1.0;
            } else {
                gram[(0, 0)] = f64::NAN;
            }
        }
        AttackMode::FakeParameter => {
            let fake = -theta;
            sum = Vector::zeros(d);
            for (x, eta) in &acc.history {
                sum.axpy(x.dot(&fake) + eta, x, 1.0);
            }
        }
        AttackMode::RandomGaussian => {
            for i in 0..d {
                for j in i..d {
                    let z: f64 = StandardNormal.sample(rng);
                    gram[(i, j)] = z;
                    gram[(j, i)] = z;
                }
            }
            sum = Vector::from_fn(d, |_, _| StandardNormal.sample(rng));
        }
    }
    EpisodeMessage {
        agent,
        episode,
        gram,
        sum,
    }
}
