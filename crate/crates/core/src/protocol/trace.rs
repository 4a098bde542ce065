//! Per-step regret and per-episode diagnostics of one run.

use serde::Serialize;

/// Diagnostics recorded when the model for an episode is broadcast.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub lambda_k: f64,
    pub beta_k: f64,
    /// `‖E_k‖₂`: aggregated Gram matrix minus the honest average `W_k / N₀`.
    pub norm_gram_error: f64,
    /// `‖e_k‖₂`: aggregated feature sum minus the honest average `s_k / N₀`.
    pub norm_feature_error: f64,
    pub gram_error_bound: f64,
    pub feature_error_bound: f64,
    /// `‖θ_k − θ*‖₂`.
    pub theta_error: f64,
    pub min_eig_lambda: f64,
    /// Largest accumulated privacy noise norm over agents (matrix or vector).
    pub dp_noise_norm: f64,
    /// Whether every agent's private image equals its true sums bit for bit.
    pub private_equals_true: bool,
    /// Messages rejected by validation so far, over all agents.
    pub rejections: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretTrace {
    pub episode_length: usize,
    /// Cumulative robust regret after each step.
    pub cumulative_regret: Vec<f64>,
    pub episodes: Vec<EpisodeRecord>,
    /// σ fed to the schedules.
    pub sigma: f64,
    /// Per-node privacy noise scale (0 without privacy).
    pub noise_sigma: f64,
    pub corrupted: Vec<usize>,
}

impl RegretTrace {
    pub fn new(episode_length: usize, sigma: f64, noise_sigma: f64, corrupted: Vec<usize>) -> Self {
        Self {
            episode_length,
            cumulative_regret: Vec::new(),
            episodes: Vec::new(),
            sigma,
            noise_sigma,
            corrupted,
        }
    }

    /// Cumulative regret after the last simulated step.
    pub fn final_regret(&self) -> f64 {
        self.cumulative_regret.last().copied().unwrap_or(0.0)
    }

    /// Cumulative regret after step `t` (1-based), clamped to the simulated range.
    pub fn regret_at(&self, t: usize) -> f64 {
        if t == 0 || self.cumulative_regret.is_empty() {
            return 0.0;
        }
        self.cumulative_regret[t.min(self.cumulative_regret.len()) - 1]
    }

    /// Record of the episode containing step `t` (1-based).
    pub fn episode_of(&self, t: usize) -> Option<&EpisodeRecord> {
        let k = (t - 1) / self.episode_length + 1;
        self.episodes.iter().find(|e| e.episode == k)
    }
}
