//! The episodic federated LinUCB protocol.
//!
//! Each episode the controller broadcasts `(θ_k, Λ_k, β_k)`. Agents act
//! optimistically for `L` steps, then upload `(U, u)`. The controller
//! sanitizes the uploads, extends each agent's running sums, privatizes them
//! and aggregates the private images with the configured oracle:
//! `Λ_k = Aggregate(V̂) + λ_k I`, `b_k = Aggregate(v̂)`, `θ_k = Λ_k⁻¹ b_k`.

mod agent;
mod attack;
mod controller;
mod run;
mod trace;

use thiserror::Error;

pub use agent::{accumulate, select_action, Accumulator, ModelBroadcast};
pub use attack::{
    apply_attack, AttackMode, AttackSpec, EpisodeMessage, Persistence, HUGE_NORM_SCALE,
};
pub use controller::{
    validate_message, AgentLedger, AggregateSnapshot, Controller, OracleKind, SanitizedMessage,
    NORM_SLACK, PD_FLOOR,
};
pub use run::{run_experiment, stream_rng, streams, AttackPlan, RunError, RunSpec};
pub use trace::{EpisodeRecord, RegretTrace};

use crate::bandit_env::EnvError;
use crate::mathcore::LinalgError;
use crate::robust_agg::AggError;
use crate::schedules::ScheduleError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("episode {episode}: regularized aggregate is not positive definite (min eigenvalue {min_eig:e})")]
    NotPositiveDefinite { episode: usize, min_eig: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Aggregation(#[from] AggError),
    #[error(transparent)]
    Environment(#[from] EnvError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("invalid run: {0}")]
    Invalid(String),
}
