//! The full episodic protocol with regret accounting.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::agent::{select_action, Accumulator, ModelBroadcast};
use super::attack::{apply_attack, AttackMode, AttackSpec, EpisodeMessage, Persistence};
use super::controller::{AggregateSnapshot, Controller, OracleKind};
use super::trace::{EpisodeRecord, RegretTrace};
use super::ProtocolError;
use crate::bandit_env::{optimal_value, Environment, EnvironmentSpec};
use crate::mathcore::{self, SymMatrix, Vector};
use crate::privacy::NoiseTree;
use crate::robust_agg::partition_agents;
use crate::schedules::ScheduleConfig;

/// Independent generator streams derived from one run seed.
pub mod streams {
    pub const ENVIRONMENT: u64 = 0;
    pub const ATTACK: u64 = 1;
    pub const PARTITION: u64 = 2;
    pub const SIGMA: u64 = 3;
    /// Agent `i`'s noise tree is seeded from stream `NOISE_TREE + i`.
    pub const NOISE_TREE: u64 = 100;
}

/// Generator for `stream` of the run seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// How many agents are corrupted and how they behave.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackPlan {
    pub corrupted: usize,
    pub modes: Vec<AttackMode>,
    pub persistence: Persistence,
}

impl AttackPlan {
    pub fn none() -> Self {
        Self {
            corrupted: 0,
            modes: vec![AttackMode::ZeroOut],
            persistence: Persistence::Always,
        }
    }
}

/// A fully resolved run: every parameter the protocol reads.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub env: EnvironmentSpec,
    pub attack: AttackPlan,
    pub oracle: OracleKind,
    /// Accuracy of the geometric-median solver.
    pub oracle_epsilon: f64,
    pub max_iter: usize,
    /// Schedule with `l`, `k` and the padded horizon filled in.
    pub schedule: ScheduleConfig,
    /// Validation thresholds on message norms.
    pub dp_mode: bool,
    /// Per-node noise standard deviation; zero disables the privatizer.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl RunSpec {
    pub fn episodes(&self) -> usize {
        self.schedule.k
    }

    pub fn episode_length(&self) -> usize {
        self.schedule.l
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        self.env.validate()?;
        self.schedule.validate()?;
        let n = self.env.agents;
        if 2 * self.attack.corrupted >= n {
            return Err(ProtocolError::Invalid(format!(
                "{} corrupted agents out of {n} violates alpha < 1/2",
                self.attack.corrupted
            )));
        }
        if self.attack.corrupted > 0 && self.attack.modes.is_empty() {
            return Err(ProtocolError::Invalid(
                "attack needs at least one mode".into(),
            ));
        }
        if let Persistence::PerEpisode { p } = self.attack.persistence {
            if !(0.0..=1.0).contains(&p) {
                return Err(ProtocolError::Invalid(format!(
                    "attack probability {p} outside [0, 1]"
                )));
            }
        }
        if self.schedule.d != self.env.d || self.schedule.n != n {
            return Err(ProtocolError::Invalid(
                "schedule and environment disagree on d or N".into(),
            ));
        }
        if !(self.oracle_epsilon > 0.0) || self.max_iter == 0 {
            return Err(ProtocolError::Invalid(
                "oracle epsilon must be positive and max_iter at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// A run that stopped early, with everything recorded up to the failure.
#[derive(Debug)]
pub struct RunError {
    pub error: ProtocolError,
    pub partial: Box<RegretTrace>,
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} (after {} steps)",
            self.error,
            self.partial.cumulative_regret.len()
        )
    }
}

impl std::error::Error for RunError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

struct Diagnostics<'a> {
    honest: &'a [usize],
    theta: &'a Vector,
    schedule: &'a ScheduleConfig,
}

impl Diagnostics<'_> {
    fn record(
        &self,
        controller: &Controller,
        snapshot: &AggregateSnapshot,
        bc: &ModelBroadcast,
    ) -> EpisodeRecord {
        let ledger = controller.ledger();
        let d = self.theta.len();
        let n0 = self.honest.len() as f64;
        let mut w = SymMatrix::zeros(d);
        let mut s = Vector::zeros(d);
        for &i in self.honest {
            w = w.add(&ledger[i].gram);
            s += &ledger[i].sum;
        }
        let w_avg = SymMatrix::new(w.as_matrix() / n0).expect("scaled symmetric matrix");
        let k = bc.episode;
        let dp_noise_norm = ledger
            .iter()
            .map(|e| e.noise_norm().max((&e.private_sum - &e.sum).norm()))
            .fold(0.0, f64::max);
        EpisodeRecord {
            episode: k,
            lambda_k: bc.lambda_k,
            beta_k: bc.beta,
            norm_gram_error: snapshot.gram.sub(&w_avg).spectral_norm(),
            norm_feature_error: (&snapshot.sum - s / n0).norm(),
            gram_error_bound: self.schedule.gram_error_bound(k),
            feature_error_bound: self.schedule.feature_error_bound(k),
            theta_error: (&bc.theta - self.theta).norm(),
            min_eig_lambda: mathcore::min_eigenvalue(&bc.lambda),
            dp_noise_norm,
            private_equals_true: ledger
                .iter()
                .all(|e| e.private_gram == e.gram && e.private_sum == e.sum),
            rejections: ledger.iter().map(|e| e.rejections).sum(),
        }
    }
}

/// Simulates `K` episodes of `L` steps and returns the regret trace.
///
/// Deterministic in `spec.seed`. Corrupted agents still act but their steps
/// are left out of the regret while their attack is active.
pub fn run_experiment(spec: &RunSpec) -> Result<RegretTrace, RunError> {
    let empty = || {
        RegretTrace::new(
            spec.episode_length(),
            spec.schedule.sigma,
            spec.noise_sigma,
            Vec::new(),
        )
    };
    spec.validate().map_err(|error| RunError {
        error,
        partial: Box::new(empty()),
    })?;
    let n = spec.env.agents;
    let d = spec.env.d;
    let l = spec.episode_length();
    let episodes = spec.episodes();

    let mut env = Environment::new(
        spec.env.clone(),
        stream_rng(spec.seed, streams::ENVIRONMENT),
    )
    .map_err(|e| RunError {
        error: e.into(),
        partial: Box::new(empty()),
    })?;
    let theta = env.theta().clone();
    let mut attack_rng = stream_rng(spec.seed, streams::ATTACK);
    let attack = if spec.attack.corrupted == 0 {
        AttackSpec::none()
    } else {
        AttackSpec::random(
            n,
            spec.attack.corrupted,
            &spec.attack.modes,
            spec.attack.persistence,
            &mut attack_rng,
        )
    };
    let honest: Vec<usize> = (0..n).filter(|i| attack.mode_of(*i).is_none()).collect();
    let mut trace = RegretTrace::new(
        l,
        spec.schedule.sigma,
        spec.noise_sigma,
        attack.corrupted.clone(),
    );

    let fail = |error: ProtocolError, trace: &RegretTrace| RunError {
        error,
        partial: Box::new(trace.clone()),
    };

    let partition = if spec.oracle == OracleKind::GmOfMeans {
        let mut rng = stream_rng(spec.seed, streams::PARTITION);
        Some(partition_agents(n, attack.count(), &mut rng).map_err(|e| fail(e.into(), &trace))?)
    } else {
        None
    };
    let trees = (0..n)
        .map(|i| {
            if spec.noise_sigma == 0.0 {
                NoiseTree::disabled(episodes, d)
            } else {
                let tree_seed = stream_rng(spec.seed, streams::NOISE_TREE + i as u64).next_u64();
                NoiseTree::new(episodes, d, spec.noise_sigma, tree_seed)
            }
        })
        .collect();
    let mut controller = Controller::new(
        d,
        l,
        spec.dp_mode,
        spec.oracle,
        partition,
        spec.oracle_epsilon,
        spec.max_iter,
        spec.schedule,
        trees,
    )
    .map_err(|e| fail(e, &trace))?;
    let diag = Diagnostics {
        honest: &honest,
        theta: &theta,
        schedule: &spec.schedule,
    };

    let snapshot = controller.aggregate().map_err(|e| fail(e, &trace))?;
    let mut bc = controller
        .broadcast(&snapshot, 1)
        .map_err(|e| fail(e, &trace))?;
    trace
        .episodes
        .push(diag.record(&controller, &snapshot, &bc));

    let mut cumulative = 0.0;
    for k in 1..=episodes {
        let active = attack.active(n, &mut attack_rng);
        let mut accs = vec![Accumulator::new(d); n];
        for step in 0..l {
            let t = (k - 1) * l + step + 1;
            let draw = env.sample_round(t);
            for i in 0..n {
                let set = &draw.sets[i];
                let (_, x) = select_action(set, &bc);
                let eta = draw.noise[i];
                let r = env.reward(x, eta);
                accs[i].push(x, r, eta);
                if !active[i] {
                    cumulative += optimal_value(set, &theta) - x.dot(&theta);
                }
            }
            trace.cumulative_regret.push(cumulative);
        }
        if k == episodes {
            break;
        }
        let messages: Vec<EpisodeMessage> = accs
            .iter()
            .enumerate()
            .map(|(i, acc)| {
                let msg = EpisodeMessage::honest(i, k, acc);
                match (active[i], attack.mode_of(i)) {
                    (true, Some(mode)) => apply_attack(msg, mode, acc, &theta, &mut attack_rng),
                    _ => msg,
                }
            })
            .collect();
        controller.ingest(&messages, k);
        let snapshot = controller.aggregate().map_err(|e| fail(e, &trace))?;
        bc = controller
            .broadcast(&snapshot, k + 1)
            .map_err(|e| fail(e, &trace))?;
        trace
            .episodes
            .push(diag.record(&controller, &snapshot, &bc));
    }
    Ok(trace)
}
