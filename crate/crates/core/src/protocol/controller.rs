//! Controller side: message validation, the per-agent ledger and aggregation.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::agent::ModelBroadcast;
use super::attack::EpisodeMessage;
use super::ProtocolError;
use crate::mathcore::{
    self, max_asymmetry, symmetrize, unflatten, SymMatrix, Vector, SYMMETRY_TOL,
};
use crate::privacy::NoiseTree;
use crate::robust_agg::{self, GroupPartition, PointCloud};
use crate::schedules::ScheduleConfig;

/// Relative slack on the `L` norm thresholds, absorbing rounding in honest sums.
pub const NORM_SLACK: f64 = 1e-9;

/// Smallest admissible eigenvalue of `Λ_k`.
pub const PD_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    Mean,
    Gm,
    GmOfMeans,
}

/// A message after validation: symmetric and, in private mode, norm-bounded.
#[derive(Debug, Clone, PartialEq)]
pub struct SanitizedMessage {
    pub gram: SymMatrix,
    pub sum: Vector,
    pub accepted: bool,
}

/// Replaces a malformed message by `(0, 0)`.
///
/// Always rejected: wrong shape, non-finite entries, asymmetry above
/// [`SYMMETRY_TOL`]. In private mode also `‖U‖_F > L` or `‖u‖₂ > L`.
/// Accepted matrices are symmetrized so downstream symmetry is exact.
pub fn validate_message(
    msg: &EpisodeMessage,
    d: usize,
    l: usize,
    dp_mode: bool,
) -> SanitizedMessage {
    let reject = SanitizedMessage {
        gram: SymMatrix::zeros(d),
        sum: Vector::zeros(d),
        accepted: false,
    };
    let shape_ok = msg.gram.nrows() == d && msg.gram.ncols() == d && msg.sum.len() == d;
    if !shape_ok
        || msg
            .gram
            .iter()
            .chain(msg.sum.iter())
            .any(|x| !x.is_finite())
    {
        return reject;
    }
    if max_asymmetry(&msg.gram) > SYMMETRY_TOL {
        return reject;
    }
    if dp_mode {
        let bound = l as f64 * (1.0 + NORM_SLACK);
        if msg.gram.norm() > bound || msg.sum.norm() > bound {
            return reject;
        }
    }
    SanitizedMessage {
        gram: symmetrize(&msg.gram),
        sum: msg.sum.clone(),
        accepted: true,
    }
}

/// One agent's running sums at the controller.
#[derive(Debug, Clone)]
pub struct AgentLedger {
    pub gram: SymMatrix,
    pub sum: Vector,
    pub private_gram: SymMatrix,
    pub private_sum: Vector,
    pub tree: NoiseTree,
    /// Episodes whose message was rejected.
    pub rejections: usize,
}

impl AgentLedger {
    pub fn new(d: usize, tree: NoiseTree) -> Self {
        Self {
            gram: SymMatrix::zeros(d),
            sum: Vector::zeros(d),
            private_gram: SymMatrix::zeros(d),
            private_sum: Vector::zeros(d),
            tree,
            rejections: 0,
        }
    }

    /// Spectral norm of the matrix noise currently in the private image.
    pub fn noise_norm(&self) -> f64 {
        self.private_gram.sub(&self.gram).spectral_norm()
    }
}

/// Aggregated private sums before regularization.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateSnapshot {
    pub gram: SymMatrix,
    pub sum: Vector,
}

#[derive(Debug, Clone)]
pub struct Controller {
    d: usize,
    l: usize,
    dp_mode: bool,
    oracle: OracleKind,
    partition: Option<GroupPartition>,
    epsilon: f64,
    max_iter: usize,
    schedule: ScheduleConfig,
    ledger: Vec<AgentLedger>,
}

impl Controller {
    /// `trees` holds one noise tree per agent; `partition` is required by the
    /// geometric median of means and ignored otherwise.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        d: usize,
        l: usize,
        dp_mode: bool,
        oracle: OracleKind,
        partition: Option<GroupPartition>,
        epsilon: f64,
        max_iter: usize,
        schedule: ScheduleConfig,
        trees: Vec<NoiseTree>,
    ) -> Result<Self, ProtocolError> {
        let n = trees.len();
        if oracle == OracleKind::GmOfMeans {
            match &partition {
                Some(p) if p.num_indices() == n => {}
                _ => {
                    return Err(ProtocolError::Invalid(
                        "geometric median of means needs a partition of the agents".into(),
                    ))
                }
            }
        }
        Ok(Self {
            d,
            l,
            dp_mode,
            oracle,
            partition,
            epsilon,
            max_iter,
            schedule,
            ledger: trees.into_iter().map(|t| AgentLedger::new(d, t)).collect(),
        })
    }

    pub fn ledger(&self) -> &[AgentLedger] {
        &self.ledger
    }

    pub fn schedule(&self) -> &ScheduleConfig {
        &self.schedule
    }

    pub fn oracle(&self) -> OracleKind {
        self.oracle
    }

    pub fn partition(&self) -> Option<&GroupPartition> {
        self.partition.as_ref()
    }

    /// Validates episode `k`'s messages, updates the true sums and refreshes
    /// the private images for episode `k + 1`. Agents without a message count
    /// as having sent zeros.
    pub fn ingest(&mut self, messages: &[EpisodeMessage], k: usize) {
        let (d, l, dp) = (self.d, self.l, self.dp_mode);
        for (i, entry) in self.ledger.iter_mut().enumerate() {
            let clean = match messages.iter().find(|m| m.agent == i && m.episode == k) {
                Some(msg) => validate_message(msg, d, l, dp),
                None => validate_message(&EpisodeMessage::zero(i, k, d), d, l, dp),
            };
            if !clean.accepted {
                entry.rejections += 1;
            }
            entry.gram = entry.gram.add(&clean.gram);
            entry.sum += &clean.sum;
            let (pg, ps) = entry.tree.privatize(&entry.gram, &entry.sum, k + 1);
            entry.private_gram = pg;
            entry.private_sum = ps;
        }
    }

    /// Aggregates the private images.
    pub fn aggregate(&self) -> Result<AggregateSnapshot, ProtocolError> {
        let d = self.d;
        let mats: Vec<DMatrix<f64>> = self
            .ledger
            .iter()
            .map(|e| e.private_gram.as_matrix().clone())
            .collect();
        let vecs: Vec<Vector> = self.ledger.iter().map(|e| e.private_sum.clone()).collect();
        let mat_cloud = PointCloud::from_matrices(d, &mats)?;
        let vec_cloud = PointCloud::new(d, vecs)?;
        let (flat, sum) = match self.oracle {
            OracleKind::Mean => (
                robust_agg::arithmetic_mean(&mat_cloud),
                robust_agg::arithmetic_mean(&vec_cloud),
            ),
            OracleKind::Gm => (
                robust_agg::geometric_median(&mat_cloud, self.epsilon, self.max_iter)?,
                robust_agg::geometric_median(&vec_cloud, self.epsilon, self.max_iter)?,
            ),
            OracleKind::GmOfMeans => {
                let p = self.partition.as_ref().expect("checked in the constructor");
                (
                    robust_agg::gm_of_means(&mat_cloud, p, self.epsilon, self.max_iter)?,
                    robust_agg::gm_of_means(&vec_cloud, p, self.epsilon, self.max_iter)?,
                )
            }
        };
        Ok(AggregateSnapshot {
            gram: symmetrize(&unflatten(&flat, d)),
            sum,
        })
    }

    /// Builds the broadcast for episode `k` from an aggregate.
    pub fn broadcast(
        &self,
        snapshot: &AggregateSnapshot,
        k: usize,
    ) -> Result<ModelBroadcast, ProtocolError> {
        let lambda_k = self.schedule.lambda_k(k);
        let lambda = snapshot.gram.add_scaled_identity(lambda_k);
        let min_eig = mathcore::min_eigenvalue(&lambda);
        if !(min_eig > PD_FLOOR) {
            return Err(ProtocolError::NotPositiveDefinite {
                episode: k,
                min_eig,
            });
        }
        let beta = self.schedule.beta_k(k, lambda_k);
        let bc = ModelBroadcast::new(k, Vector::zeros(self.d), lambda, beta, lambda_k)?;
        let theta = bc.factor().solve(&snapshot.sum);
        Ok(bc.with_theta(theta))
    }

    /// Ingests episode `k`'s messages and returns the model for episode `k + 1`.
    pub fn sync(
        &mut self,
        messages: &[EpisodeMessage],
        k: usize,
    ) -> Result<ModelBroadcast, ProtocolError> {
        self.ingest(messages, k);
        let snapshot = self.aggregate()?;
        self.broadcast(&snapshot, k + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedules::Variant;

    fn msg(gram: &[f64], sum: &[f64]) -> EpisodeMessage {
        let d = sum.len();
        EpisodeMessage {
            agent: 0,
            episode: 1,
            gram: DMatrix::from_row_slice(d, d, gram),
            sum: Vector::from_column_slice(sum),
        }
    }

    #[test]
    fn validation_examples() {
        let honest = msg(&[0.5, 0.5, 0.5, 0.5], &[0.3, 0.3]);
        let out = validate_message(&honest, 2, 1, true);
        assert!(out.accepted);
        assert_eq!(out.gram.as_matrix(), &honest.gram);

        let asym = msg(&[0.0, 5.0, 0.0, 0.0], &[0.0, 0.0]);
        assert!(!validate_message(&asym, 2, 10, false).accepted);

        let long = msg(&[1.0, 0.0, 0.0, 1.0], &[2.1, 0.0]);
        let out = validate_message(&long, 2, 2, true);
        assert!(!out.accepted);
        assert_eq!(out.gram, SymMatrix::zeros(2));
        assert!(validate_message(&long, 2, 2, false).accepted);

        let nan = msg(&[f64::NAN, 0.0, 0.0, 1.0], &[0.0, 0.0]);
        assert!(!validate_message(&nan, 2, 2, false).accepted);
        let shape = msg(&[1.0], &[0.0]);
        assert!(!validate_message(&shape, 2, 2, false).accepted);
    }

    fn schedule() -> ScheduleConfig {
        ScheduleConfig {
            variant: Variant::T1Robust,
            alpha: 0.0,
            sigma: 0.0,
            r: 0.1,
            d: 2,
            n: 3,
            t: 8,
            delta: 0.1,
            b: 0.0,
            epsilon: 1e-6,
            l: 2,
            k: 4,
        }
    }

    #[test]
    fn first_broadcast_is_regularizer_only() {
        let trees = (0..3).map(|_| NoiseTree::disabled(4, 2)).collect();
        let c = Controller::new(
            2,
            2,
            false,
            OracleKind::Gm,
            None,
            1e-6,
            10_000,
            schedule(),
            trees,
        )
        .unwrap();
        let bc = c.broadcast(&c.aggregate().unwrap(), 1).unwrap();
        assert_eq!(bc.lambda, SymMatrix::identity(2).add_scaled_identity(1.0));
        assert_eq!(bc.theta, Vector::zeros(2));
    }

    #[test]
    fn identical_agents_pass_through_gm() {
        let trees = (0..3).map(|_| NoiseTree::disabled(4, 2)).collect();
        let mut c = Controller::new(
            2,
            2,
            false,
            OracleKind::Gm,
            None,
            1e-6,
            10_000,
            schedule(),
            trees,
        )
        .unwrap();
        let msgs: Vec<_> = (0..3)
            .map(|i| EpisodeMessage {
                agent: i,
                ..msg(&[1.0, 0.2, 0.2, 0.5], &[0.4, -0.1])
            })
            .collect();
        let bc = c.sync(&msgs, 1).unwrap();
        let m = SymMatrix::from_rows(2, &[1.0, 0.2, 0.2, 0.5]).unwrap();
        assert_eq!(bc.lambda, m.add_scaled_identity(schedule().lambda_k(2)));
    }

    #[test]
    fn indefinite_aggregate_is_an_error() {
        let trees = (0..1).map(|_| NoiseTree::disabled(4, 2)).collect();
        let c = Controller::new(
            2,
            2,
            false,
            OracleKind::Mean,
            None,
            1e-6,
            10_000,
            schedule(),
            trees,
        )
        .unwrap();
        let snap = AggregateSnapshot {
            gram: SymMatrix::from_diagonal(&[-5.0, 1.0]),
            sum: Vector::zeros(2),
        };
        assert!(matches!(
            c.broadcast(&snap, 1),
            Err(ProtocolError::NotPositiveDefinite { .. })
        ));
    }
}
