//! Byzantine-robust federated linear bandits.
//!
//! The crate simulates a controller and `N` agents running episodic LinUCB.
//! Agents upload per-episode Gram matrices and feature sums; the controller
//! sanitizes them, optionally privatizes the running sums with a tree-based
//! mechanism, and combines them through a robust aggregation oracle.
//!
//! * [`mathcore`] dense symmetric linear algebra
//! * [`robust_agg`] mean, geometric median and geometric median of means
//! * [`privacy`] tree-based private partial sums
//! * [`bandit_env`] stochastic decision sets and rewards
//! * [`schedules`] regularization and confidence-radius schedules
//! * [`protocol`] agents, controller, attacks and regret accounting
//! * [`harness`] configuration, CSV output and the command-line driver

// Validation writes `!(x > 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandit_env;
pub mod harness;
pub mod mathcore;
pub mod privacy;
pub mod protocol;
pub mod robust_agg;
pub mod schedules;
