//! Mean versus geometric-median aggregation under a huge-norm attack.
//!
//! A fifth of the agents replace their feature sums by `−10⁶ u`. The mean
//! oracle follows them; the geometric median ignores them.
//!
//! Run with `cargo run --release --example byzantine_ucb`.

use robust_fedbandit::harness::{run_resolved, ExperimentConfig};
use robust_fedbandit::protocol::OracleKind;

fn main() {
    let mut cfg: ExperimentConfig =
        serde_json::from_str(include_str!("../configs/byzantine_gm.json")).expect("valid config");
    cfg.repetitions = 4;
    for oracle in [OracleKind::Mean, OracleKind::Gm] {
        cfg.oracle.kind = oracle;
        let resolved = cfg.resolve().expect("consistent config");
        let outcome = run_resolved(&resolved, "demo");
        let s = resolved.base.schedule;
        println!(
            "{oracle:?}: L = {}, K = {}, sigma = {:.3}, mean final regret {:.1} (sd {:.1})",
            s.l, s.k, s.sigma, outcome.summary.mean_final_regret, outcome.summary.std_final_regret
        );
        let trace = outcome.results[0].as_ref().expect("run succeeds");
        for e in &trace.episodes {
            println!(
                "  k = {}: |theta_k - theta*| = {:>12.4}, |E_k| = {:>8.3} (bound {:>8.1}), |e_k| = {:>12.3} (bound {:>8.1})",
                e.episode, e.theta_error, e.norm_gram_error, e.gram_error_bound, e.norm_feature_error, e.feature_error_bound
            );
        }
    }
}
