//! Without synchronization the agents never leave the zero model, so regret
//! grows linearly in the horizon.
//!
//! Run with `cargo run --release --example no_communication`.

use robust_fedbandit::harness::{run_resolved, ExperimentConfig};

fn main() {
    let mut cfg: ExperimentConfig =
        serde_json::from_str(include_str!("../configs/no_communication.json"))
            .expect("valid config");
    cfg.repetitions = 5;
    let resolved = cfg.resolve().expect("consistent config");
    let outcome = run_resolved(&resolved, "no-communication");
    let horizon = cfg.environment.horizon;
    let n = cfg.environment.agents as f64;
    println!(
        "alpha = {}, N = {n}, T = {horizon}: mean regret {:.1}, i.e. {:.3} alpha N T",
        cfg.attack.alpha,
        outcome.summary.mean_final_regret,
        outcome.summary.mean_final_regret / (cfg.attack.alpha * n * horizon as f64)
    );
    let trace = outcome.results[0].as_ref().expect("run succeeds");
    for q in 1..=4 {
        let (a, b) = ((q - 1) * horizon / 4, q * horizon / 4);
        let rate = (trace.regret_at(b) - trace.regret_at(a)) / (b - a) as f64;
        println!("  quarter {q}: regret per step {rate:.3}");
    }
}
