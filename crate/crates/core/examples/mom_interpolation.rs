//! Geometric median of means across corruption levels, driven through the
//! sweep machinery. At α = 0 the oracle is the plain mean.
//!
//! Run with `cargo run --release --example mom_interpolation`.

use robust_fedbandit::harness::{apply_override, run_sweep, SweepSpec};

fn main() {
    let mut spec: SweepSpec =
        serde_json::from_str(include_str!("../configs/mom_sweep.json")).expect("valid sweep");
    apply_override(&mut spec.base, "repetitions=3").unwrap();
    apply_override(&mut spec.base, "environment.horizon=600").unwrap();
    let cells = run_sweep(&spec, &[]).expect("valid axes");
    println!("{:<22} {:>12} {:>10}", "cell", "mean regret", "std");
    for cell in &cells {
        let row = cell.summary(3);
        println!(
            "{:<22} {:>12.1} {:>10.1}",
            row.config_id, row.mean_final_regret, row.std_final_regret
        );
    }
}
