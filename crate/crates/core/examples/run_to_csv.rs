//! Loads a configuration, applies overrides and writes the trace CSVs, as the
//! `run` subcommand does.
//!
//! Run with `cargo run --example run_to_csv`.

use robust_fedbandit::harness::{run_resolved, write_trace, ExperimentConfig};

fn main() {
    let overrides = vec![
        "seed=7".to_string(),
        "attack.alpha=0.25".into(),
        "oracle.kind=gm".into(),
    ];
    let cfg = ExperimentConfig::from_json_with_overrides(
        include_str!("../configs/minimal.json"),
        &overrides,
    )
    .expect("valid config");
    let resolved = cfg.resolve().unwrap();
    let outcome = run_resolved(&resolved, &cfg.output.name);
    let trace = outcome.results[0].as_ref().expect("run succeeds");
    let mut csv = Vec::new();
    write_trace(&mut csv, trace).unwrap();
    let text = String::from_utf8(csv).unwrap();
    for line in text.lines().take(4) {
        println!("{line}");
    }
    println!(
        "... {} rows, final regret {:.3}",
        trace.cumulative_regret.len(),
        trace.final_regret()
    );
}
