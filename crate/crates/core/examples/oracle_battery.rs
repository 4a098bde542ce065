//! The invariant battery behind `fedbandit oracle-check`, plus its self-test.
//!
//! Run with `cargo run --release --example oracle_battery`.

use robust_fedbandit::harness::{run_battery, BatteryOptions};

fn main() {
    let opts = BatteryOptions {
        trials: Some(25),
        ..Default::default()
    };
    for r in run_battery(opts) {
        println!(
            "{:<5} {:<45} {}",
            if r.passed() { "pass" } else { "FAIL" },
            r.name,
            r.detail
        );
    }
    let buggy = run_battery(BatteryOptions {
        inject_bug: true,
        ..opts
    });
    let caught = buggy.iter().filter(|r| !r.passed()).count();
    println!("\nwith the 0.1 shift injected, {caught} checks fail");
}
