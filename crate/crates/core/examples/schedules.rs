//! Regularization and confidence-radius schedules of the three variants.
//!
//! Run with `cargo run --example schedules`.

use robust_fedbandit::schedules::{
    c_alpha, episode_count, iota, noise_budget_b, recommended_l, ScheduleConfig, Variant,
};

fn main() {
    let (n, horizon, delta, d) = (20, 2000, 0.1, 2);
    let (alpha, sigma, r) = (0.2, 0.9, 0.1);
    let iota = iota(n, horizon, delta);
    println!(
        "iota = {iota:.4}, C_alpha({alpha}) = {:.4}",
        c_alpha(alpha).unwrap()
    );

    for variant in [Variant::T1Robust, Variant::T2RobustDp, Variant::T3MomDp] {
        let l = recommended_l(variant, alpha, sigma, r, horizon, iota).unwrap();
        let k = episode_count(horizon, l);
        let b = match variant {
            Variant::T1Robust => 0.0,
            _ => noise_budget_b(10.0, 0.1, iota, d),
        };
        let cfg = ScheduleConfig {
            variant,
            alpha,
            sigma,
            r,
            d,
            n,
            t: k * l,
            delta,
            b,
            epsilon: 1e-6,
            l,
            k,
        };
        cfg.validate().unwrap();
        println!("\n{variant:?}: L = {l}, K = {k}, B = {b:.1}");
        println!(
            "{:>4} {:>14} {:>14} {:>14}",
            "k", "lambda_k", "beta_k", "E_k bound"
        );
        for k in [1, 2, k / 2, k].into_iter().filter(|&x| x >= 1) {
            let lambda = cfg.lambda_k(k);
            println!(
                "{k:>4} {lambda:>14.3} {:>14.3} {:>14.3}",
                cfg.beta_k(k, lambda),
                cfg.gram_error_bound(k)
            );
        }
    }
}
