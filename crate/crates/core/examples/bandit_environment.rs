//! Decision-set families, rewards and the empirical heterogeneity σ.
//!
//! Run with `cargo run --example bandit_environment`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use robust_fedbandit::bandit_env::{
    empirical_sigma, optimal_value, Environment, EnvironmentSpec, NoiseFamily, NoiseSpec, SetFamily,
};

fn spec(family: SetFamily) -> EnvironmentSpec {
    EnvironmentSpec {
        d: 2,
        agents: 3,
        horizon: 100,
        theta_star: vec![1.0, 0.0],
        arms_per_set: 3,
        noise: NoiseSpec {
            r: 0.1,
            family: NoiseFamily::TruncatedGaussian,
        },
        set_family: family,
        reward_clip: false,
        drift_schedule: vec![50],
        base_arms: None,
    }
}

fn main() {
    for family in [SetFamily::Shared, SetFamily::IidResample] {
        let s = spec(family);
        let mut env = Environment::from_seed(s.clone(), 1).unwrap();
        let draw = env.sample_round(1);
        println!("{family:?}, step 1:");
        for (i, set) in draw.sets.iter().enumerate() {
            let arms: Vec<String> = set
                .arms
                .iter()
                .map(|x| format!("({:+.2}, {:+.2})", x[0], x[1]))
                .collect();
            println!(
                "  agent {i}: {}  best value {:.3}  noise {:+.3}",
                arms.join(" "),
                optimal_value(set, env.theta()),
                draw.noise[i]
            );
        }
        let sigma = empirical_sigma(&s, 4000, ChaCha8Rng::seed_from_u64(2)).unwrap();
        println!("  empirical sigma {sigma:.4}");
    }

    let mut clipped = spec(SetFamily::IidResample);
    clipped.theta_star = vec![1.0, 1.0];
    clipped.reward_clip = true;
    println!(
        "\nwith clipping, theta* = (1, 1) is scaled to norm {:.3} so rewards stay in [-1, 1]",
        clipped.effective_theta().norm()
    );
}
