//! The tree mechanism: dyadic decompositions, node reuse, noise calibration
//! and the empirical check of the `B · L` noise budget.
//!
//! Run with `cargo run --example privatized_sums`.

use robust_fedbandit::mathcore::{SymMatrix, Vector};
use robust_fedbandit::privacy::{
    calibrate, noise_norm_check, prefix_nodes, NoiseTree, PrivacyBudget,
};
use robust_fedbandit::schedules::iota;

fn main() {
    for k in [1, 3, 7, 12] {
        let nodes: Vec<String> = prefix_nodes(k)
            .iter()
            .map(|n| format!("[{},{}]", n.start, n.end))
            .collect();
        println!("prefix {k:>2} = {}", nodes.join(" + "));
    }

    let (mu, nu, l, episodes, d) = (1.0, 0.1, 4, 16, 4);
    let sigma = calibrate(mu, nu, l, episodes);
    println!(
        "\nper-node noise sigma for mu = {mu}, nu = {nu}, L = {l}, K = {episodes}: {sigma:.3}"
    );

    let mut tree = NoiseTree::new(episodes, d, sigma, 42);
    let gram = SymMatrix::identity(d).add_scaled_identity(5.0);
    let sum = Vector::from_element(d, 2.0);
    let (noisy, _) = tree.privatize(&gram, &sum, 8);
    let again = tree.privatize(&gram, &sum, 8).0;
    println!(
        "episode 8 release: noise spectral norm {:.2}, repeated query identical: {}",
        noisy.sub(&gram).spectral_norm(),
        noisy == again
    );
    println!("nodes drawn so far: {}", tree.drawn_nodes().count());

    let horizon = l * episodes;
    let budget = PrivacyBudget::new(mu, nu, l, iota(20, horizon, 0.1), d);
    println!(
        "\nnoise budget B = {:.1}, threshold B*L = {:.1}",
        budget.bound,
        budget.threshold()
    );
    let rate = noise_norm_check(&tree, &budget, 1000);
    println!("exceedance over 1000 trees x {episodes} prefixes: {rate}");
    let tight = budget.with_bound(sigma / l as f64);
    println!(
        "with B shrunk to sigma / L: {}",
        noise_norm_check(&tree, &tight, 1000)
    );
}
