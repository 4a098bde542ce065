//! Robust aggregation on a small cloud: mean, geometric median, median of
//! means and the brute-force reference, with and without an outlier.
//!
//! Run with `cargo run --example geometric_median`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use robust_fedbandit::mathcore::Vector;
use robust_fedbandit::robust_agg::{
    arithmetic_mean, brute_force_gm, geometric_median_report, gm_of_means, partition_agents,
    PointCloud, DEFAULT_EPSILON, DEFAULT_MAX_ITER,
};

fn show(label: &str, cloud: &PointCloud, z: &Vector) {
    println!(
        "{label:>14}: ({:>10.6}, {:>10.6})  objective {:.6}",
        z[0],
        z[1],
        cloud.objective(z)
    );
}

fn main() {
    // The Fermat point of a right triangle sits at ((3 − √3)/6, (3 − √3)/6).
    let triangle = PointCloud::from_rows(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]).unwrap();
    let report = geometric_median_report(&triangle, DEFAULT_EPSILON, DEFAULT_MAX_ITER).unwrap();
    println!(
        "triangle, Weiszfeld stopped after {} iterations ({:?})",
        report.iterations, report.stop
    );
    show("weiszfeld", &triangle, &report.point);
    show(
        "brute force",
        &triangle,
        &brute_force_gm(&triangle, 1e-4).unwrap(),
    );
    let fermat = (3.0 - 3f64.sqrt()) / 6.0;
    show(
        "closed form",
        &triangle,
        &Vector::from_vec(vec![fermat, fermat]),
    );

    // Nine honest points near (1, 1) plus three Byzantine points far away.
    let mut rows: Vec<Vec<f64>> = (0..9)
        .map(|i| {
            let a = i as f64 * 0.7;
            vec![1.0 + 0.1 * a.cos(), 1.0 + 0.1 * a.sin()]
        })
        .collect();
    rows.extend([vec![1e9, 0.0], vec![0.0, -1e9], vec![-1e9, 1e9]]);
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    let cloud = PointCloud::from_rows(&refs).unwrap();
    println!("\nnine honest points near (1, 1), three at norm 1e9");
    show("mean", &cloud, &arithmetic_mean(&cloud));
    let gm = geometric_median_report(&cloud, DEFAULT_EPSILON, DEFAULT_MAX_ITER).unwrap();
    show("geometric med.", &cloud, &gm.point);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let partition = partition_agents(cloud.len(), 3, &mut rng).unwrap();
    println!(
        "partition into {} groups: {:?}",
        partition.num_groups(),
        partition.groups()
    );
    let mom = gm_of_means(&cloud, &partition, DEFAULT_EPSILON, DEFAULT_MAX_ITER).unwrap();
    show("median of means", &cloud, &mom);
}
