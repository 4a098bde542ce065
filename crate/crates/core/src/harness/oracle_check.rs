//! Seeded invariant batteries for the aggregation oracles and the linear algebra kernel.

use std::io::Write;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::commands::ExitStatus;
use crate::mathcore::{self, flatten, min_eigenvalue, spd_solve, symmetrize, SymMatrix, Vector};
use crate::robust_agg::{
    self, arithmetic_mean, brute_force_gm, gm_of_means, GroupPartition, PointCloud,
    DEFAULT_MAX_ITER,
};
use crate::schedules::c_alpha;

/// Step of the brute-force grid used by the equivalence check.
pub const BRUTE_RESOLUTION: f64 = 1e-4;

/// Accuracy handed to the Weiszfeld solver.
pub const CHECK_EPSILON: f64 = 1e-6;

/// Shift applied to the solver output in self-test mode.
pub const INJECTED_BUG: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryOptions {
    /// Instances per check; `None` keeps each check's default.
    pub trials: Option<usize>,
    /// Perturb the geometric median by [`INJECTED_BUG`] to prove the checks bite.
    pub inject_bug: bool,
    pub seed: u64,
}

impl Default for BatteryOptions {
    fn default() -> Self {
        Self {
            trials: None,
            inject_bug: false,
            seed: 20_240_601,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub instances: usize,
    pub failures: usize,
    /// Worst observed margin or a short note.
    pub detail: String,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

struct Battery {
    opts: BatteryOptions,
}

impl Battery {
    fn rng(&self, salt: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed);
        rng.set_stream(salt);
        rng
    }

    fn count(&self, default: usize) -> usize {
        self.opts.trials.unwrap_or(default)
    }

    fn gm(&self, cloud: &PointCloud, epsilon: f64) -> Vector {
        let mut z =
            robust_agg::geometric_median(cloud, epsilon, DEFAULT_MAX_ITER).expect("finite cloud");
        if self.opts.inject_bug {
            z[0] += INJECTED_BUG;
        }
        z
    }

    fn outcome(name: &'static str, instances: usize, failures: usize, worst: f64) -> CheckOutcome {
        CheckOutcome {
            name,
            instances,
            failures,
            detail: format!("worst margin {worst:.3e}"),
        }
    }

    fn brute_force(&self) -> CheckOutcome {
        let mut rng = self.rng(1);
        let n_inst = self.count(50);
        let slack = CHECK_EPSILON + 2.0 * BRUTE_RESOLUTION * 2f64.sqrt();
        let (mut fails, mut worst) = (0, f64::NEG_INFINITY);
        for _ in 0..n_inst {
            let n = rng_range(&mut rng, 1, 9);
            let cloud = uniform_cloud(&mut rng, 2, n, 1.0);
            let bf = brute_force_gm(&cloud, BRUTE_RESOLUTION).expect("2-D");
            let gap =
                cloud.objective(&self.gm(&cloud, CHECK_EPSILON)) - cloud.objective(&bf) - slack;
            worst = worst.max(gap);
            fails += usize::from(gap > 0.0);
        }
        Self::outcome("gm matches brute force", n_inst, fails, worst)
    }

    fn concentration(&self) -> CheckOutcome {
        let mut rng = self.rng(2);
        let n_inst = self.count(1000);
        let (mut fails, mut worst) = (0, f64::NEG_INFINITY);
        for _ in 0..n_inst {
            let inst = corrupted_instance(&mut rng);
            let z = self.gm(&inst.cloud, CHECK_EPSILON);
            let gap = (z - &inst.center).norm() - inst.bound(CHECK_EPSILON);
            worst = worst.max(gap);
            fails += usize::from(gap > 0.0);
        }
        Self::outcome("gm concentration bound", n_inst, fails, worst)
    }

    fn translation(&self) -> CheckOutcome {
        let mut rng = self.rng(3);
        let n_inst = self.count(100);
        let eps = 1e-9;
        let (mut fails, mut worst) = (0, f64::NEG_INFINITY);
        for _ in 0..n_inst {
            // d ≥ 2 and n ≥ 3 keep the points off a common line, so the minimizer is unique
            let d = rng_range(&mut rng, 2, 4);
            let n = rng_range(&mut rng, 3, 12);
            let cloud = uniform_cloud(&mut rng, d, n, 1.0);
            let shift = gaussian_vector(&mut rng, d) * 5.0;
            let moved =
                PointCloud::new(d, cloud.points().iter().map(|p| p + &shift).collect()).unwrap();
            let err = (self.gm(&moved, eps) - self.gm(&cloud, eps) - &shift).norm() - 1e-8;
            worst = worst.max(err);
            fails += usize::from(err > 0.0);
        }
        Self::outcome("gm translation equivariance", n_inst, fails, worst)
    }

    fn breakdown(&self) -> CheckOutcome {
        let mut rng = self.rng(4);
        let n_inst = self.count(100);
        let (mut fails, mut worst) = (0, f64::NEG_INFINITY);
        for _ in 0..n_inst {
            let d = rng_range(&mut rng, 1, 4);
            let n = rng_range(&mut rng, 3, 12);
            let cloud = uniform_cloud(&mut rng, d, n, 1.0);
            let center = arithmetic_mean(&cloud);
            let mut points = cloud.points().to_vec();
            let dir = gaussian_vector(&mut rng, d);
            points.push(dir.normalize() * 1e9);
            let spoiled = PointCloud::new(d, points).unwrap();
            let honest_dev = cloud
                .points()
                .iter()
                .map(|p| (p - &center).norm())
                .sum::<f64>()
                / n as f64;
            let bound = c_alpha(1.0 / (n + 1) as f64).unwrap() * (honest_dev + CHECK_EPSILON);
            let gap = (self.gm(&spoiled, CHECK_EPSILON) - &center).norm() - bound;
            let mean_shift = (arithmetic_mean(&spoiled) - &center).norm();
            worst = worst.max(gap);
            fails += usize::from(gap > 0.0 || mean_shift < 1e8 / n as f64);
        }
        Self::outcome("gm breakdown sanity", n_inst, fails, worst)
    }

    fn singleton_groups(&self) -> CheckOutcome {
        let mut rng = self.rng(5);
        let n_inst = self.count(100);
        let (mut fails, mut worst) = (0, f64::NEG_INFINITY);
        for _ in 0..n_inst {
            let d = rng_range(&mut rng, 1, 4);
            let n = rng_range(&mut rng, 1, 15);
            let cloud = uniform_cloud(&mut rng, d, n, 3.0);
            let mut mom = gm_of_means(
                &cloud,
                &GroupPartition::singletons(n),
                CHECK_EPSILON,
                DEFAULT_MAX_ITER,
            )
            .unwrap();
            if self.opts.inject_bug {
                mom[0] += INJECTED_BUG;
            }
            let gm = robust_agg::geometric_median(&cloud, CHECK_EPSILON, DEFAULT_MAX_ITER).unwrap();
            let gap = (cloud.objective(&mom) - cloud.objective(&gm)).abs() - 2.0 * CHECK_EPSILON;
            worst = worst.max(gap);
            fails += usize::from(gap > 0.0);
        }
        Self::outcome(
            "singleton-group median of means equals gm",
            n_inst,
            fails,
            worst,
        )
    }

    fn symmetrization(&self) -> CheckOutcome {
        let mut rng = self.rng(6);
        let n_inst = self.count(200);
        let (mut fails, mut worst) = (0, f64::NEG_INFINITY);
        for _ in 0..n_inst {
            let d = rng_range(&mut rng, 2, 4);
            let n = rng_range(&mut rng, 2, 9);
            let mats: Vec<DMatrix<f64>> = (0..n)
                .map(|_| random_symmetric(&mut rng, d).into_matrix())
                .collect();
            let cloud = PointCloud::from_matrices(d, &mats).unwrap();
            let mut raw = mathcore::unflatten(&self.gm(&cloud, CHECK_EPSILON), d);
            if self.opts.inject_bug {
                raw[(0, 1)] += INJECTED_BUG;
            }
            let sym = symmetrize(&raw);
            let gap = cloud.objective(&sym.flatten()) - cloud.objective(&flatten(&raw)) - 1e-12;
            worst = worst.max(gap);
            fails += usize::from(gap > 0.0);
        }
        Self::outcome(
            "symmetrization keeps the gm objective",
            n_inst,
            fails,
            worst,
        )
    }

    fn inversion_order(&self) -> CheckOutcome {
        let mut rng = self.rng(7);
        let n_inst = self.count(200);
        let (mut fails, mut worst) = (0, f64::NEG_INFINITY);
        for _ in 0..n_inst {
            let d = rng_range(&mut rng, 1, 6);
            let b = random_spd(&mut rng, d);
            let m = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(&mut rng));
            let a = symmetrize(&(b.as_matrix() + m.transpose() * &m));
            let b_inv = mathcore::SpdFactor::new(&b).unwrap().inverse();
            let a_inv = mathcore::SpdFactor::new(&a).unwrap().inverse();
            let gap = -1e-8 - min_eigenvalue(&b_inv.sub(&a_inv));
            worst = worst.max(gap);
            fails += usize::from(gap > 0.0);
        }
        Self::outcome("psd inversion reverses order", n_inst, fails, worst)
    }

    fn solve_roundtrip(&self) -> CheckOutcome {
        let mut rng = self.rng(8);
        let n_inst = self.count(200);
        let (mut fails, mut worst) = (0, f64::NEG_INFINITY);
        for _ in 0..n_inst {
            let d = rng_range(&mut rng, 1, 8);
            let a = random_spd(&mut rng, d);
            let x = gaussian_vector(&mut rng, d);
            let gap = (spd_solve(&a, &(a.as_matrix() * &x)).unwrap() - &x).norm() - 1e-7;
            worst = worst.max(gap);
            fails += usize::from(gap > 0.0);
        }
        Self::outcome("spd solve inverts multiplication", n_inst, fails, worst)
    }

    fn inv_norm_identity(&self) -> CheckOutcome {
        let mut rng = self.rng(9);
        let n_inst = self.count(200);
        let (mut fails, mut worst) = (0, f64::NEG_INFINITY);
        for _ in 0..n_inst {
            let d = rng_range(&mut rng, 1, 8);
            let a = random_spd(&mut rng, d);
            let x = gaussian_vector(&mut rng, d);
            let lhs = mathcore::inv_norm(&a, &x).unwrap().powi(2);
            let rhs = x.dot(&spd_solve(&a, &x).unwrap());
            let gap = (lhs - rhs).abs() - 1e-10 * rhs.abs().max(f64::MIN_POSITIVE);
            worst = worst.max(gap);
            fails += usize::from(gap > 0.0);
        }
        Self::outcome("inverse norm squared equals x'A^-1x", n_inst, fails, worst)
    }

    fn symmetrize_projection(&self) -> CheckOutcome {
        let mut rng = self.rng(10);
        let n_inst = self.count(200);
        let mut fails = 0;
        for _ in 0..n_inst {
            let d = rng_range(&mut rng, 1, 6);
            let a = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(&mut rng));
            let once = symmetrize(&a);
            let twice = symmetrize(once.as_matrix());
            fails += usize::from(once != twice);
        }
        CheckOutcome {
            name: "symmetrize is idempotent",
            instances: n_inst,
            failures: fails,
            detail: "exact comparison".into(),
        }
    }
}

/// Runs every check in a fixed order.
pub fn run_battery(opts: BatteryOptions) -> Vec<CheckOutcome> {
    let b = Battery { opts };
    vec![
        b.brute_force(),
        b.concentration(),
        b.translation(),
        b.breakdown(),
        b.singleton_groups(),
        b.symmetrization(),
        b.inversion_order(),
        b.solve_roundtrip(),
        b.inv_norm_identity(),
        b.symmetrize_projection(),
    ]
}

/// `oracle-check`: prints one line per check; exit 3 if any fails.
pub fn oracle_check_command(opts: BatteryOptions, log: &mut dyn Write) -> ExitStatus {
    let results = run_battery(opts);
    for r in &results {
        let _ = writeln!(
            log,
            "{} {} ({}/{} instances, {})",
            if r.passed() { "PASS" } else { "FAIL" },
            r.name,
            r.instances - r.failures,
            r.instances,
            r.detail
        );
    }
    if results.iter().all(CheckOutcome::passed) {
        ExitStatus::Success
    } else {
        ExitStatus::InvariantFailure
    }
}

fn rng_range(rng: &mut impl Rng, lo: usize, hi: usize) -> usize {
    rng.random_range(lo..=hi)
}

fn gaussian_vector(rng: &mut impl Rng, d: usize) -> Vector {
    Vector::from_fn(d, |_, _| StandardNormal.sample(rng))
}

fn uniform_cloud(rng: &mut impl Rng, d: usize, n: usize, half_width: f64) -> PointCloud {
    let points = (0..n)
        .map(|_| Vector::from_fn(d, |_, _| rng.random_range(-half_width..=half_width)))
        .collect();
    PointCloud::new(d, points).expect("nonempty")
}

fn random_symmetric(rng: &mut impl Rng, d: usize) -> SymMatrix {
    let m = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(rng));
    symmetrize(&m)
}

fn random_spd(rng: &mut impl Rng, d: usize) -> SymMatrix {
    let m = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(rng));
    symmetrize(&(m.transpose() * &m + DMatrix::identity(d, d) * 0.1))
}

/// A cloud with a known honest subset and the concentration bound it must obey.
pub struct CorruptedInstance {
    pub cloud: PointCloud,
    /// Mean of the honest points.
    pub center: Vector,
    pub honest_deviation: f64,
    pub alpha: f64,
}

impl CorruptedInstance {
    /// `C_α (mean honest deviation + ε)`.
    pub fn bound(&self, epsilon: f64) -> f64 {
        c_alpha(self.alpha).expect("alpha < 1/2") * (self.honest_deviation + epsilon)
    }
}

/// Random instance with up to 21 points and a minority of adversarial points.
///
/// Honest points are Gaussian around a random center (sometimes all equal);
/// corrupted points are far outliers at norm 1e9, a tight decoy cluster, or
/// scattered junk.
pub fn corrupted_instance(rng: &mut impl Rng) -> CorruptedInstance {
    let d = rng.random_range(1..=5);
    let n = rng.random_range(1..=21usize);
    let n1 = rng.random_range(0..=(n - 1) / 2);
    let n0 = n - n1;
    let center = gaussian_vector(rng, d) * 3.0;
    let spread = if rng.random_bool(0.1) {
        0.0
    } else {
        rng.random_range(0.01..2.0)
    };
    let honest: Vec<Vector> = (0..n0)
        .map(|_| &center + gaussian_vector(rng, d) * spread)
        .collect();
    let style = rng.random_range(0..3);
    let decoy = gaussian_vector(rng, d).normalize() * rng.random_range(1.0..50.0) + &center;
    let corrupted: Vec<Vector> = (0..n1)
        .map(|_| match style {
            0 => gaussian_vector(rng, d).normalize() * 1e9,
            1 => &decoy + gaussian_vector(rng, d) * 1e-3,
            _ => gaussian_vector(rng, d) * 1e4,
        })
        .collect();
    let mut mean = Vector::zeros(d);
    for p in &honest {
        mean += p;
    }
    mean /= n0 as f64;
    let honest_deviation = honest.iter().map(|p| (p - &mean).norm()).sum::<f64>() / n0 as f64;
    let mut points = honest;
    points.extend(corrupted);
    CorruptedInstance {
        cloud: PointCloud::new(d, points).expect("nonempty"),
        center: mean,
        honest_deviation,
        alpha: n1 as f64 / n as f64,
    }
}
