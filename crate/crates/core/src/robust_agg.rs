//! Aggregation oracles: arithmetic mean, ε-approximate geometric median,
//! geometric median of means, and a brute-force grid oracle for tests.
//!
//! The geometric median of `z_1..z_n` minimizes `g(z) = (1/n) Σ ‖z − z_i‖₂`.
//! It is computed with the Weiszfeld iteration in its Vardi-Zhang form:
//!
//! ```text
//! T(z) = Σ_{z_i ≠ z} z_i / ‖z − z_i‖₂  /  Σ_{z_i ≠ z} 1 / ‖z − z_i‖₂
//! r(z) = ‖Σ_{z_i ≠ z} (z_i − z) / ‖z − z_i‖₂‖₂,   η(z) = #{i : z_i = z}
//! z ← (1 − η/r) T(z) + (η/r) z
//! ```
//!
//! where points within `ρ = 1e-12 (1 + max_i ‖z_i‖₂)` of `z` count as equal.
//! If `r ≤ η` the iterate is a data point that minimizes `g` exactly. The
//! loop starts at the coordinatewise median and stops once the iterate moves
//! less than `ε / (10 n)` or the objective drops by less than `ε / 10`. The
//! closest data point is finally tested with the exact subgradient
//! optimality condition and returned when it qualifies.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::mathcore::{flatten, symmetrize, unflatten, SymMatrix, Vector};

/// Default Weiszfeld iteration cap.
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Default approximation accuracy.
pub const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AggError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("geometric median iteration diverged after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("invalid accuracy parameters (epsilon {epsilon}, max_iter {max_iter})")]
    InvalidParameters { epsilon: f64, max_iter: usize },
    #[error("corrupted count {corrupted} violates 3*N1 <= N with N = {agents}")]
    InvalidCorruptionBound { agents: usize, corrupted: usize },
    #[error("brute-force oracle supports at most 4 dimensions, got {0}")]
    DimensionTooLarge(usize),
    #[error("partition covers {covered} indices but the cloud has {points} points")]
    PartitionMismatch { covered: usize, points: usize },
}

/// A nonempty set of equal-dimension finite points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    points: Vec<Vector>,
}

impl PointCloud {
    /// Builds a cloud of `dim`-dimensional points. Points with the wrong
    /// length or non-finite entries are replaced by the zero point.
    pub fn new(dim: usize, points: Vec<Vector>) -> Result<Self, AggError> {
        if points.is_empty() {
            return Err(AggError::EmptyCloud);
        }
        let points = points
            .into_iter()
            .map(|p| {
                if p.len() == dim && p.iter().all(|x| x.is_finite()) {
                    p
                } else {
                    Vector::zeros(dim)
                }
            })
            .collect();
        Ok(Self { dim, points })
    }

    /// Convenience constructor from row slices; the dimension is taken from the first row.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self, AggError> {
        let dim = rows.first().ok_or(AggError::EmptyCloud)?.len();
        Self::new(
            dim,
            rows.iter().map(|r| Vector::from_column_slice(r)).collect(),
        )
    }

    /// Flattens `d x d` matrices into `d²` points; malformed matrices become zero.
    pub fn from_matrices(d: usize, mats: &[DMatrix<f64>]) -> Result<Self, AggError> {
        let pts = mats
            .iter()
            .map(|m| {
                if m.shape() == (d, d) {
                    flatten(m)
                } else {
                    Vector::zeros(d * d)
                }
            })
            .collect();
        Self::new(d * d, pts)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    /// The geometric-median objective `g(z) = (1/n) Σ ‖z − z_i‖₂`.
    pub fn objective(&self, z: &Vector) -> f64 {
        let total: f64 = self.points.iter().map(|p| (z - p).norm()).sum();
        total / self.points.len() as f64
    }

    fn coordinatewise_median(&self) -> Vector {
        let n = self.points.len();
        Vector::from_iterator(
            self.dim,
            (0..self.dim).map(|c| {
                let mut col: Vec<f64> = self.points.iter().map(|p| p[c]).collect();
                col.sort_by(f64::total_cmp);
                if n % 2 == 1 {
                    col[n / 2]
                } else {
                    (col[n / 2 - 1] + col[n / 2]) / 2.0
                }
            }),
        )
    }
}

/// Coordinatewise average, summed in index order.
pub fn arithmetic_mean(cloud: &PointCloud) -> Vector {
    let mut sum = Vector::zeros(cloud.dim);
    for p in &cloud.points {
        sum += p;
    }
    sum / cloud.points.len() as f64
}

/// Why the Weiszfeld loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Iterate movement fell below `ε / (10 n)`.
    Movement,
    /// Objective decrease fell below `ε / 10`.
    Objective,
    /// A data point satisfies the subgradient optimality condition.
    DataPoint,
    /// `max_iter` reached.
    IterationCap,
    /// A single point, or all points identical.
    Trivial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmReport {
    pub point: Vector,
    pub objective: f64,
    pub iterations: usize,
    pub stop: StopReason,
}

/// ε-approximate geometric median.
pub fn geometric_median(
    cloud: &PointCloud,
    epsilon: f64,
    max_iter: usize,
) -> Result<Vector, AggError> {
    geometric_median_report(cloud, epsilon, max_iter).map(|r| r.point)
}

/// [`geometric_median`] with iteration statistics.
pub fn geometric_median_report(
    cloud: &PointCloud,
    epsilon: f64,
    max_iter: usize,
) -> Result<GmReport, AggError> {
    if !(epsilon > 0.0) || max_iter == 0 {
        return Err(AggError::InvalidParameters { epsilon, max_iter });
    }
    let pts = &cloud.points;
    let n = pts.len();
    if pts.iter().all(|p| p == &pts[0]) {
        return Ok(GmReport {
            point: pts[0].clone(),
            objective: 0.0,
            iterations: 0,
            stop: StopReason::Trivial,
        });
    }

    let max_norm = pts.iter().map(|p| p.norm()).fold(0.0_f64, f64::max);
    let rho = 1e-12 * (1.0 + max_norm);
    let move_tol = epsilon / (10.0 * n as f64);
    let obj_tol = epsilon / 10.0;

    let mut z = cloud.coordinatewise_median();
    let mut obj = cloud.objective(&z);
    let mut best = (z.clone(), obj);
    let mut stop = StopReason::IterationCap;
    let mut iterations = 0;

    if let Some(p) = optimal_data_point(cloud, &z) {
        return Ok(finish(cloud, p, 0, StopReason::DataPoint));
    }

    while iterations < max_iter {
        iterations += 1;
        // Points within ρ of the iterate count as coincident. Their pull is
        // replaced by the Vardi-Zhang correction so a non-optimal data point
        // cannot trap the iteration.
        let mut num = Vector::zeros(cloud.dim);
        let mut den = 0.0;
        let mut pull = Vector::zeros(cloud.dim);
        let mut coincident = 0.0;
        for p in pts {
            let dist = (&z - p).norm();
            if dist <= rho {
                coincident += 1.0;
                continue;
            }
            num.axpy(1.0 / dist, p, 1.0);
            pull.axpy(1.0 / dist, &(p - &z), 1.0);
            den += 1.0 / dist;
        }
        let next = if coincident == 0.0 {
            num / den
        } else {
            let r = pull.norm();
            if r <= coincident {
                stop = StopReason::DataPoint;
                best = (z.clone(), obj);
                break;
            }
            let keep = coincident / r;
            num / den * (1.0 - keep) + &z * keep
        };
        if next.iter().any(|x| !x.is_finite()) {
            return Err(AggError::NoConvergence { iterations });
        }
        let movement = (&next - &z).norm();
        let next_obj = cloud.objective(&next);
        let decrease = obj - next_obj;
        z = next;
        obj = next_obj;
        if obj < best.1 {
            best = (z.clone(), obj);
        }
        if movement < move_tol {
            stop = StopReason::Movement;
            break;
        }
        if decrease < obj_tol {
            stop = StopReason::Objective;
            break;
        }
    }

    if let Some(p) = optimal_data_point(cloud, &best.0) {
        return Ok(finish(cloud, p, iterations, StopReason::DataPoint));
    }
    Ok(GmReport {
        point: best.0,
        objective: best.1,
        iterations,
        stop,
    })
}

fn finish(cloud: &PointCloud, point: Vector, iterations: usize, stop: StopReason) -> GmReport {
    GmReport {
        objective: cloud.objective(&point),
        point,
        iterations,
        stop,
    }
}

/// Returns the data point nearest to `z` if it is an exact minimizer of `g`.
///
/// A data point `z_j` with multiplicity `m_j` minimizes `g` iff
/// `‖Σ_{z_i ≠ z_j} (z_j − z_i) / ‖z_j − z_i‖‖ ≤ m_j`.
fn optimal_data_point(cloud: &PointCloud, z: &Vector) -> Option<Vector> {
    let (nearest, _) = cloud
        .points
        .iter()
        .map(|p| (p, (z - p).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    let mut pull = Vector::zeros(cloud.dim);
    let mut multiplicity = 0.0;
    for p in &cloud.points {
        let diff = nearest - p;
        let norm = diff.norm();
        if norm == 0.0 {
            multiplicity += 1.0;
        } else {
            pull.axpy(1.0 / norm, &diff, 1.0);
        }
    }
    (pull.norm() <= multiplicity).then(|| nearest.clone())
}

/// Matrix geometric median under the Frobenius norm, symmetrized.
///
/// Inputs with the wrong shape or non-finite entries count as the zero matrix.
pub fn geometric_median_matrices(
    mats: &[DMatrix<f64>],
    d: usize,
    epsilon: f64,
    max_iter: usize,
) -> Result<SymMatrix, AggError> {
    let cloud = PointCloud::from_matrices(d, mats)?;
    let raw = geometric_median(&cloud, epsilon, max_iter)?;
    Ok(symmetrize(&unflatten(&raw, d)))
}

/// Unsymmetrized matrix geometric median, exposed for the symmetrization property tests.
pub fn geometric_median_matrices_raw(
    mats: &[DMatrix<f64>],
    d: usize,
    epsilon: f64,
    max_iter: usize,
) -> Result<DMatrix<f64>, AggError> {
    let cloud = PointCloud::from_matrices(d, mats)?;
    Ok(unflatten(&geometric_median(&cloud, epsilon, max_iter)?, d))
}

/// Disjoint groups covering `0..N`, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPartition {
    groups: Vec<Vec<usize>>,
}

impl GroupPartition {
    /// Wraps explicit groups; they must be disjoint and cover `0..n`.
    pub fn from_groups(n: usize, mut groups: Vec<Vec<usize>>) -> Result<Self, AggError> {
        let mut seen = vec![false; n];
        let mut covered = 0;
        for g in &mut groups {
            g.sort_unstable();
            for &i in g.iter() {
                if i >= n || seen[i] {
                    return Err(AggError::PartitionMismatch { covered, points: n });
                }
                seen[i] = true;
                covered += 1;
            }
        }
        if covered != n || groups.iter().any(|g| g.is_empty()) {
            return Err(AggError::PartitionMismatch { covered, points: n });
        }
        Ok(Self { groups })
    }

    /// One group per index.
    pub fn singletons(n: usize) -> Self {
        Self {
            groups: (0..n).map(|i| vec![i]).collect(),
        }
    }

    /// A single group holding every index.
    pub fn whole(n: usize) -> Self {
        Self {
            groups: vec![(0..n).collect()],
        }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn num_indices(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }
}

/// Randomly splits `N` agents into `max(3 N₁, 1)` groups whose sizes differ by at most one.
pub fn partition_agents<R: Rng + ?Sized>(
    agents: usize,
    corrupted: usize,
    rng: &mut R,
) -> Result<GroupPartition, AggError> {
    if 3 * corrupted > agents || agents == 0 {
        return Err(AggError::InvalidCorruptionBound { agents, corrupted });
    }
    let p = (3 * corrupted).max(1);
    let mut perm: Vec<usize> = (0..agents).collect();
    perm.shuffle(rng);
    let mut groups = vec![Vec::new(); p];
    for (slot, agent) in perm.into_iter().enumerate() {
        groups[slot % p].push(agent);
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    Ok(GroupPartition { groups })
}

/// Per-group arithmetic means, in group order.
pub fn group_means(cloud: &PointCloud, partition: &GroupPartition) -> Result<PointCloud, AggError> {
    if partition.num_indices() != cloud.len() {
        return Err(AggError::PartitionMismatch {
            covered: partition.num_indices(),
            points: cloud.len(),
        });
    }
    let means = partition
        .groups
        .iter()
        .map(|g| {
            let members = g.iter().map(|&i| cloud.points[i].clone()).collect();
            arithmetic_mean(&PointCloud {
                dim: cloud.dim,
                points: members,
            })
        })
        .collect();
    PointCloud::new(cloud.dim, means)
}

/// Geometric median of the group means.
pub fn gm_of_means(
    cloud: &PointCloud,
    partition: &GroupPartition,
    epsilon: f64,
    max_iter: usize,
) -> Result<Vector, AggError> {
    let means = group_means(cloud, partition)?;
    geometric_median(&means, epsilon, max_iter)
}

/// Grid-search geometric median for clouds of dimension at most 4.
///
/// Searches the bounding box with step `100 · resolution`, then refines twice
/// around the incumbent (window of ±2 previous steps) at 10× finer steps, so
/// the final step equals `resolution`. Ties go to the lexicographically
/// smallest grid point.
pub fn brute_force_gm(cloud: &PointCloud, resolution: f64) -> Result<Vector, AggError> {
    let dim = cloud.dim;
    if dim > 4 {
        return Err(AggError::DimensionTooLarge(dim));
    }
    let lo: Vec<f64> = (0..dim)
        .map(|c| {
            cloud
                .points
                .iter()
                .map(|p| p[c])
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let hi: Vec<f64> = (0..dim)
        .map(|c| {
            cloud
                .points
                .iter()
                .map(|p| p[c])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();

    let mut step = resolution * 100.0;
    let mut best = grid_search(cloud, &lo, &hi, step, None);
    for _ in 0..2 {
        let wlo: Vec<f64> = (0..dim)
            .map(|c| (best.0[c] - 2.0 * step).max(lo[c]))
            .collect();
        let whi: Vec<f64> = (0..dim)
            .map(|c| (best.0[c] + 2.0 * step).min(hi[c]))
            .collect();
        step /= 10.0;
        best = grid_search(cloud, &wlo, &whi, step, Some(best));
    }
    Ok(best.0)
}

fn grid_search(
    cloud: &PointCloud,
    lo: &[f64],
    hi: &[f64],
    step: f64,
    incumbent: Option<(Vector, f64)>,
) -> (Vector, f64) {
    let dim = lo.len();
    let axes: Vec<Vec<f64>> = (0..dim)
        .map(|c| {
            let count = ((hi[c] - lo[c]) / step).ceil().max(0.0) as usize;
            (0..=count)
                .map(|i| (lo[c] + i as f64 * step).min(hi[c]))
                .collect()
        })
        .collect();
    let mut best = incumbent;
    let mut idx = vec![0usize; dim];
    loop {
        let z = Vector::from_iterator(dim, (0..dim).map(|c| axes[c][idx[c]]));
        let g = cloud.objective(&z);
        let better = match &best {
            None => true,
            Some((bz, bg)) => g < *bg || (g == *bg && lex_less(&z, bz)),
        };
        if better {
            best = Some((z, g));
        }
        // odometer increment, last coordinate fastest
        let mut c = dim;
        loop {
            if c == 0 {
                return best.expect("grid has at least one point");
            }
            c -= 1;
            idx[c] += 1;
            if idx[c] < axes[c].len() {
                break;
            }
            idx[c] = 0;
        }
    }
}

fn lex_less(a: &Vector, b: &Vector) -> bool {
    for (x, y) in a.iter().zip(b.iter()) {
        if x != y {
            return x < y;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn mean_examples() {
        let c = PointCloud::from_rows(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        assert_eq!(arithmetic_mean(&c), v(&[0.5, 0.5]));
        let c = PointCloud::from_rows(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 0.0]]).unwrap();
        assert_eq!(arithmetic_mean(&c), v(&[3.0, 2.0]));
        let c = PointCloud::new(2, vec![v(&[0.7, -0.3]); 5]).unwrap();
        assert!((arithmetic_mean(&c) - v(&[0.7, -0.3])).norm() < 1e-15);
    }

    #[test]
    fn malformed_points_become_zero() {
        let c = PointCloud::new(2, vec![v(&[1.0, 1.0]), v(&[f64::NAN, 0.0]), v(&[1.0])]).unwrap();
        assert_eq!(c.points()[1], Vector::zeros(2));
        assert_eq!(c.points()[2], Vector::zeros(2));
        assert_eq!(PointCloud::new(2, vec![]), Err(AggError::EmptyCloud));
    }

    #[test]
    fn gm_identical_points() {
        let c = PointCloud::new(3, vec![v(&[1.5, -2.0, 0.25]); 7]).unwrap();
        let z = geometric_median(&c, 1e-6, 100).unwrap();
        assert_eq!(z, v(&[1.5, -2.0, 0.25]));
    }

    #[test]
    fn gm_one_dimensional_median() {
        let c = PointCloud::from_rows(&[&[0.0], &[1.0], &[10.0]]).unwrap();
        let z = geometric_median(&c, 1e-9, 1000).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn gm_rejects_bad_parameters() {
        let c = PointCloud::from_rows(&[&[0.0], &[1.0]]).unwrap();
        assert!(geometric_median(&c, 0.0, 10).is_err());
        assert!(geometric_median(&c, 1e-6, 0).is_err());
    }

    #[test]
    fn gm_resists_a_huge_outlier() {
        let c =
            PointCloud::from_rows(&[&[0.0, 0.0], &[0.0, 0.0], &[0.0, 0.0], &[1e9, 1e9]]).unwrap();
        let z = geometric_median(&c, 1e-6, 10_000).unwrap();
        assert_eq!(z, v(&[0.0, 0.0]));
    }

    #[test]
    fn matrix_gm_of_equal_inputs() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let out = geometric_median_matrices(&vec![m.clone(); 4], 2, 1e-6, 1000).unwrap();
        assert_eq!(out.as_matrix(), &m);
    }

    #[test]
    fn asymmetric_input_coerced_like_zero() {
        // An asymmetric matrix is coerced upstream; a wrong-shaped one here.
        let good = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let bad = DMatrix::from_element(3, 3, 7.0);
        let zero = DMatrix::zeros(2, 2);
        let a =
            geometric_median_matrices(&[good.clone(), good.clone(), bad], 2, 1e-6, 1000).unwrap();
        let b = geometric_median_matrices(&[good.clone(), good, zero], 2, 1e-6, 1000).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn partition_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = partition_agents(12, 2, &mut rng).unwrap();
        assert_eq!(p.num_groups(), 6);
        assert!(p.groups().iter().all(|g| g.len() == 2));

        let p = partition_agents(10, 1, &mut rng).unwrap();
        let mut sizes: Vec<usize> = p.groups().iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![3, 3, 4]);

        let p = partition_agents(8, 0, &mut rng).unwrap();
        assert_eq!(p.groups(), &[(0..8).collect::<Vec<_>>()]);

        assert!(matches!(
            partition_agents(5, 2, &mut rng),
            Err(AggError::InvalidCorruptionBound { .. })
        ));
    }

    #[test]
    fn partition_covers_everything_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 1..30 {
            for n1 in 0..=(n / 3) {
                let p = partition_agents(n, n1, &mut rng).unwrap();
                let mut all: Vec<usize> = p.groups().concat();
                all.sort_unstable();
                assert_eq!(all, (0..n).collect::<Vec<_>>());
                let sizes: Vec<usize> = p.groups().iter().map(Vec::len).collect();
                let (mn, mx) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
                assert!(mx - mn <= 1);
                if n1 > 0 {
                    let alpha = n1 as f64 / n as f64;
                    let ideal = 1.0 / (3.0 * alpha);
                    assert!(*mn >= ideal.floor() as usize && *mx <= ideal.ceil() as usize);
                }
            }
        }
    }

    #[test]
    fn mom_single_group_is_mean() {
        let c = PointCloud::from_rows(&[&[0.1, 0.2], &[0.3, -0.5], &[2.0, 1.0]]).unwrap();
        let z = gm_of_means(&c, &GroupPartition::whole(3), 1e-6, 100).unwrap();
        assert_eq!(z, arithmetic_mean(&c));
    }

    #[test]
    fn mom_identical_group_means() {
        let c =
            PointCloud::from_rows(&[&[0.0, 1.0], &[2.0, 1.0], &[1.0, 0.0], &[1.0, 2.0]]).unwrap();
        let p = GroupPartition::from_groups(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let z = gm_of_means(&c, &p, 1e-6, 100).unwrap();
        assert_eq!(z, v(&[1.0, 1.0]));
    }

    #[test]
    fn partition_validation() {
        assert!(GroupPartition::from_groups(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(GroupPartition::from_groups(3, vec![vec![0, 1]]).is_err());
        let c = PointCloud::from_rows(&[&[0.0], &[1.0]]).unwrap();
        assert!(gm_of_means(&c, &GroupPartition::whole(3), 1e-6, 10).is_err());
    }

    #[test]
    fn brute_force_examples() {
        let c = PointCloud::from_rows(&[&[0.3, -0.2]]).unwrap();
        let z = brute_force_gm(&c, 1e-3).unwrap();
        assert!((z - v(&[0.3, -0.2])).norm() <= 1e-3);

        let c = PointCloud::from_rows(&[&[0.0], &[1.0], &[10.0]]).unwrap();
        let z = brute_force_gm(&c, 1e-3).unwrap();
        assert!((z[0] - 1.0).abs() <= 1e-3);

        let c =
            PointCloud::from_rows(&[&[0.0, 0.0], &[4.0, 0.0], &[0.0, 3.0], &[4.0, 3.0]]).unwrap();
        let z = brute_force_gm(&c, 1e-3).unwrap();
        assert!((z - v(&[2.0, 1.5])).norm() <= 1e-3);

        let c = PointCloud::new(5, vec![Vector::zeros(5)]).unwrap();
        assert_eq!(brute_force_gm(&c, 0.1), Err(AggError::DimensionTooLarge(5)));
    }

    #[test]
    fn start_on_non_optimal_data_point_still_converges() {
        // The coordinatewise median of this cloud is the second point, which is not the minimizer.
        let c = PointCloud::from_rows(&[
            &[-0.7770011000070278, 0.9267785741709429],
            &[0.7015387299663294, 0.36080961228209585],
            &[0.7287217118686447, -0.27808313563800047],
            &[0.9040128100953764, -0.3057216279295205],
            &[-0.686517288926948, 0.44997917655001407],
        ])
        .unwrap();
        let z = geometric_median(&c, 1e-6, DEFAULT_MAX_ITER).unwrap();
        let grid = brute_force_gm(&c, 1e-4).unwrap();
        assert!(c.objective(&z) <= c.objective(&grid) + 1e-6);
        assert!((&z - v(&[0.7015387299663294, 0.36080961228209585])).norm() > 0.1);
    }
}
