//! Stochastic linear-bandit environment.
//!
//! Each step every agent receives a finite decision set and a noise draw. The
//! sets of distinct agents come from the same distribution with independent
//! randomness, except in [`SetFamily::Shared`] mode where one set is handed to
//! everybody.
//!
//! Noise families, both R-sub-Gaussian:
//! * truncated Gaussian: `N(0, R²)` conditioned on `[−3R, 3R]`. Its density is
//!   `exp(−x²/2R²)` restricted to an interval, so it is strongly log-concave with
//!   the same curvature as `N(0, R²)` and inherits variance proxy `R²`.
//! * uniform on `[−R√3, R√3]`: variance `R²`, and the uniform law is strictly
//!   sub-Gaussian, so the variance proxy is also `R²`.

use nalgebra::DMatrix;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mathcore::Vector;

/// Arms may exceed the unit ball by this much after normalization.
pub const ARM_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("dimension, agent count, horizon and arms_per_set must all be positive")]
    EmptyShape,
    #[error("theta_star has {got} entries but d = {expected}")]
    ThetaDimension { expected: usize, got: usize },
    #[error("theta_star norm {norm} exceeds sqrt(d) = {bound}")]
    ThetaTooLarge { norm: f64, bound: f64 },
    #[error("base arm {index} is invalid: it must have d entries and norm at most 1")]
    InvalidBaseArm { index: usize },
    #[error("noise scale R must be finite and nonnegative, got {0}")]
    InvalidNoise(f64),
    #[error("reward clipping needs a noise range below 1, got {0}")]
    NoiseTooWideForClip(f64),
    #[error("iid-rotations needs base_arms")]
    RotationsNeedBaseArms,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseFamily {
    TruncatedGaussian,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Sub-Gaussian scale.
    pub r: f64,
    #[serde(default = "default_family")]
    pub family: NoiseFamily,
}

fn default_family() -> NoiseFamily {
    NoiseFamily::TruncatedGaussian
}

impl NoiseSpec {
    /// Largest absolute value the noise can take.
    pub fn range(&self) -> f64 {
        match self.family {
            NoiseFamily::TruncatedGaussian => 3.0 * self.r,
            NoiseFamily::Uniform => self.r * 3.0_f64.sqrt(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.r == 0.0 {
            return 0.0;
        }
        match self.family {
            NoiseFamily::TruncatedGaussian => loop {
                let z: f64 = StandardNormal.sample(rng);
                if z.abs() <= 3.0 {
                    return self.r * z;
                }
            },
            NoiseFamily::Uniform => {
                let a = self.range();
                rng.random_range(-a..=a)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetFamily {
    /// One set per step, shared by all agents.
    Shared,
    /// The base arms under an independent Haar-random rotation per agent.
    IidRotations,
    /// An independent random set per agent.
    IidResample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSpec {
    pub d: usize,
    pub agents: usize,
    pub horizon: usize,
    pub theta_star: Vec<f64>,
    pub arms_per_set: usize,
    pub noise: NoiseSpec,
    pub set_family: SetFamily,
    #[serde(default)]
    pub reward_clip: bool,
    /// Steps at which the arm generator is re-randomized.
    #[serde(default)]
    pub drift_schedule: Vec<usize>,
    /// Fixed arm pool. Without it arms are random unit vectors.
    #[serde(default)]
    pub base_arms: Option<Vec<Vec<f64>>>,
}

impl EnvironmentSpec {
    pub fn validate(&self) -> Result<(), EnvError> {
        if self.d == 0 || self.agents == 0 || self.horizon == 0 || self.arms_per_set == 0 {
            return Err(EnvError::EmptyShape);
        }
        if self.theta_star.len() != self.d {
            return Err(EnvError::ThetaDimension {
                expected: self.d,
                got: self.theta_star.len(),
            });
        }
        let norm = self.theta_vector().norm();
        let bound = (self.d as f64).sqrt();
        if !norm.is_finite() || norm > bound + ARM_NORM_TOL {
            return Err(EnvError::ThetaTooLarge { norm, bound });
        }
        if !(self.noise.r.is_finite() && self.noise.r >= 0.0) {
            return Err(EnvError::InvalidNoise(self.noise.r));
        }
        if self.reward_clip && self.noise.range() >= 1.0 {
            return Err(EnvError::NoiseTooWideForClip(self.noise.range()));
        }
        match &self.base_arms {
            Some(arms) => {
                for (index, arm) in arms.iter().enumerate() {
                    let ok = arm.len() == self.d
                        && arm.iter().all(|x| x.is_finite())
                        && Vector::from_column_slice(arm).norm() <= 1.0 + ARM_NORM_TOL;
                    if !ok {
                        return Err(EnvError::InvalidBaseArm { index });
                    }
                }
                if arms.is_empty() {
                    return Err(EnvError::EmptyShape);
                }
            }
            None if self.set_family == SetFamily::IidRotations => {
                return Err(EnvError::RotationsNeedBaseArms)
            }
            None => {}
        }
        Ok(())
    }

    pub fn theta_vector(&self) -> Vector {
        Vector::from_column_slice(&self.theta_star)
    }

    /// θ* as used for rewards: with clipping on it is shrunk so that
    /// `‖θ*‖ + noise range ≤ 1`, keeping the clamp inactive in distribution.
    pub fn effective_theta(&self) -> Vector {
        let theta = self.theta_vector();
        if !self.reward_clip {
            return theta;
        }
        let room = 1.0 - self.noise.range();
        let norm = theta.norm();
        if norm > room {
            theta * (room / norm)
        } else {
            theta
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionSet {
    pub arms: Vec<Vector>,
}

impl DecisionSet {
    pub fn new(arms: Vec<Vector>) -> Self {
        assert!(!arms.is_empty(), "decision sets are nonempty");
        Self { arms }
    }

    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundDraw {
    pub sets: Vec<DecisionSet>,
    pub noise: Vec<f64>,
}

/// `⟨x, θ*⟩ + η`, clamped to `[−1, 1]` when `clip` is set.
pub fn reward(x: &Vector, theta: &Vector, eta: f64, clip: bool) -> f64 {
    let r = x.dot(theta) + eta;
    if clip {
        r.clamp(-1.0, 1.0)
    } else {
        r
    }
}

/// `max_{x ∈ D} ⟨x, θ*⟩`.
pub fn optimal_value(set: &DecisionSet, theta: &Vector) -> f64 {
    set.arms
        .iter()
        .map(|x| x.dot(theta))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Index of the first arm attaining `optimal_value`.
pub fn greedy_arm(set: &DecisionSet, theta: &Vector) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, x) in set.arms.iter().enumerate() {
        let v = x.dot(theta);
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    best
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the signs
/// of `R`'s diagonal folded into `Q`.
pub fn haar_orthogonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

fn clamp_to_ball(mut x: Vector) -> Vector {
    let n = x.norm();
    if n > 1.0 {
        x /= n;
    }
    x
}

/// A running environment: spec, generator state and drift parameters.
#[derive(Debug, Clone)]
pub struct Environment {
    spec: EnvironmentSpec,
    theta: Vector,
    base: Option<Vec<Vector>>,
    center: Vector,
    rng: ChaCha8Rng,
}

impl Environment {
    pub fn new(spec: EnvironmentSpec, rng: ChaCha8Rng) -> Result<Self, EnvError> {
        spec.validate()?;
        let theta = spec.effective_theta();
        let base = spec
            .base_arms
            .as_ref()
            .map(|arms| arms.iter().map(|a| Vector::from_column_slice(a)).collect());
        let center = Vector::zeros(spec.d);
        Ok(Self {
            spec,
            theta,
            base,
            center,
            rng,
        })
    }

    pub fn from_seed(spec: EnvironmentSpec, seed: u64) -> Result<Self, EnvError> {
        Self::new(spec, ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn spec(&self) -> &EnvironmentSpec {
        &self.spec
    }

    /// The parameter rewards are drawn against.
    pub fn theta(&self) -> &Vector {
        &self.theta
    }

    pub fn reward(&self, x: &Vector, eta: f64) -> f64 {
        reward(x, &self.theta, eta, self.spec.reward_clip)
    }

    pub fn noise_spec(&self) -> NoiseSpec {
        self.spec.noise
    }

    fn draw_set(&mut self) -> DecisionSet {
        let d = self.spec.d;
        let k = self.spec.arms_per_set;
        match (&self.base, self.spec.set_family) {
            (Some(base), SetFamily::IidRotations) => {
                let q = haar_orthogonal(d, &mut self.rng);
                DecisionSet::new(base.iter().map(|x| clamp_to_ball(&q * x)).collect())
            }
            (Some(base), _) => {
                let take = k.min(base.len());
                let picks = index::sample(&mut self.rng, base.len(), take);
                DecisionSet::new(picks.iter().map(|i| base[i].clone()).collect())
            }
            (None, _) => {
                let arms = (0..k)
                    .map(|_| {
                        let z = Vector::from_fn(d, |_, _| StandardNormal.sample(&mut self.rng));
                        let v = z + &self.center;
                        let n = v.norm();
                        if n > 0.0 {
                            clamp_to_ball(v / n)
                        } else {
                            v
                        }
                    })
                    .collect();
                DecisionSet::new(arms)
            }
        }
    }

    /// Draws every agent's decision set and noise for step `t` (1-based).
    pub fn sample_round(&mut self, t: usize) -> RoundDraw {
        assert!(t >= 1, "steps are 1-based");
        if self.spec.drift_schedule.contains(&t) {
            self.center = Vector::from_fn(self.spec.d, |_, _| StandardNormal.sample(&mut self.rng));
        }
        let n = self.spec.agents;
        let sets = if self.spec.set_family == SetFamily::Shared {
            let set = self.draw_set();
            vec![set; n]
        } else {
            (0..n).map(|_| self.draw_set()).collect()
        };
        let noise_spec = self.spec.noise;
        let noise = (0..n).map(|_| noise_spec.sample(&mut self.rng)).collect();
        RoundDraw { sets, noise }
    }
}

/// Worst-case Frobenius deviation of the chosen action's outer product.
///
/// The policy is greedy with respect to θ*. The expectation is replaced by
/// the Monte Carlo mean over `samples` independent sets drawn at the first
/// step, and the maximum deviation from that mean is returned. Shared sets
/// leave no randomness across agents, so that mode returns 0.
pub fn empirical_sigma(
    spec: &EnvironmentSpec,
    samples: usize,
    rng: ChaCha8Rng,
) -> Result<f64, EnvError> {
    if spec.set_family == SetFamily::Shared {
        spec.validate()?;
        return Ok(0.0);
    }
    let mut single = spec.clone();
    single.agents = 1;
    single.drift_schedule.clear();
    let mut env = Environment::new(single, rng)?;
    let theta = env.theta().clone();
    let outers: Vec<DMatrix<f64>> = (0..samples.max(1))
        .map(|_| {
            let set = env.draw_set();
            let x = &set.arms[greedy_arm(&set, &theta)];
            x * x.transpose()
        })
        .collect();
    let mean = outers
        .iter()
        .fold(DMatrix::zeros(spec.d, spec.d), |acc, m| acc + m)
        / outers.len() as f64;
    let worst = outers
        .iter()
        .map(|m| (m - &mean).norm())
        .fold(0.0, f64::max);
    Ok(worst.min(2.0))
}
