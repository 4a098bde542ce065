//! Tree-based mechanism for private running partial sums.
//!
//! Each agent's prefix sums `(V^k, v^k)` are released as `(V^k + H^k, v^k + h^k)`
//! where `H^k, h^k` add up the Gaussian noise stored at the dyadic nodes that
//! cover `[1, k−1]`. A node's noise is drawn once, from a generator keyed by
//! the tree seed and the node, so every prefix touching it sees the same sample.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::mathcore::{SymMatrix, Vector};
use crate::schedules;

/// A dyadic interval `[start, end]` of episodes (1-based, inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DyadicInterval {
    pub start: usize,
    pub end: usize,
}

impl DyadicInterval {
    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }
}

/// Depth of the tree over `episodes` leaves: `1 + ⌈log₂ K⌉`.
pub fn tree_depth(episodes: usize) -> usize {
    1 + ceil_log2(episodes.max(1))
}

fn ceil_log2(k: usize) -> usize {
    (usize::BITS - (k - 1).leading_zeros()) as usize * usize::from(k > 1)
}

/// Disjoint dyadic intervals whose union is `[1, k]`, in increasing order.
///
/// Follows the binary expansion of `k`: `7 = 4 + 2 + 1` gives `[1,4], [5,6], [7,7]`.
pub fn prefix_nodes(k: usize) -> Vec<DyadicInterval> {
    let mut out = Vec::new();
    let mut start = 1;
    let mut bit = if k == 0 {
        0
    } else {
        1usize << (usize::BITS - 1 - k.leading_zeros())
    };
    while bit > 0 {
        if k & bit != 0 {
            out.push(DyadicInterval {
                start,
                end: start + bit - 1,
            });
            start += bit;
        }
        bit >>= 1;
    }
    out
}

/// Per-node noise standard deviation.
///
/// Each of the `m = 1 + ⌈log₂ K⌉` levels gets a `(μ/m, ν/m)` share of the
/// budget through the Gaussian mechanism with sensitivity `2L`:
/// `σ = (2 L m / μ) √(2 ln(1.25 m / ν))`. An infinite `μ` disables the noise.
pub fn calibrate(mu: f64, nu: f64, episode_len: usize, episodes: usize) -> f64 {
    if mu.is_infinite() {
        return 0.0;
    }
    let m = tree_depth(episodes) as f64;
    (2.0 * episode_len as f64 * m / mu) * (2.0 * (1.25 * m / nu).ln()).sqrt()
}

/// Noise budget `(μ, ν)` with the high-probability norm bound `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyBudget {
    pub mu: f64,
    pub nu: f64,
    pub episode_len: usize,
    pub bound: f64,
}

impl PrivacyBudget {
    /// `B = 48 ι ln(4/ν) (√d + ι) / μ`.
    pub fn new(mu: f64, nu: f64, episode_len: usize, iota: f64, d: usize) -> Self {
        Self {
            mu,
            nu,
            episode_len,
            bound: schedules::noise_budget_b(mu, nu, iota, d),
        }
    }

    /// Replaces `B`; used to probe the exceedance check.
    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = bound;
        self
    }

    /// The norm threshold `B · L`.
    pub fn threshold(&self) -> f64 {
        self.bound * self.episode_len as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeNoise {
    pub matrix: SymMatrix,
    pub vector: Vector,
}

/// Noise store for one agent's released prefix sums.
#[derive(Debug, Clone)]
pub struct NoiseTree {
    episodes: usize,
    dim: usize,
    sigma: f64,
    seed: u64,
    nodes: BTreeMap<DyadicInterval, NodeNoise>,
}

impl NoiseTree {
    pub fn new(episodes: usize, dim: usize, sigma: f64, seed: u64) -> Self {
        Self {
            episodes,
            dim,
            sigma,
            seed,
            nodes: BTreeMap::new(),
        }
    }

    /// A tree that never adds noise.
    pub fn disabled(episodes: usize, dim: usize) -> Self {
        Self::new(episodes, dim, 0.0, 0)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn episodes(&self) -> usize {
        self.episodes
    }

    pub fn depth(&self) -> usize {
        tree_depth(self.episodes)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Nodes sampled so far.
    pub fn drawn_nodes(&self) -> impl Iterator<Item = (&DyadicInterval, &NodeNoise)> {
        self.nodes.iter()
    }

    pub fn node(&mut self, interval: DyadicInterval) -> &NodeNoise {
        let (dim, sigma, seed) = (self.dim, self.sigma, self.seed);
        self.nodes
            .entry(interval)
            .or_insert_with(|| draw_node(dim, sigma, seed, interval))
    }

    /// Accumulated noise `(H, h)` over the nodes covering `[1, prefix]`.
    pub fn prefix_noise(&mut self, prefix: usize) -> (SymMatrix, Vector) {
        let mut h_mat = SymMatrix::zeros(self.dim);
        let mut h_vec = Vector::zeros(self.dim);
        if self.sigma == 0.0 {
            return (h_mat, h_vec);
        }
        for interval in prefix_nodes(prefix) {
            let node = self.node(interval);
            h_mat = h_mat.add(&node.matrix);
            h_vec += &node.vector;
        }
        (h_mat, h_vec)
    }

    /// Releases `(V + H, v + h)` where `V, v` are the sums through episode `k − 1`.
    ///
    /// With zero noise the inputs come back unchanged.
    pub fn privatize(
        &mut self,
        v_mat: &SymMatrix,
        v_vec: &Vector,
        k: usize,
    ) -> (SymMatrix, Vector) {
        assert!(
            k >= 1 && k <= self.episodes.max(1) + 1,
            "episode {k} outside tree"
        );
        if self.sigma == 0.0 || k == 1 {
            return (v_mat.clone(), v_vec.clone());
        }
        let (h_mat, h_vec) = self.prefix_noise(k - 1);
        (v_mat.add(&h_mat), v_vec + h_vec)
    }
}

fn node_stream(interval: DyadicInterval) -> u64 {
    ((interval.start as u64) << 32) | interval.end as u64
}

fn draw_node(dim: usize, sigma: f64, seed: u64, interval: DyadicInterval) -> NodeNoise {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(node_stream(interval));
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let x: f64 = StandardNormal.sample(&mut rng);
            m[(i, j)] = sigma * x;
            m[(j, i)] = sigma * x;
        }
    }
    let vector = Vector::from_iterator(
        dim,
        (0..dim).map(|_| {
            let x: f64 = StandardNormal.sample(&mut rng);
            sigma * x
        }),
    );
    NodeNoise {
        matrix: SymMatrix::new(m).expect("mirrored noise is symmetric"),
        vector,
    }
}

/// Fraction of `(trial, k)` pairs whose accumulated noise exceeds `B · L`.
///
/// Trial `j` uses a fresh tree with the template's parameters and seed
/// `template.seed + j`. A pair exceeds when either the spectral norm of `H`
/// or the ℓ₂ norm of `h` is above the threshold.
pub fn noise_norm_check(template: &NoiseTree, budget: &PrivacyBudget, trials: usize) -> f64 {
    let episodes = template.episodes.max(1);
    let threshold = budget.threshold();
    let mut exceed = 0usize;
    for trial in 0..trials {
        let mut tree = NoiseTree::new(
            episodes,
            template.dim,
            template.sigma,
            template.seed.wrapping_add(trial as u64),
        );
        for k in 1..=episodes {
            let (h_mat, h_vec) = tree.prefix_noise(k);
            if h_mat.spectral_norm() > threshold || h_vec.norm() > threshold {
                exceed += 1;
            }
        }
    }
    exceed as f64 / (trials * episodes) as f64
}
