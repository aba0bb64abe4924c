//! Independent oracles and instance generators shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rig::genbip::BipartiteIncidence;
use rig::model::{make_weighted_profile, AttributeProfile, ProfileShape};

/// A small random instance: profile plus the seed used to sample it.
pub struct Instance {
    pub n: usize,
    pub profile: AttributeProfile,
    pub seed: u64,
}

/// `count` instances with `n, m <= 64`, alternating uniform and two-level
/// profiles with `c` drawn from `[0.3, 3]`.
pub fn small_instances(count: usize, seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n = rng.random_range(2..=64usize);
        let m = rng.random_range(1..=64usize);
        let c = rng.random_range(0.3..3.0);
        let shape = if out.len() % 2 == 0 {
            ProfileShape::Uniform
        } else {
            ProfileShape::TwoLevel {
                fraction: rng.random_range(0.2..0.8),
                ratio: rng.random_range(0.1..1.0),
            }
        };
        if let Ok(profile) = make_weighted_profile(n, m, c, shape) {
            let seed = rng.random();
            out.push(Instance { n, profile, seed });
        }
    }
    out
}

/// Component size of every node, by merging the holders of each attribute.
pub fn component_sizes_oracle(inc: &BipartiteIncidence) -> Vec<usize> {
    let n = inc.n();
    let mut label: Vec<usize> = (0..n).collect();
    fn root(label: &mut [usize], mut x: usize) -> usize {
        while label[x] != x {
            x = label[x];
        }
        x
    }
    for w in 0..inc.m() {
        let holders = inc.attr_nodes(w);
        if let Some(&first) = holders.first() {
            for &v in &holders[1..] {
                let a = root(&mut label, first as usize);
                let b = root(&mut label, v as usize);
                if a != b {
                    label[b] = a;
                }
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|v| root(&mut label, v)).collect();
    let mut count = vec![0usize; n];
    for &r in &roots {
        count[r] += 1;
    }
    roots.iter().map(|&r| count[r]).collect()
}

/// Number of attributes two nodes share, by direct comparison of their lists.
pub fn shared_attributes(inc: &BipartiteIncidence, u: usize, v: usize) -> usize {
    let b = inc.node_attrs(v);
    inc.node_attrs(u).iter().filter(|w| b.contains(w)).count()
}

/// Root of `1 - e^{-c z} = z` in `(0, 1)` by plain bisection.
pub fn zeta_bisection(c: f64) -> f64 {
    if c <= 1.0 {
        return 0.0;
    }
    let f = |z: f64| 1.0 - (-c * z).exp() - z;
    let (mut lo, mut hi) = (1e-12, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `Bin(m, p)` pmf by the ratio recurrence.
pub fn binomial_pmf_oracle(m: u64, p: f64) -> Vec<f64> {
    if p == 0.0 {
        let mut v = vec![0.0; m as usize + 1];
        v[0] = 1.0;
        return v;
    }
    if p == 1.0 {
        let mut v = vec![0.0; m as usize + 1];
        v[m as usize] = 1.0;
        return v;
    }
    let mut pmf = Vec::with_capacity(m as usize + 1);
    pmf.push((1.0 - p).powi(m as i32));
    for k in 0..m {
        let next = pmf[k as usize] * (m - k) as f64 / (k + 1) as f64 * p / (1.0 - p);
        pmf.push(next);
    }
    pmf
}

/// `1 - prod(1 - p_w^2)` evaluated directly.
pub fn edge_probability_oracle(probs: &[f64]) -> f64 {
    1.0 - probs.iter().map(|p| 1.0 - p * p).product::<f64>()
}

/// `(E[phi_0], E[phi_0^2])` evaluated directly as products over attributes.
pub fn phi0_moments_oracle(probs: &[f64]) -> (f64, f64) {
    let mean = probs.iter().map(|p| 1.0 - p * p).product();
    let second = probs
        .iter()
        .map(|p| 1.0 - 2.0 * p * p + p * p * p)
        .product();
    (mean, second)
}
