use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::stats::{ecdf, ks_two_sample, TestResult};
use crate::analysis::{edge_probability, pair_dependence, solve_zeta, PairDependence, PairMethod};
use crate::error::{Result, RigError};
use crate::genbip::{sample_attribute_set, sample_incidence, sample_incidence_raw};
use crate::graph::{build_intersection, components, explore_faithful, ExplorationTrace};
use crate::model::{AttributeProfile, RigConfig};
use crate::rng::{derive_seed, stream};
use crate::surrogate::{run_surrogate_with, SurrogateOptions};

/// Aggregate identity checks over a batch of traces.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct TraceAudit {
    pub traces: usize,
    pub identity_violations: usize,
    pub max_phi_error: f64,
    pub max_telescoping_error: f64,
}

impl TraceAudit {
    pub fn record(&mut self, trace: &ExplorationTrace, profile: &AttributeProfile) {
        self.traces += 1;
        if trace.check_identities().is_err() {
            self.identity_violations += 1;
        }
        self.max_phi_error = self.max_phi_error.max(trace.phi_recompute_error(profile));
        self.max_telescoping_error = self.max_telescoping_error.max(trace.telescoping_error());
    }

    pub fn clean(&self, tol: f64) -> bool {
        self.identity_violations == 0
            && self.max_phi_error < tol
            && self.max_telescoping_error < tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurrogateReport {
    pub n: usize,
    pub m: usize,
    pub reps: usize,
    pub ks: TestResult,
    pub surrogate_mean: f64,
    pub faithful_mean: f64,
    pub surrogate_ecdf: Vec<(f64, f64)>,
    pub faithful_ecdf: Vec<(f64, f64)>,
    pub audit: TraceAudit,
    #[serde(skip)]
    pub surrogate_times: Vec<f64>,
    #[serde(skip)]
    pub faithful_times: Vec<f64>,
}

/// Compares surrogate stopping times with component sizes of a uniformly chosen
/// start node in freshly sampled graphs, by a two-sample KS test.
pub fn surrogate_vs_faithful(
    n: usize,
    profile: &AttributeProfile,
    reps: usize,
    seed: u64,
    options: SurrogateOptions,
) -> Result<SurrogateReport> {
    if reps < 1 {
        return Err(RigError::Input("reps must be at least 1".into()));
    }
    let surrogate: Vec<ExplorationTrace> = (0..reps as u64)
        .into_par_iter()
        .map(|r| run_surrogate_with(n, profile, seed, r, options))
        .collect::<Result<_>>()?;
    let faithful: Vec<ExplorationTrace> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let graph_seed = derive_seed(seed, "faithful", &[r]);
            let inc = sample_incidence(&RigConfig::new(n, profile.clone(), 1, graph_seed)?)?;
            let v0 = stream(seed, "start", &[r]).random_range(0..n);
            explore_faithful(&inc, profile, v0, graph_seed)
        })
        .collect::<Result<_>>()?;

    let mut audit = TraceAudit::default();
    for tr in surrogate.iter().chain(&faithful) {
        audit.record(tr, profile);
    }
    let s_times: Vec<f64> = surrogate.iter().map(|t| t.stop_time as f64).collect();
    let f_times: Vec<f64> = faithful.iter().map(|t| t.stop_time as f64).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(SurrogateReport {
        n,
        m: profile.m(),
        reps,
        ks: ks_two_sample(&s_times, &f_times)?,
        surrogate_mean: mean(&s_times),
        faithful_mean: mean(&f_times),
        surrogate_ecdf: ecdf(&s_times),
        faithful_ecdf: ecdf(&f_times),
        audit,
        surrogate_times: s_times,
        faithful_times: f_times,
    })
}

fn intersects(a: &[u32], b: &[u32]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

const CHUNK: u64 = 4096;

/// Counts, over `trials` independent draws of two attribute sets, how often
/// the two nodes are adjacent (`s = 1`). Returns `(hits, trials)`.
pub fn edge_frequency(profile: &AttributeProfile, trials: u64, seed: u64) -> (u64, u64) {
    let chunks = trials.div_ceil(CHUNK);
    let hits = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, "edge-frequency", &[c]);
            let len = CHUNK.min(trials - c * CHUNK);
            (0..len)
                .filter(|_| {
                    let a = sample_attribute_set(&mut rng, profile);
                    let b = sample_attribute_set(&mut rng, profile);
                    intersects(&a, &b)
                })
                .count() as u64
        })
        .sum();
    (hits, trials)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DependenceReport {
    pub reps: u64,
    pub freq_ik: f64,
    pub freq_jk: f64,
    pub empirical_joint: f64,
    pub empirical_product: f64,
    pub std_error: f64,
    /// `(joint - product) / std_error`; zero when the difference is degenerate.
    pub z_score: f64,
    pub closed_form: PairDependence,
    pub edge_probability: f64,
}

/// Estimates `P[v_i ~ v_k, v_j ~ v_k]` against `P[v_i ~ v_k] P[v_j ~ v_k]` for
/// three fixed nodes over `reps` sampled graphs. The standard error of the
/// difference uses the delta method with influence `J - b A - a B`.
pub fn dependence_demo(
    profile: &AttributeProfile,
    reps: u64,
    seed: u64,
) -> Result<DependenceReport> {
    if reps < 2 {
        return Err(RigError::Input("dependence demo needs reps >= 2".into()));
    }
    let chunks = reps.div_ceil(CHUNK);
    let samples: Vec<(bool, bool)> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = stream(seed, "depdemo", &[c]);
            let len = CHUNK.min(reps - c * CHUNK);
            (0..len)
                .map(|_| {
                    let wi = sample_attribute_set(&mut rng, profile);
                    let wj = sample_attribute_set(&mut rng, profile);
                    let wk = sample_attribute_set(&mut rng, profile);
                    (intersects(&wi, &wk), intersects(&wj, &wk))
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let k = reps as f64;
    let a = samples.iter().filter(|s| s.0).count() as f64 / k;
    let b = samples.iter().filter(|s| s.1).count() as f64 / k;
    let joint = samples.iter().filter(|s| s.0 && s.1).count() as f64 / k;
    let product = a * b;
    let infl = |s: &(bool, bool)| {
        let (ai, bi) = (s.0 as u8 as f64, s.1 as u8 as f64);
        ai * bi - b * ai - a * bi
    };
    let mean_infl = samples.iter().map(infl).sum::<f64>() / k;
    let var = samples
        .iter()
        .map(|s| (infl(s) - mean_infl).powi(2))
        .sum::<f64>()
        / (k - 1.0);
    let se = (var / k).sqrt();
    let diff = joint - product;
    let z = if se > 0.0 { diff / se } else { 0.0 };
    Ok(DependenceReport {
        reps,
        freq_ik: a,
        freq_jk: b,
        empirical_joint: joint,
        empirical_product: product,
        std_error: se,
        z_score: z,
        closed_form: pair_dependence(profile, PairMethod::Auto)?,
        edge_probability: edge_probability(profile),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SprinkledProfile {
    pub gamma: f64,
    /// `p_w + p_w^gamma (1 - p_w)`.
    pub profile: AttributeProfile,
    /// `p_w^gamma` for the sprinkled layer; entries may underflow to 0.
    pub hat_probs: Vec<f64>,
    pub sum_sq_before: f64,
    pub sum_sq_after: f64,
    /// `sum_w p_w^(2 gamma)`.
    pub hat_sum_sq: f64,
}

pub fn sprinkle_profile(profile: &AttributeProfile, gamma: f64) -> Result<SprinkledProfile> {
    if !(gamma > 1.0 && gamma.is_finite()) {
        return Err(RigError::Domain(format!(
            "gamma must exceed 1, got {gamma}"
        )));
    }
    let hat_probs: Vec<f64> = profile.probs().iter().map(|p| p.powf(gamma)).collect();
    let merged: Vec<f64> = profile
        .probs()
        .iter()
        .zip(&hat_probs)
        .map(|(p, h)| p + h * (1.0 - p))
        .collect();
    let merged = AttributeProfile::new(merged)?;
    Ok(SprinkledProfile {
        gamma,
        sum_sq_before: profile.sum_squares(),
        sum_sq_after: merged.sum_squares(),
        hat_sum_sq: hat_probs.iter().map(|h| h * h).sum(),
        profile: merged,
        hat_probs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SprinkleReport {
    pub n: usize,
    pub gamma: f64,
    pub c_before: f64,
    pub c_union: f64,
    /// `n^2 sum_w p_w^(2 gamma)`; should grow with `n` for the merge argument.
    pub hat_diag: f64,
    pub largest_before: f64,
    pub largest_after: f64,
    pub zeta_before: f64,
    pub zeta_union: f64,
}

/// Samples a base incidence and an independent sprinkled layer with
/// probabilities `p_w^gamma`, unions them node by node, and compares the
/// largest component before and after.
pub fn sprinkle_demo(
    n: usize,
    profile: &AttributeProfile,
    gamma: f64,
    seed: u64,
) -> Result<SprinkleReport> {
    let sp = sprinkle_profile(profile, gamma)?;
    let base = sample_incidence(&RigConfig::new(
        n,
        profile.clone(),
        1,
        derive_seed(seed, "base", &[]),
    )?)?;
    let hat = sample_incidence_raw(n, &sp.hat_probs, derive_seed(seed, "sprinkle", &[]))?;
    let union = base.union(&hat)?;
    let before = components(&build_intersection(&base, 1)?);
    let after = components(&build_intersection(&union, 1)?);
    let nf = n as f64;
    let c_before = nf * sp.sum_sq_before;
    let c_union = nf * sp.sum_sq_after;
    Ok(SprinkleReport {
        n,
        gamma,
        c_before,
        c_union,
        hat_diag: nf * nf * sp.hat_sum_sq,
        largest_before: before.largest_fraction,
        largest_after: after.largest_fraction,
        zeta_before: solve_zeta(c_before)?.zeta,
        zeta_union: solve_zeta(c_union)?.zeta,
    })
}
