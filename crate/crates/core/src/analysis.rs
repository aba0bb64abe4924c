//! Closed-form quantities for the model and the giant-component fixed point.
//!
//! Products over attributes are accumulated as sums of `log1p` terms and mapped
//! back with `exp`/`expm1`, which keeps `1 - prod(1 - p_w^2)` accurate when the
//! individual `p_w^2` are far below machine epsilon relative to 1.

use rand::Rng;
use serde::Serialize;

use crate::error::{Result, RigError};
use crate::genbip::sample_attribute_set;
use crate::model::{AttributeProfile, CompensatedSum};
use crate::rng::stream;

/// `sum_w ln(1 + f(p_w))`.
fn log_product<F: Fn(f64) -> f64>(profile: &AttributeProfile, f: F) -> f64 {
    profile
        .probs()
        .iter()
        .map(|&p| f(p).ln_1p())
        .collect::<CompensatedSum>()
        .value()
}

/// `E[phi_t] = prod_w (1 - p_w (1 - q_w^(t+1)))`.
pub fn expected_phi(profile: &AttributeProfile, t: u64) -> f64 {
    let k = (t + 1) as f64;
    // 1 - q^(t+1) = -expm1((t+1) ln(1 - p))
    log_product(profile, |p| p * (k * (-p).ln_1p()).exp_m1()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Phi0Moments {
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
}

/// Mean `prod(1 - p^2)`, second moment `prod(1 - 2p^2 + p^3)` and variance of
/// `phi_0 = prod_{w in W(v0)} q_w`.
pub fn phi0_moments(profile: &AttributeProfile) -> Phi0Moments {
    let log_mean = log_product(profile, |p| -p * p);
    let log_second = log_product(profile, |p| p * p * (p - 2.0));
    let mean = log_mean.exp();
    // second / mean^2 = prod(1 + (p^3 - p^4) / (1 - p^2)^2), which keeps the
    // variance non-negative and free of cancellation.
    let log_ratio = log_product(profile, |p| {
        let d = 1.0 - p * p;
        p * p * p * (1.0 - p) / (d * d)
    });
    Phi0Moments {
        mean,
        second_moment: log_second.exp(),
        variance: mean * mean * log_ratio.exp_m1(),
    }
}

/// Marginal edge probability `1 - prod_w (1 - p_w^2)`.
pub fn edge_probability(profile: &AttributeProfile) -> f64 {
    -log_product(profile, |p| -p * p).exp_m1()
}

pub const MAX_ENUMERATION_M: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairMethod {
    /// Exact enumeration for `m <= 20`, closed form otherwise.
    Auto,
    /// Sum over all `2^m` attribute sets of the shared node.
    Enumerate,
    /// `1 - 2 E[phi_0] + E[phi_0^2]`.
    ClosedForm,
    MonteCarlo {
        reps: u64,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairDependence {
    /// `P[v_i ~ v_k, v_j ~ v_k]`.
    pub joint: f64,
    /// `P[v_i ~ v_k] P[v_j ~ v_k]`.
    pub product: f64,
}

/// Joint probability that two nodes both attach to a third, against the product
/// of the marginals. Given `W(v_k)` the two events are independent with
/// probability `1 - prod_{W(v_k)} q` each, so the joint is the second moment of
/// that conditional probability.
pub fn pair_dependence(profile: &AttributeProfile, method: PairMethod) -> Result<PairDependence> {
    let m = profile.m();
    let product = edge_probability(profile).powi(2);
    let joint = match method {
        PairMethod::Auto if m <= MAX_ENUMERATION_M => enumerate_joint(profile),
        PairMethod::Auto | PairMethod::ClosedForm => {
            let mo = phi0_moments(profile);
            // 1 - 2 mean + second, computed from the complement to avoid
            // cancellation: (1 - mean)^2 + variance.
            let one_minus_mean = edge_probability(profile);
            (one_minus_mean * one_minus_mean + mo.variance).max(0.0)
        }
        PairMethod::Enumerate => {
            if m > MAX_ENUMERATION_M {
                return Err(RigError::EnumerationBudget {
                    m,
                    limit: MAX_ENUMERATION_M,
                });
            }
            enumerate_joint(profile)
        }
        PairMethod::MonteCarlo { reps, seed } => {
            if reps == 0 {
                return Err(RigError::Input("Monte Carlo needs reps >= 1".into()));
            }
            let mut rng = stream(seed, "pair-dependence", &[]);
            let mut acc = CompensatedSum::new();
            for _ in 0..reps {
                let attrs = sample_attribute_set(&mut rng, profile);
                let phi: f64 = attrs.iter().map(|&w| profile.q(w as usize)).product();
                acc.add((1.0 - phi) * (1.0 - phi));
            }
            acc.value() / reps as f64
        }
    };
    Ok(PairDependence { joint, product })
}

fn enumerate_joint(profile: &AttributeProfile) -> f64 {
    let p = profile.probs();
    let m = p.len();
    let mut acc = CompensatedSum::new();
    for mask in 0u32..(1u32 << m) {
        let mut weight = 1.0;
        let mut phi = 1.0;
        for (w, &pw) in p.iter().enumerate() {
            if mask & (1 << w) != 0 {
                weight *= pw;
                phi *= 1.0 - pw;
            } else {
                weight *= 1.0 - pw;
            }
        }
        acc.add(weight * (1.0 - phi) * (1.0 - phi));
    }
    acc.value()
}

/// Solution of the giant-component fixed point at threshold statistic `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GiantPrediction {
    pub c: f64,
    /// Root of `1 - exp(-c z) = z`; zero when `c <= 1`.
    pub zeta: f64,
    /// `n * zeta`; zero unless produced by [`predict_giant`].
    pub predicted_size: f64,
    /// Limiting variance of `(largest - n zeta) / sqrt(n)`.
    pub clt_var: f64,
    /// `1 - zeta`, the root of `rho = exp(c (rho - 1))`.
    pub rho: f64,
}

impl GiantPrediction {
    pub fn residual(&self) -> f64 {
        ((-self.c * self.zeta).exp_m1() + self.zeta).abs()
    }

    pub fn rho_residual(&self) -> f64 {
        (self.rho - (self.c * (self.rho - 1.0)).exp()).abs()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("prediction serializes")
    }
}

pub const ZETA_TOL: f64 = 1e-12;

fn zeta_residual(c: f64, z: f64) -> f64 {
    // 1 - exp(-c z) - z
    -(-c * z).exp_m1() - z
}

pub fn solve_zeta(c: f64) -> Result<GiantPrediction> {
    if !(c.is_finite() && c > 0.0) {
        return Err(RigError::Domain(format!(
            "c must be positive and finite, got {c}"
        )));
    }
    let zeta = if c <= 1.0 { 0.0 } else { newton_bisect(c) };
    let denom = 1.0 - c + c * zeta;
    let clt_var = if zeta == 0.0 && c < 1.0 {
        0.0
    } else {
        zeta * (1.0 - zeta) / (denom * denom)
    };
    Ok(GiantPrediction {
        c,
        zeta,
        predicted_size: 0.0,
        clt_var,
        rho: 1.0 - zeta,
    })
}

/// [`solve_zeta`] with `predicted_size = n * zeta`.
pub fn predict_giant(c: f64, n: usize) -> Result<GiantPrediction> {
    let mut g = solve_zeta(c)?;
    g.predicted_size = n as f64 * g.zeta;
    Ok(g)
}

/// Newton iteration from `1 - e^{-c}` safeguarded by the bracket
/// `[1e-16, 1 - 1e-16]`, on which the residual changes sign for `c > 1`.
fn newton_bisect(c: f64) -> f64 {
    let (mut lo, mut hi) = (1e-16, 1.0 - 1e-16);
    let mut z = -(-c).exp_m1();
    for _ in 0..200 {
        let f = zeta_residual(c, z);
        if f.abs() < ZETA_TOL * 1e-2 {
            return z;
        }
        if f > 0.0 {
            lo = z;
        } else {
            hi = z;
        }
        let df = c * (-c * z).exp() - 1.0;
        let newton = z - f / df;
        z = if df != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < f64::EPSILON * hi {
            break;
        }
    }
    z
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErBracket {
    pub c_minus: f64,
    pub c_plus: f64,
}

impl ErBracket {
    /// Erdős–Rényi edge probabilities `c^± / n`.
    pub fn rates(&self, n: usize) -> (f64, f64) {
        (self.c_minus / n as f64, self.c_plus / n as f64)
    }
}

/// Brackets `c` between two supercritical Erdős–Rényi intensities `c (1 ± delta)`.
pub fn er_bracket(c: f64, delta: f64) -> Result<ErBracket> {
    if !(c > 1.0 && c.is_finite()) {
        return Err(RigError::Domain(format!("bracket needs c > 1, got {c}")));
    }
    if !(delta > 0.0 && delta < c - 1.0) {
        return Err(RigError::Domain(format!(
            "delta = {delta} outside (0, c - 1)"
        )));
    }
    let c_minus = c * (1.0 - delta);
    if c_minus <= 1.0 {
        return Err(RigError::Domain(format!(
            "c (1 - delta) = {c_minus} is not above 1"
        )));
    }
    Ok(ErBracket {
        c_minus,
        c_plus: c * (1.0 + delta),
    })
}

/// Subcritical largest-component envelope `9 / (1 - c^2) ln n`.
pub fn behrisch_bound(c: f64, n: f64) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return Err(RigError::Domain(format!("bound needs 0 < c < 1, got {c}")));
    }
    if n.is_nan() || n < 2.0 {
        return Err(RigError::Domain(format!("bound needs n >= 2, got {n}")));
    }
    if c > 1.0 - 1e-9 {
        return Ok(f64::INFINITY);
    }
    Ok(9.0 / (1.0 - c * c) * n.ln())
}

/// Monte Carlo estimate of `(E[phi_0], E[phi_0^2])` with standard errors, by
/// sampling `W(v0)` directly.
pub fn phi0_monte_carlo<R: Rng + ?Sized>(
    profile: &AttributeProfile,
    draws: u64,
    rng: &mut R,
) -> ((f64, f64), (f64, f64)) {
    let (mut s1, mut s2, mut s4) = (0.0, 0.0, 0.0);
    for _ in 0..draws {
        let phi: f64 = sample_attribute_set(rng, profile)
            .iter()
            .map(|&w| profile.q(w as usize))
            .product();
        let sq = phi * phi;
        s1 += phi;
        s2 += sq;
        s4 += sq * sq;
    }
    let k = draws as f64;
    let (m1, m2) = (s1 / k, s2 / k);
    let se1 = ((m2 - m1 * m1).max(0.0) / k).sqrt();
    let se2 = ((s4 / k - m2 * m2).max(0.0) / k).sqrt();
    ((m1, se1), (m2, se2))
}
