//! Two-sample Kolmogorov–Smirnov, Pearson chi-square and Wilson intervals.
//!
//! p-values come from the asymptotic null distributions (Kolmogorov series and
//! chi-square tail), so they are approximations for small samples. For discrete
//! data the KS p-value is conservative.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Result, RigError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Kolmogorov survival function `Q(λ) = 2 Σ_{j>=1} (-1)^{j-1} exp(-2 j² λ²)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-17 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Supremum distance between the empirical CDFs of `a` and `b`, with the
/// asymptotic p-value using the effective size `ab / (a + b)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(RigError::Input(
            "KS test needs two non-empty samples".into(),
        ));
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(RigError::Input("KS test sample contains NaN".into()));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    // Step through distinct values so ties are handled exactly.
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let en = (na * nb / (na + nb)).sqrt();
    let p_value = kolmogorov_sf((en + 0.12 + 0.11 / en) * d);
    Ok(TestResult {
        statistic: d,
        p_value,
    })
}

/// Empirical CDF as sorted `(value, F(value))` pairs at each distinct value.
pub fn ecdf(sample: &[f64]) -> Vec<(f64, f64)> {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (k, &x) in xs.iter().enumerate() {
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 = (k + 1) as f64 / n,
            _ => out.push((x, (k + 1) as f64 / n)),
        }
    }
    out
}

/// Merges adjacent bins left to right until each expected count is at least
/// `min_expected`; a short tail is folded into the last full bin.
pub fn merge_bins(observed: &[f64], expected: &[f64], min_expected: f64) -> (Vec<f64>, Vec<f64>) {
    let mut obs = Vec::new();
    let mut exp = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        o_acc += o;
        e_acc += e;
        if e_acc >= min_expected {
            obs.push(o_acc);
            exp.push(e_acc);
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc > 0.0 {
        match (obs.last_mut(), exp.last_mut()) {
            (Some(lo), Some(le)) => {
                *lo += o_acc;
                *le += e_acc;
            }
            _ => {
                obs.push(o_acc);
                exp.push(e_acc);
            }
        }
    }
    (obs, exp)
}

/// Pearson goodness of fit against expected counts, after merging bins with
/// expected count below 5. Degrees of freedom: merged bins − 1.
pub fn chi_square(observed: &[f64], expected: &[f64]) -> Result<TestResult> {
    if observed.is_empty() || observed.len() != expected.len() {
        return Err(RigError::Input(
            "chi-square needs equal-length non-empty bins".into(),
        ));
    }
    if expected.iter().any(|&e| e.is_nan() || e < 0.0) {
        return Err(RigError::Input(
            "expected counts must be non-negative".into(),
        ));
    }
    let (obs, exp) = merge_bins(observed, expected, 5.0);
    if obs.len() < 2 {
        return Err(RigError::Input("fewer than two bins after merging".into()));
    }
    let statistic: f64 = obs
        .iter()
        .zip(&exp)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    let df = (obs.len() - 1) as f64;
    let dist = ChiSquared::new(df).expect("df >= 1");
    Ok(TestResult {
        statistic,
        p_value: dist.sf(statistic),
    })
}

/// Chi-square of observed counts against a probability mass function.
pub fn chi_square_pmf(observed: &[u64], pmf: &[f64]) -> Result<TestResult> {
    let total: u64 = observed.iter().sum();
    let obs: Vec<f64> = observed.iter().map(|&o| o as f64).collect();
    let exp: Vec<f64> = pmf.iter().map(|p| p * total as f64).collect();
    chi_square(&obs, &exp)
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> Result<(f64, f64)> {
    if trials == 0 || successes > trials {
        return Err(RigError::Input(format!(
            "invalid counts {successes}/{trials}"
        )));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(RigError::Input(format!(
            "confidence {confidence} outside (0, 1)"
        )));
    }
    let z = Normal::standard().inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Ok(((center - half).max(0.0), (center + half).min(1.0)))
}

/// Exact `Bin(m, p)` probability mass function.
pub fn binomial_pmf(m: u64, p: f64) -> Vec<f64> {
    use statrs::distribution::{Binomial, Discrete};
    let d = Binomial::new(p, m).expect("valid binomial");
    (0..=m).map(|k| d.pmf(k)).collect()
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
