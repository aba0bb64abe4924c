//! Model parameters: the attachment-probability profile, run configuration and
//! the threshold statistic `c = n * sum(p_w^2)` with its regularity diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RigError};

/// Half-width of the band around `c = 1` classified as critical.
pub const CRITICAL_TOL: f64 = 1e-9;

/// Kahan–Babuška (Neumaier) compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// The vector of attachment probabilities `p_w`, one per attribute.
///
/// Every entry lies strictly inside `(0, 1)`. An empty profile (`m = 0`) is
/// allowed; all products over attributes are then 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct AttributeProfile {
    probs: Vec<f64>,
}

impl AttributeProfile {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_entries(&probs)?;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn m(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// `q_w = 1 - p_w`.
    pub fn q(&self, w: usize) -> f64 {
        1.0 - self.probs[w]
    }

    /// Returns the common value when every entry is bitwise equal.
    pub fn uniform_value(&self) -> Option<f64> {
        let first = *self.probs.first()?;
        self.probs
            .iter()
            .all(|&p| p.to_bits() == first.to_bits())
            .then_some(first)
    }

    pub fn sum_squares(&self) -> f64 {
        self.probs
            .iter()
            .map(|p| p * p)
            .collect::<CompensatedSum>()
            .value()
    }

    pub fn sum_cubes(&self) -> f64 {
        self.probs
            .iter()
            .map(|p| p * p * p)
            .collect::<CompensatedSum>()
            .value()
    }
}

impl<'de> Deserialize<'de> for AttributeProfile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let probs = Vec::<f64>::deserialize(d)?;
        AttributeProfile::new(probs).map_err(serde::de::Error::custom)
    }
}

fn check_entries(probs: &[f64]) -> Result<()> {
    for (index, &value) in probs.iter().enumerate() {
        // NaN fails both comparisons.
        if !(value > 0.0 && value < 1.0) {
            return Err(RigError::ProfileRange { index, value });
        }
    }
    Ok(())
}

/// A full model instance `G(n, m, p)` with overlap threshold `s` and RNG seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RigConfig {
    pub n: usize,
    pub profile: AttributeProfile,
    pub s: usize,
    pub seed: u64,
}

impl RigConfig {
    pub fn new(n: usize, profile: AttributeProfile, s: usize, seed: u64) -> Result<Self> {
        if n < 1 {
            return Err(RigError::Size("n must be at least 1".into()));
        }
        if s < 1 {
            return Err(RigError::Size(
                "overlap threshold s must be at least 1".into(),
            ));
        }
        Ok(Self {
            n,
            profile,
            s,
            seed,
        })
    }

    pub fn m(&self) -> usize {
        self.profile.m()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl Regime {
    pub fn classify(c: f64) -> Self {
        if (c - 1.0).abs() <= CRITICAL_TOL {
            Regime::Critical
        } else if c < 1.0 {
            Regime::Subcritical
        } else {
            Regime::Supercritical
        }
    }
}

/// Threshold statistic and regularity diagnostics of a profile at a given `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdStat {
    /// `n * sum(p_w^2)`.
    pub c: f64,
    /// `n^2 * sum(p_w^3)`; bounded when the cube-sum regularity condition holds.
    pub cube_diag: f64,
    /// `n * max(p_w)`; bounded when every `p_w = O(1/n)`.
    pub max_diag: f64,
    pub regime: Regime,
}

pub fn validate_profile(profile: &AttributeProfile, n: usize) -> Result<ThresholdStat> {
    if n < 1 {
        return Err(RigError::Size("n must be at least 1".into()));
    }
    check_entries(profile.probs())?;
    let nf = n as f64;
    let c = nf * profile.sum_squares();
    let cube_diag = nf * nf * profile.sum_cubes();
    let max_diag = nf * profile.probs().iter().copied().fold(0.0, f64::max);
    Ok(ThresholdStat {
        c,
        cube_diag,
        max_diag,
        regime: Regime::classify(c),
    })
}

/// All `m` entries equal to `sqrt(c_target / (n m))`.
pub fn make_uniform_profile(n: usize, m: usize, c_target: f64) -> Result<AttributeProfile> {
    if n < 1 || m < 1 {
        return Err(RigError::Size(format!(
            "need n >= 1 and m >= 1, got n={n}, m={m}"
        )));
    }
    if !(c_target.is_finite() && c_target > 0.0) {
        return Err(RigError::Range(format!(
            "c_target must be positive, got {c_target}"
        )));
    }
    let p = (c_target / (n as f64 * m as f64)).sqrt();
    if !(p > 0.0 && p < 1.0) {
        return Err(RigError::Range(format!(
            "uniform p = {p} is outside (0, 1)"
        )));
    }
    Ok(AttributeProfile { probs: vec![p; m] })
}

/// Relative shape of a non-uniform profile before rescaling to the target `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum ProfileShape {
    Uniform,
    /// Squared weights decay geometrically: `p_w ∝ ratio^(w/2)`.
    Geometric {
        ratio: f64,
    },
    /// The first `round(fraction * m)` attributes get weight 1, the rest `ratio`.
    TwoLevel {
        fraction: f64,
        ratio: f64,
    },
}

impl ProfileShape {
    pub fn name(&self) -> String {
        match self {
            ProfileShape::Uniform => "uniform".to_string(),
            ProfileShape::Geometric { ratio } => format!("geometric({ratio})"),
            ProfileShape::TwoLevel { fraction, ratio } => format!("two-level({fraction};{ratio})"),
        }
    }

    fn weights(&self, m: usize) -> Result<Vec<f64>> {
        match *self {
            ProfileShape::Uniform => Ok(vec![1.0; m]),
            ProfileShape::Geometric { ratio } => {
                check_open_unit("geometric ratio", ratio)?;
                Ok((0..m).map(|w| ratio.powf(w as f64 / 2.0)).collect())
            }
            ProfileShape::TwoLevel { fraction, ratio } => {
                check_open_unit("two-level fraction", fraction)?;
                // ratio = 1 is the documented degenerate (uniform) case.
                if !(ratio > 0.0 && ratio <= 1.0) {
                    return Err(RigError::Range(format!(
                        "two-level ratio {ratio} outside (0, 1]"
                    )));
                }
                let high = ((fraction * m as f64).round() as usize).min(m);
                Ok((0..m).map(|w| if w < high { 1.0 } else { ratio }).collect())
            }
        }
    }
}

fn check_open_unit(what: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(RigError::Range(format!("{what} {x} outside (0, 1)")))
    }
}

/// Builds a profile with the given relative shape, rescaled so that
/// `n * sum(p_w^2) = c_target`.
pub fn make_weighted_profile(
    n: usize,
    m: usize,
    c_target: f64,
    shape: ProfileShape,
) -> Result<AttributeProfile> {
    if let ProfileShape::Uniform = shape {
        return make_uniform_profile(n, m, c_target);
    }
    if n < 1 || m < 1 {
        return Err(RigError::Size(format!(
            "need n >= 1 and m >= 1, got n={n}, m={m}"
        )));
    }
    if !(c_target.is_finite() && c_target > 0.0) {
        return Err(RigError::Range(format!(
            "c_target must be positive, got {c_target}"
        )));
    }
    let weights = shape.weights(m)?;
    let all_equal = weights.iter().all(|&x| x == weights[0]);
    if all_equal {
        return make_uniform_profile(n, m, c_target);
    }
    let norm: f64 = weights
        .iter()
        .map(|x| x * x)
        .collect::<CompensatedSum>()
        .value();
    let scale = (c_target / (n as f64 * norm)).sqrt();
    let probs: Vec<f64> = weights.iter().map(|x| x * scale).collect();
    check_entries(&probs).map_err(|e| match e {
        RigError::ProfileRange { index, value } => RigError::Range(format!(
            "rescaled entry p[{index}] = {value} is outside (0, 1)"
        )),
        other => other,
    })?;
    Ok(AttributeProfile { probs })
}
