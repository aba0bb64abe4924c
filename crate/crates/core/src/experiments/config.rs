//! JSON configuration files.
//!
//! ```json
//! { "n": 5000, "m": 5000, "c": 2.0, "shape": "uniform", "shape_params": {},
//!   "s": 1, "seed": 42 }
//! ```
//!
//! `shape` is one of `uniform`, `geometric` (`shape_params.ratio`) or
//! `two-level` (`shape_params.fraction`, `shape_params.ratio`). Instead of
//! `m`/`c`/`shape`, a `profile` array of probabilities may be given.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RigError};
use crate::model::{make_weighted_profile, AttributeProfile, ProfileShape, RigConfig};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default = "default_shape")]
    pub shape: String,
    #[serde(default)]
    pub shape_params: ShapeParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Vec<f64>>,
    #[serde(default = "default_s")]
    pub s: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_shape() -> String {
    "uniform".to_string()
}

fn default_s() -> usize {
    1
}

pub fn parse_shape(name: &str, params: &ShapeParams) -> Result<ProfileShape> {
    let need = |v: Option<f64>, what: &str| {
        v.ok_or_else(|| RigError::Input(format!("shape {name:?} needs shape_params.{what}")))
    };
    match name {
        "uniform" => Ok(ProfileShape::Uniform),
        "geometric" => Ok(ProfileShape::Geometric {
            ratio: need(params.ratio, "ratio")?,
        }),
        "two-level" | "two_level" => Ok(ProfileShape::TwoLevel {
            fraction: need(params.fraction, "fraction")?,
            ratio: need(params.ratio, "ratio")?,
        }),
        other => Err(RigError::Input(format!("unknown shape {other:?}"))),
    }
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| RigError::Parse(e.to_string()))
    }

    /// Reads a file, or parses the argument itself when it looks like inline JSON.
    pub fn load(arg: &str) -> Result<Self> {
        Self::from_json(&read_json_arg(arg)?)
    }

    pub fn profile(&self) -> Result<AttributeProfile> {
        if let Some(probs) = &self.profile {
            if self.m.is_some_and(|m| m != probs.len()) {
                return Err(RigError::Input(
                    "m disagrees with the explicit profile length".into(),
                ));
            }
            return AttributeProfile::new(probs.clone());
        }
        let m = self
            .m
            .ok_or_else(|| RigError::Input("config needs m (or an explicit profile)".into()))?;
        let c = self
            .c
            .ok_or_else(|| RigError::Input("config needs c (or an explicit profile)".into()))?;
        make_weighted_profile(self.n, m, c, parse_shape(&self.shape, &self.shape_params)?)
    }

    pub fn to_config(&self) -> Result<RigConfig> {
        RigConfig::new(self.n, self.profile()?, self.s, self.seed)
    }
}

pub fn read_json_arg(arg: &str) -> Result<String> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(Path::new(arg))
        .map_err(|e| RigError::Input(format!("cannot read {arg}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_config() {
        let cf = ConfigFile::from_json(r#"{"n":100,"m":25,"c":1.0,"seed":7}"#).unwrap();
        let cfg = cf.to_config().unwrap();
        assert_eq!((cfg.n, cfg.m(), cfg.s, cfg.seed), (100, 25, 1, 7));
        assert!((cfg.profile.probs()[0] - 0.02).abs() < 1e-15);
    }

    #[test]
    fn shaped_and_explicit() {
        let cf = ConfigFile::from_json(
            r#"{"n":100,"m":10,"c":1.5,"shape":"two-level","shape_params":{"fraction":0.5,"ratio":0.25},"s":2}"#,
        )
        .unwrap();
        let p = cf.profile().unwrap();
        assert!((100.0 * p.sum_squares() - 1.5).abs() < 1e-12);
        assert!((p.probs()[9] / p.probs()[0] - 0.25).abs() < 1e-12);

        let cf = ConfigFile::from_json(r#"{"n":3,"profile":[0.5,0.25]}"#).unwrap();
        assert_eq!(cf.profile().unwrap().probs(), &[0.5, 0.25]);
        let cf = ConfigFile::from_json(r#"{"n":3,"profile":[0.5,1.0]}"#).unwrap();
        assert!(matches!(cf.profile(), Err(RigError::ProfileRange { .. })));
    }

    #[test]
    fn config_errors() {
        assert!(ConfigFile::from_json(r#"{"n":10,"m":3}"#)
            .unwrap()
            .profile()
            .is_err());
        assert!(
            ConfigFile::from_json(r#"{"n":10,"m":3,"c":1,"shape":"zipf"}"#)
                .unwrap()
                .profile()
                .is_err()
        );
        assert!(
            ConfigFile::from_json(r#"{"n":10,"m":3,"c":1,"shape":"geometric"}"#)
                .unwrap()
                .profile()
                .is_err()
        );
        assert!(ConfigFile::from_json(r#"{"n":10,"bogus":1}"#).is_err());
        assert!(ConfigFile::from_json(r#"{"n":0,"m":3,"c":1}"#)
            .unwrap()
            .to_config()
            .is_err());
    }
}
