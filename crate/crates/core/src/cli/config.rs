//! Harness configuration: a versioned TOML file, fully validated before any
//! run. Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::drive::{DriveSet, QubitDrive};
use crate::error::{Error, Result};
use crate::qstate::QubitCount;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessConfig {
    pub schema_version: u32,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    pub drive: DriveConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genrho: Option<GenRhoConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tomo: Option<TomoConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub purity: Option<PurityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limited: Option<LimitedConfig>,
}

/// Per-qubit drive parameters, or the sweet-spot shorthand that sets
/// `g = sqrt(2) nu`, `phi = 0` at unit Rabi frequency for every qubit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    #[serde(default)]
    pub sweet_spot: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    /// "file" or "generator"
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenRhoConfig {
    pub n_list: Vec<usize>,
    pub mu_list: Vec<f64>,
    /// Matrices per (mu, method) cell.
    pub per_cell: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomoConfig {
    pub n_list: Vec<usize>,
    pub mu_list: Vec<f64>,
    pub matrices_per_generator: usize,
    pub n_unitaries: usize,
    /// The two shot budgets used to separate the per-unitary and per-shot
    /// variance components.
    pub shots_low: usize,
    pub shots_high: usize,
    pub trials: usize,
    pub window: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PurityConfig {
    pub n_list: Vec<usize>,
    pub mu_list: Vec<f64>,
    pub matrices_per_generator: usize,
    pub n_unitaries: usize,
    pub shots_per_unitary: usize,
    pub trials: usize,
    pub window: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitedConfig {
    /// Any of "ladder", "random".
    pub modes: Vec<String>,
    pub n_min: usize,
    pub n_max: usize,
    pub seeds: usize,
    #[serde(default = "default_base")]
    pub base: u32,
    #[serde(default = "default_lambda0")]
    pub lambda0: f64,
    /// Common additive offset applied to random frequencies.
    #[serde(default)]
    pub offset: f64,
}

fn default_base() -> u32 {
    3
}

fn default_lambda0() -> f64 {
    1.0
}

impl HarnessConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: HarnessConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Stable hash of the canonical serialized form, for provenance headers.
    pub fn provenance_hash(&self) -> u64 {
        crate::stats::fnv1a(self.to_toml().as_bytes())
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.drive.validate()?;
        if let Some(s) = &self.state {
            s.validate()?;
        }
        if let Some(g) = &self.genrho {
            if g.n_list.is_empty() || g.mu_list.is_empty() || g.per_cell == 0 {
                return Err(Error::Config("genrho lists must be nonempty".into()));
            }
            for &n in &g.n_list {
                QubitCount::new(n)?;
            }
        }
        if let Some(t) = &self.tomo {
            if t.n_list.is_empty() || t.mu_list.is_empty() {
                return Err(Error::Config("tomo lists must be nonempty".into()));
            }
            for &n in &t.n_list {
                QubitCount::new(n)?;
                self.drive.check_matches(n)?;
            }
            if t.shots_low == 0 || t.shots_high <= t.shots_low {
                return Err(Error::Config(
                    "tomo needs 0 < shots_low < shots_high".into(),
                ));
            }
            if t.n_unitaries < 2 || t.trials < 2 {
                return Err(Error::Config("tomo needs n_unitaries >= 2 and trials >= 2".into()));
            }
            if t.window.is_nan() || t.window <= 0.0 {
                return Err(Error::Config("tomo window must be positive".into()));
            }
        }
        if let Some(p) = &self.purity {
            if p.n_list.is_empty() || p.mu_list.is_empty() {
                return Err(Error::Config("purity lists must be nonempty".into()));
            }
            for &n in &p.n_list {
                QubitCount::new(n)?;
                self.drive.check_matches(n)?;
            }
            if p.n_unitaries < 2 || p.trials < 2 || p.shots_per_unitary == 0 {
                return Err(Error::Config(
                    "purity needs n_unitaries >= 2, trials >= 2, shots >= 1".into(),
                ));
            }
            if p.window.is_nan() || p.window <= 0.0 {
                return Err(Error::Config("purity window must be positive".into()));
            }
        }
        if let Some(l) = &self.limited {
            if l.modes.is_empty() {
                return Err(Error::Config("limited.modes must be nonempty".into()));
            }
            for m in &l.modes {
                if m != "ladder" && m != "random" {
                    return Err(Error::Config(format!("unknown limited mode {m:?}")));
                }
            }
            if l.n_min == 0 || l.n_max < l.n_min || l.n_max > QubitCount::MAX {
                return Err(Error::Config("limited n range invalid".into()));
            }
            if l.seeds == 0 || l.base < 2 || l.lambda0.is_nan() || l.lambda0 <= 0.0 {
                return Err(Error::Config("limited needs seeds >= 1, base >= 2, lambda0 > 0".into()));
            }
        }
        Ok(())
    }
}

impl DriveConfig {
    pub fn sweet() -> Self {
        DriveConfig { sweet_spot: true, g: None, nu: None, phi: None }
    }

    fn validate(&self) -> Result<()> {
        if self.sweet_spot {
            if self.g.is_some() || self.nu.is_some() || self.phi.is_some() {
                return Err(Error::Config(
                    "drive.sweet_spot excludes explicit g/nu/phi".into(),
                ));
            }
            return Ok(());
        }
        let g = self.g.as_ref().ok_or_else(|| Error::Config("drive.g required".into()))?;
        let nu = self.nu.as_ref().ok_or_else(|| Error::Config("drive.nu required".into()))?;
        if g.len() != nu.len() || g.is_empty() {
            return Err(Error::Config("drive.g and drive.nu must match and be nonempty".into()));
        }
        if let Some(phi) = &self.phi {
            if phi.len() != g.len() {
                return Err(Error::Config("drive.phi length must match drive.g".into()));
            }
        }
        // constructor-level validation
        self.build(g.len())?;
        Ok(())
    }

    fn check_matches(&self, n: usize) -> Result<()> {
        if !self.sweet_spot {
            let len = self.g.as_ref().map(|g| g.len()).unwrap_or(0);
            if len != n {
                return Err(Error::Config(format!(
                    "explicit drive block has {len} qubits but the sweep asks for {n}"
                )));
            }
        }
        Ok(())
    }

    /// Drive set for an `n`-qubit run.
    pub fn build(&self, n: usize) -> Result<DriveSet> {
        let n_checked = QubitCount::new(n)?;
        if self.sweet_spot {
            return Ok(DriveSet::sweet_spot(n_checked));
        }
        let g = self.g.as_ref().ok_or_else(|| Error::Config("drive.g required".into()))?;
        let nu = self.nu.as_ref().ok_or_else(|| Error::Config("drive.nu required".into()))?;
        if g.len() != n {
            return Err(Error::Config(format!(
                "drive block has {} qubits, run needs {n}",
                g.len()
            )));
        }
        let phi = self.phi.clone().unwrap_or_else(|| vec![0.0; n]);
        let drives: Result<Vec<QubitDrive>> = g
            .iter()
            .zip(nu.iter())
            .zip(phi.iter())
            .map(|((&g, &nu), &phi)| QubitDrive::new(g, nu, phi))
            .collect();
        DriveSet::new(drives?)
    }
}

impl StateConfig {
    fn validate(&self) -> Result<()> {
        match self.source.as_str() {
            "file" => {
                if self.path.is_none() {
                    return Err(Error::Config("state.source = \"file\" needs state.path".into()));
                }
            }
            "generator" => {
                let gen = self
                    .generator
                    .as_deref()
                    .ok_or_else(|| Error::Config("state.generator required".into()))?;
                if !matches!(gen, "geometric" | "uniform" | "traced") {
                    return Err(Error::Config(format!("unknown generator {gen:?}")));
                }
                if self.mu.is_none() {
                    return Err(Error::Config("state.mu required for generators".into()));
                }
            }
            other => {
                return Err(Error::Config(format!("unknown state.source {other:?}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
schema_version = 1
seed = 7

[drive]
sweet_spot = true

[genrho]
n_list = [2, 3]
mu_list = [0.2, 0.5]
per_cell = 2

[limited]
modes = ["ladder", "random"]
n_min = 2
n_max = 5
seeds = 20
"#;

    #[test]
    fn parses_and_roundtrips() {
        let cfg = HarnessConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.seed, 7);
        let text = cfg.to_toml();
        let back = HarnessConfig::parse(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.provenance_hash(), back.provenance_hash());
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = format!("{SAMPLE}\n[extra]\nfoo = 1\n");
        assert!(HarnessConfig::parse(&bad).is_err());
        let bad2 = SAMPLE.replace("seed = 7", "seed = 7\nbogus = true");
        assert!(HarnessConfig::parse(&bad2).is_err());
    }

    #[test]
    fn rejects_wrong_schema_version() {
        let bad = SAMPLE.replace("schema_version = 1", "schema_version = 99");
        assert!(matches!(HarnessConfig::parse(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn sweet_spot_excludes_explicit() {
        let bad = SAMPLE.replace("sweet_spot = true", "sweet_spot = true\ng = [1.0]");
        assert!(HarnessConfig::parse(&bad).is_err());
    }

    #[test]
    fn explicit_drive_builds() {
        let text = r#"
schema_version = 1
seed = 1

[drive]
g = [1.4142135623730951]
nu = [1.0]
"#;
        let cfg = HarnessConfig::parse(text).unwrap();
        let ds = cfg.drive.build(1).unwrap();
        assert!((ds.qubit(0).s_param()).abs() < 1e-12);
        assert!(cfg.drive.build(2).is_err());
    }
}
