use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use kltransfer_core::empirical::{PoKind, SourceRealization, UcbConfig};
use kltransfer_core::estimation::{EtaRule, RpoMode};
use kltransfer_core::tpo::{OracleKind, DEFAULT_SOURCE_BONUS};

use crate::error::{io_err, HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub num_states: usize,
    pub num_actions: usize,
    pub beta: f64,
    pub r_max: f64,
    /// Random members added to the class besides π* and π_ref.
    #[serde(default = "default_class_size")]
    pub class_size: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_class_size() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    /// Target value gaps Δ(w) as fractions of r_max, one per source.
    pub deltas: Vec<f64>,
}

/// Inputs of the instance generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub instance: InstanceSpec,
    #[serde(default)]
    pub sources: SourceSpec,
}

impl GeneratorSpec {
    /// Reads the `instance` and `sources` sections of a JSON file; other
    /// fields (as in a full experiment config) are ignored.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let spec: Self = serde_json::from_str(&text).map_err(|source| HarnessError::Json {
            path: path.display().to_string(),
            source,
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let i = &self.instance;
        if i.num_states == 0 || i.num_actions < 2 {
            return Err(HarnessError::Validation(
                "need at least one state and two actions".into(),
            ));
        }
        if !(i.beta > 0.0 && i.beta.is_finite() && i.r_max > 0.0 && i.r_max.is_finite()) {
            return Err(HarnessError::Validation(
                "beta and r_max must be positive and finite".into(),
            ));
        }
        if let Some(d) = self
            .sources
            .deltas
            .iter()
            .find(|d| !(0.0..=1.0).contains(*d))
        {
            return Err(HarnessError::Validation(format!(
                "delta target {d} is outside [0, 1]"
            )));
        }
        Ok(())
    }
}

/// Roster entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Tpo,
    EmpiricalTpo,
    OnlineOnly,
    TransferFixed(usize),
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Tpo => f.write_str("tpo"),
            Algorithm::EmpiricalTpo => f.write_str("empirical-tpo"),
            Algorithm::OnlineOnly => f.write_str("online-only"),
            Algorithm::TransferFixed(w) => write!(f, "transfer-fixed:{w}"),
        }
    }
}

impl FromStr for Algorithm {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tpo" => Ok(Algorithm::Tpo),
            "empirical-tpo" => Ok(Algorithm::EmpiricalTpo),
            "online-only" => Ok(Algorithm::OnlineOnly),
            _ => s
                .strip_prefix("transfer-fixed:")
                .and_then(|w| w.parse().ok())
                .map(Algorithm::TransferFixed)
                .ok_or_else(|| HarnessError::Validation(format!("unknown algorithm {s:?}"))),
        }
    }
}

impl Serialize for Algorithm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Algorithm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Overrides for the transfer algorithm; unset fields keep library defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TpoSettings {
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub c_bonus: Option<f64>,
    pub source_bonus: Option<f64>,
    pub oracle: Option<OracleKind>,
    pub eta: Option<EtaRule>,
    pub tps_mode: Option<RpoMode>,
    pub final_mode: Option<RpoMode>,
    #[serde(default)]
    pub cache_tps_per_block: bool,
}

impl TpoSettings {
    pub fn source_bonus(&self) -> f64 {
        self.source_bonus.unwrap_or(DEFAULT_SOURCE_BONUS)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmpiricalSettings {
    pub optimizer: PoKind,
    pub learning_rate: f64,
    pub steps: usize,
    /// Loss temperature; defaults to the instance β.
    pub beta_po: Option<f64>,
    pub alpha_xpo: f64,
    pub ucb: UcbConfig,
    pub realization: SourceRealization,
}

impl Default for EmpiricalSettings {
    fn default() -> Self {
        Self {
            optimizer: PoKind::Dpo,
            learning_rate: 1.0,
            steps: 300,
            beta_po: None,
            alpha_xpo: 0.0,
            ucb: UcbConfig::experiment(),
            realization: SourceRealization::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    #[serde(default)]
    pub sources: SourceSpec,
    /// Load a previously generated instance instead of generating one.
    #[serde(default)]
    pub instance_file: Option<PathBuf>,
    pub roster: Vec<Algorithm>,
    pub horizon: usize,
    pub block_size: usize,
    /// K; must equal horizon / block_size when given.
    #[serde(default)]
    pub num_blocks: Option<usize>,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub tpo: TpoSettings,
    #[serde(default)]
    pub empirical: EmpiricalSettings,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|source| HarnessError::Json {
            path: path.display().to_string(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn generator_spec(&self) -> GeneratorSpec {
        GeneratorSpec {
            instance: self.instance.clone(),
            sources: self.sources.clone(),
        }
    }

    pub fn num_blocks(&self) -> usize {
        self.horizon / self.block_size.max(1)
    }

    pub fn validate(&self) -> Result<()> {
        self.generator_spec().validate()?;
        let bad = |m: String| Err(HarnessError::Validation(m));
        if self.roster.is_empty() {
            return bad("roster is empty".into());
        }
        if self.trials == 0 {
            return bad("need at least one trial".into());
        }
        if self.horizon == 0 || self.block_size == 0 || self.horizon % self.block_size != 0 {
            return bad(format!(
                "horizon {} must be a positive multiple of block_size {}",
                self.horizon, self.block_size
            ));
        }
        if let Some(k) = self.num_blocks {
            if k != self.num_blocks() {
                return bad(format!(
                    "num_blocks {k} disagrees with horizon / block_size = {}",
                    self.num_blocks()
                ));
            }
        }
        let w = self.sources.deltas.len();
        for a in &self.roster {
            if let Algorithm::TransferFixed(i) = a {
                if self.instance_file.is_none() && *i >= w {
                    return bad(format!("{a} refers to a missing source (W = {w})"));
                }
            }
        }
        let e = &self.empirical;
        if !(e.learning_rate > 0.0 && e.beta_po.is_none_or(|b| b > 0.0)) {
            return bad("empirical learning_rate and beta_po must be positive".into());
        }
        Ok(())
    }
}
