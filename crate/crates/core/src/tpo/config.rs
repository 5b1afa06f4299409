use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{EtaRule, FrankWolfeOptions, RpoMode};
use crate::{Instance, Reward};

/// Online learner driving the exploration steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OracleKind {
    /// Likelihood plus an exploration term that favors policies assigning
    /// low probability to the reference comparator responses.
    XpoLike { alpha_xpo: f64 },
    /// Greedy on value under the MLE reward plus a coverage bonus.
    OptimisticMle { c_ol: f64, delta: f64 },
}

/// Exploration weight of the default oracle.
pub const DEFAULT_ALPHA_XPO: f64 = 0.1;
/// Bonus coefficient of the optimistic-MLE preset.
pub const DEFAULT_C_OL: f64 = 0.05;

impl Default for OracleKind {
    fn default() -> Self {
        OracleKind::XpoLike {
            alpha_xpo: DEFAULT_ALPHA_XPO,
        }
    }
}

impl OracleKind {
    pub fn optimistic_mle() -> Self {
        OracleKind::OptimisticMle {
            c_ol: DEFAULT_C_OL,
            delta: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            OracleKind::XpoLike { alpha_xpo } if !(alpha_xpo >= 0.0 && alpha_xpo.is_finite()) => {
                Err(Error::Config(format!(
                    "alpha_xpo must be finite and >= 0, got {alpha_xpo}"
                )))
            }
            OracleKind::OptimisticMle { c_ol, delta }
                if !(c_ol >= 0.0 && delta > 0.0 && delta < 1.0) =>
            {
                Err(Error::Config(
                    "optimistic-mle needs c_ol >= 0 and delta in (0,1)".into(),
                ))
            }
            _ => Ok(()),
        }
    }
}

/// Configuration of a transfer policy optimization run.
#[derive(Debug, Clone)]
pub struct TpoConfig {
    /// Total iterations T.
    pub horizon: usize,
    /// Block size N; T must be a multiple of N.
    pub block_size: usize,
    /// Online fraction α ∈ (0,1). `None` uses e^{−R/β} clamped to [1/N, 1−1/N].
    pub alpha: Option<f64>,
    pub delta: f64,
    /// Constant c in the pessimism penalty 2c·e^{2R}·√(log(|Π|T/δ)/|D|).
    pub c_bonus: f64,
    /// Constant in the source bonus (constant)·e^{2R}·√(log(|Π|WT/δ)/N(w)).
    pub source_bonus: f64,
    pub sources: Vec<Reward>,
    pub oracle: OracleKind,
    pub eta: EtaRule,
    /// RPO mode used inside transfer selection.
    pub tps_mode: RpoMode,
    /// RPO mode for the returned policy.
    pub final_mode: RpoMode,
    /// Recompute transfer selection once per block instead of every step.
    pub cache_tps_per_block: bool,
    /// Replace the MLE reward by r* and drop bonuses (diagnostic).
    pub noise_free: bool,
    pub frank_wolfe: FrankWolfeOptions,
}

/// Source bonus constant used unless overridden.
pub const DEFAULT_SOURCE_BONUS: f64 = 16.0;

impl TpoConfig {
    pub fn new(horizon: usize, block_size: usize, sources: Vec<Reward>) -> Self {
        Self {
            horizon,
            block_size,
            alpha: None,
            delta: 0.1,
            c_bonus: 1.0,
            source_bonus: DEFAULT_SOURCE_BONUS,
            sources,
            oracle: OracleKind::default(),
            eta: EtaRule::default(),
            tps_mode: RpoMode::Enumerate,
            final_mode: RpoMode::Mixture,
            cache_tps_per_block: false,
            noise_free: false,
            frank_wolfe: FrankWolfeOptions::default(),
        }
    }

    pub fn num_blocks(&self) -> usize {
        self.horizon / self.block_size.max(1)
    }

    /// α after applying the default rule.
    pub fn resolved_alpha(&self, inst: &Instance) -> f64 {
        self.alpha.unwrap_or_else(|| {
            let n = self.block_size as f64;
            (-inst.r_max() / inst.beta())
                .exp()
                .clamp(1.0 / n, 1.0 - 1.0 / n)
        })
    }

    /// Number of online steps per block, ⌊αN⌋.
    pub fn online_steps(&self, inst: &Instance) -> usize {
        (self.resolved_alpha(inst) * self.block_size as f64 + 1e-9).floor() as usize
    }

    pub fn validate(&self, inst: &Instance) -> Result<()> {
        if self.horizon == 0 || self.block_size < 2 {
            return Err(Error::Config("need T >= 1 and N >= 2".into()));
        }
        if self.horizon % self.block_size != 0 {
            return Err(Error::Config(format!(
                "T = {} is not a multiple of N = {}",
                self.horizon, self.block_size
            )));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::Config(format!("alpha must lie in (0,1), got {a}")));
            }
        }
        if self.online_steps(inst) < 1 {
            return Err(Error::Config("alpha * N must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!(
                "delta must lie in (0,1), got {}",
                self.delta
            )));
        }
        if !(self.c_bonus >= 0.0 && self.source_bonus >= 0.0) {
            return Err(Error::Config("bonus constants must be nonnegative".into()));
        }
        for (w, r) in self.sources.iter().enumerate() {
            if r.dims() != inst.dims() || !r.within(inst.r_max()) {
                return Err(Error::Config(format!(
                    "source {w} must match the instance and lie in [0, r_max]"
                )));
            }
        }
        self.oracle.validate()
    }
}

/// Block coordinates of step τ (1-based): k = ⌈τ/N⌉ and n = ((τ−1) mod N) + 1.
pub fn block_indices(tau: usize, block_size: usize) -> (usize, usize) {
    (tau.div_ceil(block_size), (tau - 1) % block_size + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::{PolicyTable, RewardTable};

    fn inst(beta: f64) -> Instance {
        Instance::new(
            vec![1.0],
            PolicyTable::uniform(1, 2).unwrap(),
            beta,
            1.0,
            RewardTable::from_rows(&[vec![1.0, 0.0]]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn block_arithmetic() {
        assert_eq!(block_indices(1, 4), (1, 1));
        assert_eq!(block_indices(4, 4), (1, 4));
        assert_eq!(block_indices(5, 4), (2, 1));
        assert_eq!(block_indices(12, 4), (3, 4));
    }

    #[test]
    fn alpha_rules() {
        let i = inst(1.0);
        let mut cfg = TpoConfig::new(100, 10, vec![]);
        assert!((cfg.resolved_alpha(&i) - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(cfg.online_steps(&i), 3);
        assert!((cfg.resolved_alpha(&inst(0.01)) - 0.1).abs() < 1e-15);
        assert!((cfg.resolved_alpha(&inst(100.0)) - 0.9).abs() < 1e-15);
        cfg.alpha = Some(1.0);
        assert!(cfg.validate(&i).is_err());
        cfg.alpha = Some(0.5);
        assert!(cfg.validate(&i).is_ok());
        cfg.horizon = 95;
        assert!(cfg.validate(&i).is_err());
    }
}
