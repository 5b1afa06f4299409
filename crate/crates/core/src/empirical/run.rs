use std::io;

use serde::{Deserialize, Serialize};

use super::optimizer::{po_update, PolicyOptimizer};
use super::ucb::{ucb_select, Arm, UcbConfig, UcbState};
use crate::bandit::{
    bon_policy, closed_form_policy, sample_index, PolicyTag, PreferenceDataset, DEFAULT_N_BON,
};
use crate::error::{Error, Result};
use crate::seed::RunSeed;
use crate::tpo::run::{csv_error, Episode};
use crate::tpo::{write_trace_csv, TraceRow};
use crate::{Instance, Policy, Reward};

/// How a source arm is played.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SourceRealization {
    /// The closed-form optimum of the source reward.
    Exact,
    /// Best-of-n over the current online policy, scored by the source reward.
    BestOfN { n: usize },
}

impl Default for SourceRealization {
    fn default() -> Self {
        SourceRealization::BestOfN { n: DEFAULT_N_BON }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalConfig {
    pub num_blocks: usize,
    pub block_size: usize,
    pub sources: Vec<Reward>,
    pub ucb: UcbConfig,
    pub realization: SourceRealization,
}

impl EmpiricalConfig {
    pub fn new(num_blocks: usize, block_size: usize, sources: Vec<Reward>) -> Self {
        Self {
            num_blocks,
            block_size,
            sources,
            ucb: UcbConfig::default(),
            realization: SourceRealization::default(),
        }
    }

    pub fn horizon(&self) -> usize {
        self.num_blocks * self.block_size
    }

    pub fn validate(&self, inst: &Instance) -> Result<()> {
        if self.num_blocks == 0 || self.block_size == 0 {
            return Err(Error::Config(
                "num_blocks and block_size must be positive".into(),
            ));
        }
        if !(self.ucb.c_ucb >= 0.0 && self.ucb.wr_self.is_finite()) {
            return Err(Error::Config(
                "c_ucb must be nonnegative and wr_self finite".into(),
            ));
        }
        if let SourceRealization::BestOfN { n: 0 } = self.realization {
            return Err(Error::Config("best-of-n needs n >= 1".into()));
        }
        for r in &self.sources {
            if r.dims() != inst.dims() {
                return Err(Error::DimensionMismatch {
                    expected: format!("{:?}", inst.dims()),
                    found: format!("{:?}", r.dims()),
                });
            }
        }
        Ok(())
    }
}

/// One inner step of the selection log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmSelection {
    pub block: usize,
    pub inner: usize,
    #[serde(serialize_with = "display_arm")]
    pub arm_tag: Arm,
    pub ucb_score: f64,
    pub y: bool,
}

fn display_arm<S: serde::Serializer>(arm: &Arm, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(arm)
}

#[derive(Debug, Clone)]
pub struct EmpiricalRunResult {
    pub regret_trace: Vec<TraceRow>,
    pub selections: Vec<ArmSelection>,
    /// UCB statistics at the end of each block, before the reset.
    pub block_stats: Vec<UcbState>,
    /// π^1_OL, ..., π^{K+1}_OL.
    pub block_policies: Vec<Policy>,
    pub final_policy: Policy,
    pub data: PreferenceDataset,
}

impl EmpiricalRunResult {
    pub fn cumulative_regret(&self) -> f64 {
        self.regret_trace.last().map_or(0.0, |r| r.cum_regret)
    }

    pub fn write_trace_csv<W: io::Write>(&self, out: W) -> Result<()> {
        write_trace_csv(&self.regret_trace, out)
    }

    pub fn write_selection_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.selections {
            w.serialize(row).map_err(csv_error)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }

    /// Fraction of inner steps of block `k` (1-based) that played each arm,
    /// sources first and the online arm last.
    pub fn block_shares(&self, k: usize) -> Vec<(Arm, f64)> {
        let Some(st) = k.checked_sub(1).and_then(|i| self.block_stats.get(i)) else {
            return Vec::new();
        };
        let total = st.total_count().max(1) as f64;
        (0..st.num_sources())
            .map(Arm::Source)
            .chain(std::iter::once(Arm::Online))
            .map(|a| (a, st.count(a) as f64 / total))
            .collect()
    }
}

/// Empirical transfer policy optimization. π^1_OL = π_ref; in every block
/// each step plays the UCB-selected arm against ã ∼ π^k_OL, and the block's
/// data then feeds one optimizer update. UCB statistics are block-scoped.
/// The optimizer's logits are reset to log π_ref before the first block.
pub fn empirical_tpo_run(
    cfg: &EmpiricalConfig,
    inst: &Instance,
    opt: &PolicyOptimizer,
    seed: impl Into<RunSeed>,
) -> Result<EmpiricalRunResult> {
    cfg.validate(inst)?;
    let mut opt = opt.clone();
    opt.set_logits(inst.pi_ref().as_slice().iter().map(|p| p.ln()).collect())?;
    let exact_sources = cfg
        .sources
        .iter()
        .map(|r| closed_form_policy(r, inst))
        .collect::<Result<Vec<_>>>()?;
    let mut ucb = UcbState::new(cfg.sources.len(), cfg.ucb);
    let mut ep = Episode::new(inst, seed.into());
    let mut selections = Vec::with_capacity(cfg.horizon());
    let mut block_stats = Vec::with_capacity(cfg.num_blocks);
    let mut block_policies = vec![opt.policy()?];
    let mut step = 0;
    for k in 1..=cfg.num_blocks {
        let pi_ol = block_policies.last().expect("initial policy").clone();
        let ol_regret = inst.regret(&pi_ol)?;
        let arm_policies: Vec<Policy> = match cfg.realization {
            SourceRealization::Exact => exact_sources.clone(),
            SourceRealization::BestOfN { n } => cfg
                .sources
                .iter()
                .map(|r| bon_policy(&pi_ol, r, n)?.distribution())
                .collect::<Result<_>>()?,
        };
        let arm_regrets = arm_policies
            .iter()
            .map(|p| inst.regret(p))
            .collect::<Result<Vec<_>>>()?;
        let mut block_data = PreferenceDataset::new();
        for n in 1..=cfg.block_size {
            step += 1;
            let (arm, score) = ucb_select(&ucb);
            let s = ep.draw_state();
            let (a, producer, regret, id) = match arm {
                Arm::Online => (
                    sample_index(pi_ol.row(s), &mut ep.agent),
                    PolicyTag::Online,
                    ol_regret,
                    None,
                ),
                Arm::Source(w) => {
                    let a = match cfg.realization {
                        SourceRealization::Exact => {
                            sample_index(arm_policies[w].row(s), &mut ep.agent)
                        }
                        SourceRealization::BestOfN { n } => {
                            bon_policy(&pi_ol, &cfg.sources[w], n)?.sample(s, &mut ep.agent)
                        }
                    };
                    (a, PolicyTag::Source(w), arm_regrets[w], Some(w))
                }
            };
            let at = sample_index(pi_ol.row(s), &mut ep.agent);
            let x = ep.label(s, a, at, producer, PolicyTag::Online);
            block_data.push(x);
            ucb.record(arm, x.y);
            ep.record(step, k, n, producer, id, regret);
            selections.push(ArmSelection {
                block: k,
                inner: n,
                arm_tag: arm,
                ucb_score: score,
                y: x.y,
            });
        }
        opt = po_update(&opt, inst.pi_ref(), &block_data)?;
        block_policies.push(opt.policy()?);
        block_stats.push(ucb.clone());
        ucb.reset();
    }
    Ok(EmpiricalRunResult {
        regret_trace: ep.trace,
        selections,
        block_stats,
        final_policy: block_policies.last().expect("final policy").clone(),
        block_policies,
        data: ep.data,
    })
}
