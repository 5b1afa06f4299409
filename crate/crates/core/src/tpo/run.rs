use std::io;

use rand::Rng;
use serde::Serialize;

use crate::bandit::{
    bt_prob, policy_value, sample_index, sample_label, PolicyTag, PreferenceDataset,
    PreferenceSample,
};
use crate::error::{Error, Result};
use crate::estimation::{RpoMode, RpoSolution};
use crate::seed::{rng_from_seed, RunSeed};
use crate::{Class, Instance, Policy};

use super::config::{block_indices, OracleKind, TpoConfig};
use super::oracle::make_oracle;
use super::tps::{TpsEngine, TransferChoice, TransferKind};

/// One executed step.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub block: usize,
    pub inner: usize,
    pub tag: PolicyTag,
    /// Class id (online and distilled steps) or source index.
    pub policy_id: Option<usize>,
    pub inst_regret: f64,
    pub cum_regret: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionEntry {
    pub step: usize,
    pub block: usize,
    pub inner: usize,
    pub choice: TransferChoice,
}

/// Serializable view of a [`SelectionEntry`]; infinite estimates become null.
#[derive(Debug, Clone, Serialize)]
pub struct SelectionRecord {
    pub step: usize,
    pub block: usize,
    pub inner: usize,
    pub kind: TransferKind,
    pub source_id: Option<usize>,
    pub member_id: Option<usize>,
    pub estimated_values: Vec<(String, Option<f64>)>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub regret_trace: Vec<TraceRow>,
    pub selection_log: Vec<SelectionEntry>,
    pub final_policy: Policy,
    pub final_solution: Option<RpoSolution<f64>>,
    pub data: PreferenceDataset,
}

impl RunResult {
    pub fn cumulative_regret(&self) -> f64 {
        self.regret_trace.last().map_or(0.0, |r| r.cum_regret)
    }

    /// CSV with header step,block,inner,policy_kind,policy_id,inst_regret,cum_regret.
    pub fn write_trace_csv<W: io::Write>(&self, out: W) -> Result<()> {
        write_trace_csv(&self.regret_trace, out)
    }

    pub fn selection_records(&self) -> Vec<SelectionRecord> {
        self.selection_log
            .iter()
            .map(|e| SelectionRecord {
                step: e.step,
                block: e.block,
                inner: e.inner,
                kind: e.choice.kind,
                source_id: e.choice.source_id,
                member_id: e.choice.member_id,
                estimated_values: e
                    .choice
                    .estimated_values
                    .iter()
                    .map(|(t, v)| (t.to_string(), v.is_finite().then_some(*v)))
                    .collect(),
            })
            .collect()
    }
}

/// Writes regret-trace rows as CSV with a header row.
pub fn write_trace_csv<W: io::Write>(rows: &[TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "step",
        "block",
        "inner",
        "policy_kind",
        "policy_id",
        "inst_regret",
        "cum_regret",
    ])
    .map_err(csv_error)?;
    for r in rows {
        w.write_record([
            r.step.to_string(),
            r.block.to_string(),
            r.inner.to_string(),
            r.tag.kind().to_string(),
            r.policy_id.map(|i| i.to_string()).unwrap_or_default(),
            r.inst_regret.to_string(),
            r.cum_regret.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Shared bookkeeping for one run: environment and agent streams, data
/// collection and exact regret accounting.
pub(crate) struct Episode<'a, R: Rng> {
    inst: &'a Instance,
    env: R,
    pub agent: R,
    pub data: PreferenceDataset,
    pub trace: Vec<TraceRow>,
    cum: f64,
}

impl<'a> Episode<'a, rand_chacha::ChaCha8Rng> {
    pub fn new(inst: &'a Instance, seed: RunSeed) -> Self {
        Self {
            inst,
            env: rng_from_seed(seed.env),
            agent: rng_from_seed(seed.agent),
            data: PreferenceDataset::new(),
            trace: Vec::new(),
            cum: 0.0,
        }
    }
}

impl<R: Rng> Episode<'_, R> {
    /// Draws s ∼ ρ from the environment stream.
    pub fn draw_state(&mut self) -> usize {
        sample_index(self.inst.rho(), &mut self.env)
    }

    /// Labels (s, a, ã) under the BT model of r* and appends it to the data.
    pub fn label(
        &mut self,
        s: usize,
        a: usize,
        a_tilde: usize,
        producer: PolicyTag,
        comparator: PolicyTag,
    ) -> PreferenceSample {
        let y = sample_label(bt_prob(self.inst.r_star(), s, a, a_tilde), &mut self.agent);
        let x = PreferenceSample {
            s,
            a,
            a_tilde,
            y,
            producer,
            comparator,
        };
        self.data.push(x);
        x
    }

    /// Collects one comparison of `pi` against `comparator`.
    pub fn collect(
        &mut self,
        pi: &Policy,
        producer: PolicyTag,
        comparator_policy: &Policy,
        comparator: PolicyTag,
    ) -> PreferenceSample {
        let s = self.draw_state();
        let a = sample_index(pi.row(s), &mut self.agent);
        let at = sample_index(comparator_policy.row(s), &mut self.agent);
        self.label(s, a, at, producer, comparator)
    }

    /// Appends a trace row; rounding noise below zero is clipped.
    pub fn record(
        &mut self,
        step: usize,
        block: usize,
        inner: usize,
        tag: PolicyTag,
        policy_id: Option<usize>,
        regret: f64,
    ) {
        let regret = regret.max(0.0);
        self.cum += regret;
        self.trace.push(TraceRow {
            step,
            block,
            inner,
            tag,
            policy_id,
            inst_regret: regret,
            cum_regret: self.cum,
        });
    }
}

/// Per-member regrets, computed once.
pub(crate) fn member_regrets(cls: &Class, inst: &Instance) -> Result<Vec<f64>> {
    cls.policies()
        .map(|p| Ok(inst.optimal_value() - policy_value(p, inst.r_star(), inst)?))
        .collect()
}

/// Transfer policy optimization. Each block of N steps starts with ⌊αN⌋
/// online-oracle steps trained on online data only, followed by transfer
/// steps chosen by [`TpsEngine`] on all data; every step compares against
/// π_ref. The returned policy is RPO on all collected data.
pub fn tpo_run(
    cfg: &TpoConfig,
    cls: &Class,
    inst: &Instance,
    seed: impl Into<RunSeed>,
) -> Result<RunResult> {
    cfg.validate(inst)?;
    cls.ensure_nonempty()?;
    let seed = seed.into();
    let online_steps = cfg.online_steps(inst);
    let regrets = member_regrets(cls, inst)?;
    let ref_regret = inst.regret(inst.pi_ref())?;
    let mut oracle = make_oracle(cfg.oracle, cls, inst)?;
    let mut tps = TpsEngine::new(cfg, cls, inst)?;
    let source_regrets = tps
        .source_policies()
        .iter()
        .map(|p| inst.regret(p))
        .collect::<Result<Vec<_>>>()?;
    let mut ep = Episode::new(inst, seed);
    let mut selection_log = Vec::new();
    let mut cached: Option<TransferChoice> = None;
    for tau in 1..=cfg.horizon {
        let (k, n) = block_indices(tau, cfg.block_size);
        if n == 1 {
            cached = None;
        }
        if n <= online_steps {
            let proposal = oracle.propose()?;
            let (pi, id, regret, tag) = match proposal {
                Some(i) => (
                    cls.policy(i),
                    Some(cls.id(i)),
                    regrets[i],
                    PolicyTag::Online,
                ),
                None => (inst.pi_ref(), None, ref_regret, PolicyTag::Reference),
            };
            let x = ep.collect(pi, PolicyTag::Online, inst.pi_ref(), PolicyTag::Reference);
            oracle.observe(&x, pi);
            tps.observe(&x);
            ep.record(tau, k, n, tag, id, regret);
        } else {
            let choice = match (&cached, cfg.cache_tps_per_block) {
                (Some(c), true) => c.clone(),
                _ => tps.select()?,
            };
            let tag = choice.tag();
            let regret = match choice.kind {
                TransferKind::Source => source_regrets[choice.source_id.expect("source id")],
                TransferKind::Distilled => inst.regret(&choice.chosen_policy)?,
            };
            let id = choice.source_id.or(choice.member_id);
            let x = ep.collect(
                &choice.chosen_policy,
                tag,
                inst.pi_ref(),
                PolicyTag::Reference,
            );
            tps.observe(&x);
            ep.record(tau, k, n, tag, id, regret);
            if cfg.cache_tps_per_block {
                cached = Some(choice.clone());
            }
            selection_log.push(SelectionEntry {
                step: tau,
                block: k,
                inner: n,
                choice,
            });
        }
    }
    let (sol, _, _) = tps.distill(cfg.final_mode)?;
    Ok(RunResult {
        regret_trace: ep.trace,
        selection_log,
        final_policy: sol.pi_dstl.clone(),
        final_solution: Some(sol),
        data: ep.data,
    })
}

/// Baseline that runs the online oracle at every step. The final policy is
/// the oracle's last proposal.
pub fn online_only_run(
    horizon: usize,
    oracle_kind: OracleKind,
    cls: &Class,
    inst: &Instance,
    seed: impl Into<RunSeed>,
) -> Result<RunResult> {
    if horizon == 0 {
        return Err(Error::Config("horizon must be positive".into()));
    }
    let regrets = member_regrets(cls, inst)?;
    let ref_regret = inst.regret(inst.pi_ref())?;
    let mut oracle = make_oracle(oracle_kind, cls, inst)?;
    let mut ep = Episode::new(inst, seed.into());
    for tau in 1..=horizon {
        let (pi, id, regret, tag) = match oracle.propose()? {
            Some(i) => (
                cls.policy(i),
                Some(cls.id(i)),
                regrets[i],
                PolicyTag::Online,
            ),
            None => (inst.pi_ref(), None, ref_regret, PolicyTag::Reference),
        };
        let x = ep.collect(pi, PolicyTag::Online, inst.pi_ref(), PolicyTag::Reference);
        oracle.observe(&x, pi);
        ep.record(tau, 1, tau, tag, id, regret);
    }
    let final_policy = match oracle.propose()? {
        Some(i) => cls.policy(i).clone(),
        None => inst.pi_ref().clone(),
    };
    Ok(RunResult {
        regret_trace: ep.trace,
        selection_log: Vec::new(),
        final_policy,
        final_solution: None,
        data: ep.data,
    })
}

/// Baseline that plays a fixed policy at every step.
pub fn fixed_policy_run(
    policy: &Policy,
    tag: PolicyTag,
    policy_id: Option<usize>,
    horizon: usize,
    inst: &Instance,
    seed: impl Into<RunSeed>,
) -> Result<RunResult> {
    let regret = inst.regret(policy)?.max(0.0);
    let mut ep = Episode::new(inst, seed.into());
    for tau in 1..=horizon {
        ep.collect(policy, tag, inst.pi_ref(), PolicyTag::Reference);
        ep.record(tau, 1, tau, tag, policy_id, regret);
    }
    Ok(RunResult {
        regret_trace: ep.trace,
        selection_log: Vec::new(),
        final_policy: policy.clone(),
        final_solution: None,
        data: ep.data,
    })
}

/// Distills a policy from arbitrary data with the configured η and mode.
pub fn distill(
    data: &PreferenceDataset,
    cfg: &TpoConfig,
    cls: &Class,
    inst: &Instance,
    mode: RpoMode,
) -> Result<RpoSolution<f64>> {
    let mut engine = TpsEngine::new(cfg, cls, inst)?;
    data.iter().for_each(|x| engine.observe(x));
    Ok(engine.distill(mode)?.0)
}
