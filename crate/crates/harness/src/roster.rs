use std::path::Path;

use log::info;
use serde::{Deserialize, Serialize};

use kltransfer_core::bandit::{
    closed_form_policy, win_rate, InstanceBundle, InstanceDocument, PolicyTag,
};
use kltransfer_core::empirical::{
    empirical_tpo_run, ArmSelection, EmpiricalConfig, PolicyOptimizer,
};
use kltransfer_core::seed::RunSeed;
use kltransfer_core::tpo::{
    fixed_policy_run, online_only_run, tpo_run, OracleKind, TpoConfig, TraceRow,
};
use kltransfer_core::Policy;

use crate::config::{Algorithm, ExperimentConfig};
use crate::error::{io_err, HarnessError, Result};
use crate::generate::generate_instance;

/// One algorithm in one trial.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub algorithm: Algorithm,
    pub trial: usize,
    pub trace: Vec<TraceRow>,
    pub final_policy: Policy,
    pub empirical_selections: Vec<ArmSelection>,
}

impl TrialOutcome {
    pub fn cumulative_regret(&self) -> f64 {
        self.trace.last().map_or(0.0, |r| r.cum_regret)
    }
}

/// Flat per-step trace row across algorithms and trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub algorithm: String,
    pub trial: usize,
    pub step: usize,
    pub block: usize,
    pub inner: usize,
    pub policy_kind: String,
    pub policy_id: Option<usize>,
    pub inst_regret: f64,
    pub cum_regret: f64,
}

/// Exact win rate of one final policy over another in the same trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinRateRecord {
    pub trial: usize,
    pub policy: String,
    pub opponent: String,
    pub win_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub algorithm: String,
    pub trial: usize,
    pub cum_regret: f64,
    pub final_regret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalSelectionRecord {
    pub trial: usize,
    pub block: usize,
    pub inner: usize,
    pub arm_tag: String,
    pub ucb_score: f64,
    pub y: bool,
}

/// Raw results of a roster run; everything the report is built from.
#[derive(Debug, Clone, Default)]
pub struct RawResults {
    pub traces: Vec<TraceRecord>,
    pub win_rates: Vec<WinRateRecord>,
    pub summaries: Vec<SummaryRecord>,
}

pub const TRACES_CSV: &str = "traces.csv";
pub const WIN_RATES_CSV: &str = "win_rates.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const EMPIRICAL_SELECTIONS_CSV: &str = "empirical_selections.csv";
pub const INSTANCE_JSON: &str = "instance.json";
pub const FINAL_POLICIES_JSON: &str = "final_policies.json";

/// The configured instance: loaded from `instance_file` or generated from
/// the instance spec and its seed.
pub fn load_or_generate(cfg: &ExperimentConfig) -> Result<InstanceBundle> {
    match &cfg.instance_file {
        Some(path) => read_instance(path),
        None => generate_instance(&cfg.generator_spec(), cfg.instance.seed),
    }
}

pub fn read_instance(path: &Path) -> Result<InstanceBundle> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let doc: InstanceDocument =
        serde_json::from_str(&text).map_err(|source| HarnessError::Json {
            path: path.display().to_string(),
            source,
        })?;
    Ok(doc.to_bundle()?)
}

pub fn write_instance(bundle: &InstanceBundle, path: &Path) -> Result<()> {
    let doc = InstanceDocument::from_parts(&bundle.instance, &bundle.sources, &bundle.class);
    write_json(&doc, path)
}

pub(crate) fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| HarnessError::Json {
        path: path.display().to_string(),
        source,
    })?;
    std::fs::write(path, text + "\n").map_err(io_err(path))
}

/// Transfer configuration with the experiment's overrides applied.
pub fn tpo_config(cfg: &ExperimentConfig, bundle: &InstanceBundle) -> TpoConfig {
    let s = &cfg.tpo;
    let mut t = TpoConfig::new(cfg.horizon, cfg.block_size, bundle.sources.clone());
    t.alpha = s.alpha;
    if let Some(d) = s.delta {
        t.delta = d;
    }
    if let Some(c) = s.c_bonus {
        t.c_bonus = c;
    }
    t.source_bonus = s.source_bonus();
    if let Some(o) = s.oracle {
        t.oracle = o;
    }
    if let Some(e) = s.eta {
        t.eta = e;
    }
    if let Some(m) = s.tps_mode {
        t.tps_mode = m;
    }
    if let Some(m) = s.final_mode {
        t.final_mode = m;
    }
    t.cache_tps_per_block = s.cache_tps_per_block;
    t
}

fn oracle_kind(cfg: &ExperimentConfig) -> OracleKind {
    cfg.tpo.oracle.unwrap_or_default()
}

/// Runs one roster entry for one trial.
pub fn run_algorithm(
    cfg: &ExperimentConfig,
    bundle: &InstanceBundle,
    algorithm: Algorithm,
    trial: usize,
) -> Result<TrialOutcome> {
    let inst = &bundle.instance;
    let seed = RunSeed::for_trial(cfg.master_seed, &algorithm.to_string(), trial as u64);
    let (result, selections) = match algorithm {
        Algorithm::Tpo => (
            tpo_run(&tpo_config(cfg, bundle), &bundle.class, inst, seed)?,
            Vec::new(),
        ),
        Algorithm::OnlineOnly => (
            online_only_run(cfg.horizon, oracle_kind(cfg), &bundle.class, inst, seed)?,
            Vec::new(),
        ),
        Algorithm::TransferFixed(w) => {
            let r = bundle.sources.get(w).ok_or_else(|| {
                HarnessError::Validation(format!("{algorithm} refers to a missing source"))
            })?;
            let pi = closed_form_policy(r, inst)?;
            (
                fixed_policy_run(&pi, PolicyTag::Source(w), Some(w), cfg.horizon, inst, seed)?,
                Vec::new(),
            )
        }
        Algorithm::EmpiricalTpo => {
            let e = &cfg.empirical;
            let mut ecfg =
                EmpiricalConfig::new(cfg.num_blocks(), cfg.block_size, bundle.sources.clone());
            ecfg.ucb = e.ucb;
            ecfg.realization = e.realization;
            let beta_po = e.beta_po.unwrap_or(inst.beta());
            let opt = PolicyOptimizer::new(
                e.optimizer,
                inst.pi_ref(),
                e.learning_rate,
                e.steps,
                beta_po,
            )?
            .with_alpha_xpo(e.alpha_xpo);
            let r = empirical_tpo_run(&ecfg, inst, &opt, seed)?;
            let outcome = TrialOutcome {
                algorithm,
                trial,
                trace: r.regret_trace,
                final_policy: r.final_policy,
                empirical_selections: r.selections,
            };
            return Ok(outcome);
        }
    };
    Ok(TrialOutcome {
        algorithm,
        trial,
        trace: result.regret_trace,
        final_policy: result.final_policy,
        empirical_selections: selections,
    })
}

/// Runs every roster entry in every trial. Trials run on separate threads;
/// the output order is trial-major, then roster order.
pub fn run_trials(cfg: &ExperimentConfig, bundle: &InstanceBundle) -> Result<Vec<TrialOutcome>> {
    cfg.validate()?;
    for a in &cfg.roster {
        if let Algorithm::TransferFixed(w) = a {
            if *w >= bundle.sources.len() {
                return Err(HarnessError::Validation(format!(
                    "{a} refers to a missing source (W = {})",
                    bundle.sources.len()
                )));
            }
        }
    }
    let per_trial: Vec<Result<Vec<TrialOutcome>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..cfg.trials)
            .map(|trial| {
                scope.spawn(move || {
                    cfg.roster
                        .iter()
                        .map(|&a| run_algorithm(cfg, bundle, a, trial))
                        .collect()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("trial thread panicked"))
            .collect()
    });
    let mut out = Vec::with_capacity(cfg.trials * cfg.roster.len());
    for r in per_trial {
        out.extend(r?);
    }
    Ok(out)
}

/// Flattens trial outcomes into raw records, including the exact pairwise
/// win rates of final policies within each trial.
pub fn collect_raw(outcomes: &[TrialOutcome], bundle: &InstanceBundle) -> Result<RawResults> {
    let inst = &bundle.instance;
    let mut raw = RawResults::default();
    for o in outcomes {
        let name = o.algorithm.to_string();
        raw.traces.extend(o.trace.iter().map(|r| TraceRecord {
            algorithm: name.clone(),
            trial: o.trial,
            step: r.step,
            block: r.block,
            inner: r.inner,
            policy_kind: r.tag.to_string(),
            policy_id: r.policy_id,
            inst_regret: r.inst_regret,
            cum_regret: r.cum_regret,
        }));
        raw.summaries.push(SummaryRecord {
            algorithm: name,
            trial: o.trial,
            cum_regret: o.cumulative_regret(),
            final_regret: inst.regret(&o.final_policy)?.max(0.0),
        });
    }
    for a in outcomes {
        for b in outcomes.iter().filter(|b| b.trial == a.trial) {
            raw.win_rates.push(WinRateRecord {
                trial: a.trial,
                policy: a.algorithm.to_string(),
                opponent: b.algorithm.to_string(),
                win_rate: win_rate(&a.final_policy, &b.final_policy, inst.r_star(), inst.rho())?,
            });
        }
    }
    Ok(raw)
}

fn write_csv<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(io_err(path))
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|x| x.map_err(HarnessError::from))
        .collect()
}

impl RawResults {
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_csv(&self.traces, &dir.join(TRACES_CSV))?;
        write_csv(&self.win_rates, &dir.join(WIN_RATES_CSV))?;
        write_csv(&self.summaries, &dir.join(SUMMARY_CSV))
    }

    pub fn read(dir: &Path) -> Result<Self> {
        Ok(Self {
            traces: read_csv(&dir.join(TRACES_CSV))?,
            win_rates: read_csv(&dir.join(WIN_RATES_CSV))?,
            summaries: read_csv(&dir.join(SUMMARY_CSV))?,
        })
    }
}

/// Writes the instance, raw CSVs, empirical selection logs and final
/// policies of a roster run into `dir`.
pub fn write_run(
    dir: &Path,
    cfg: &ExperimentConfig,
    bundle: &InstanceBundle,
    outcomes: &[TrialOutcome],
    raw: &RawResults,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_json(cfg, &dir.join("config.json"))?;
    write_instance(bundle, &dir.join(INSTANCE_JSON))?;
    raw.write(dir)?;
    let selections: Vec<EmpiricalSelectionRecord> = outcomes
        .iter()
        .flat_map(|o| {
            o.empirical_selections
                .iter()
                .map(move |s| EmpiricalSelectionRecord {
                    trial: o.trial,
                    block: s.block,
                    inner: s.inner,
                    arm_tag: s.arm_tag.to_string(),
                    ucb_score: s.ucb_score,
                    y: s.y,
                })
        })
        .collect();
    if cfg.roster.contains(&Algorithm::EmpiricalTpo) {
        write_csv(&selections, &dir.join(EMPIRICAL_SELECTIONS_CSV))?;
    }
    #[derive(Serialize)]
    struct FinalPolicy {
        algorithm: String,
        trial: usize,
        policy: Vec<Vec<f64>>,
    }
    let finals: Vec<FinalPolicy> = outcomes
        .iter()
        .map(|o| FinalPolicy {
            algorithm: o.algorithm.to_string(),
            trial: o.trial,
            policy: o.final_policy.to_rows(),
        })
        .collect();
    write_json(&finals, &dir.join(FINAL_POLICIES_JSON))?;
    info!("wrote {} trace rows to {}", raw.traces.len(), dir.display());
    Ok(())
}
