//! Transfer policy selection: optimistic estimates for source policies,
//! a pessimistic estimate for the distilled policy, pick the best.

use serde::Serialize;

use crate::bandit::{closed_form_policy, PolicyTag, PreferenceDataset, PreferenceSample};
use crate::error::{Error, Result};
use crate::estimation::{argmin_first, value_vs_ref, LikelihoodTracker, RpoProblem, RpoSolution};
use crate::{Class, Instance, Policy};

use super::config::TpoConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TransferKind {
    Source,
    Distilled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferChoice {
    pub kind: TransferKind,
    pub source_id: Option<usize>,
    /// Class id of the distilled policy when it is a single member.
    pub member_id: Option<usize>,
    pub chosen_policy: Policy,
    /// Estimated value per candidate, distilled first; +∞ for unsampled sources.
    pub estimated_values: Vec<(PolicyTag, f64)>,
}

impl TransferChoice {
    pub fn tag(&self) -> PolicyTag {
        match self.kind {
            TransferKind::Source => {
                PolicyTag::Source(self.source_id.expect("source choice has an id"))
            }
            TransferKind::Distilled => PolicyTag::Distilled,
        }
    }
}

/// Incremental transfer selector. Everything that does not depend on the
/// data (source policies, their values under each class reward, the RPO
/// advantage matrix) is computed once.
pub struct TpsEngine<'a> {
    cfg: &'a TpoConfig,
    cls: &'a Class,
    inst: &'a Instance,
    problem: RpoProblem<'a, f64>,
    source_policies: Vec<Policy>,
    /// value_vs_ref(π*_{r^w}, r_j) for class rewards r_j.
    source_values: Vec<Vec<f64>>,
    /// value_vs_ref(π*_{r^w}, r*).
    source_true: Vec<f64>,
    tracker: LikelihoodTracker<f64>,
    counts: Vec<usize>,
}

impl<'a> TpsEngine<'a> {
    pub fn new(cfg: &'a TpoConfig, cls: &'a Class, inst: &'a Instance) -> Result<Self> {
        let problem = RpoProblem::new(cls, inst)?;
        let source_policies = cfg
            .sources
            .iter()
            .map(|r| closed_form_policy(r, inst))
            .collect::<Result<Vec<_>>>()?;
        let source_values = source_policies
            .iter()
            .map(|p| {
                problem
                    .rewards()
                    .iter()
                    .map(|r| value_vs_ref(p, r, inst))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let source_true = source_policies
            .iter()
            .map(|p| value_vs_ref(p, inst.r_star(), inst))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            tracker: LikelihoodTracker::new(problem.rewards().to_vec()),
            counts: vec![0; cfg.sources.len()],
            cfg,
            cls,
            inst,
            problem,
            source_policies,
            source_values,
            source_true,
        })
    }

    pub fn observe(&mut self, x: &PreferenceSample) {
        self.tracker.observe(x);
        if let PolicyTag::Source(w) = x.producer {
            if let Some(c) = self.counts.get_mut(w) {
                *c += 1;
            }
        }
    }

    pub fn source_policies(&self) -> &[Policy] {
        &self.source_policies
    }

    pub fn problem(&self) -> &RpoProblem<'a, f64> {
        &self.problem
    }

    /// RPO on the data seen so far with the configured η.
    pub fn distill(
        &self,
        mode: crate::estimation::RpoMode,
    ) -> Result<(RpoSolution<f64>, f64, Vec<f64>)> {
        let n = self.tracker.count();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let losses = self.tracker.losses()?;
        let eta = self.cfg.eta.eta(
            self.inst.r_max(),
            self.cls.len(),
            self.cfg.horizon,
            self.cfg.delta,
            n,
        );
        let sol = self
            .problem
            .solve(&losses, eta, mode, &self.cfg.frank_wolfe)?;
        Ok((sol, eta, losses))
    }

    pub fn select(&self) -> Result<TransferChoice> {
        let n = self.tracker.count();
        let (sol, eta, losses) = self.distill(self.cfg.tps_mode)?;
        let r_max = self.inst.r_max();
        let e2r = (2.0 * r_max).exp();
        let m = self.cls.len() as f64;
        let t = self.cfg.horizon as f64;
        let w_count = self.cfg.sources.len().max(1) as f64;
        let distilled = if self.cfg.noise_free {
            value_vs_ref(&sol.pi_dstl, self.inst.r_star(), self.inst)?
        } else {
            let mle = argmin_first(&losses).expect("class is non-empty");
            let pessimism =
                2.0 * self.cfg.c_bonus * e2r * ((m * t / self.cfg.delta).ln() / n as f64).sqrt();
            sol.value_vs_ref + (losses[sol.reward_index] - losses[mle]) / eta - pessimism
        };
        let mut estimates = vec![(PolicyTag::Distilled, distilled)];
        let mle = argmin_first(&losses).expect("class is non-empty");
        for w in 0..self.cfg.sources.len() {
            let v = if self.cfg.noise_free {
                self.source_true[w]
            } else if self.counts[w] == 0 {
                f64::INFINITY
            } else {
                let bonus = self.cfg.source_bonus
                    * e2r
                    * ((m * w_count * t / self.cfg.delta).ln() / self.counts[w] as f64).sqrt();
                self.source_values[w][mle] + bonus
            };
            estimates.push((PolicyTag::Source(w), v));
        }
        let mut best = 0;
        for (k, e) in estimates.iter().enumerate().skip(1) {
            if e.1 > estimates[best].1 {
                best = k;
            }
        }
        Ok(match estimates[best].0 {
            PolicyTag::Source(w) => TransferChoice {
                kind: TransferKind::Source,
                source_id: Some(w),
                member_id: None,
                chosen_policy: self.source_policies[w].clone(),
                estimated_values: estimates,
            },
            _ => TransferChoice {
                kind: TransferKind::Distilled,
                source_id: None,
                member_id: sol.policy_index.map(|i| self.cls.id(i)),
                chosen_policy: sol.pi_dstl,
                estimated_values: estimates,
            },
        })
    }
}

/// One-shot transfer selection on a dataset.
pub fn tps_select(
    data: &PreferenceDataset,
    cfg: &TpoConfig,
    cls: &Class,
    inst: &Instance,
) -> Result<TransferChoice> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    data.validate(inst.num_states(), inst.num_actions())?;
    let mut engine = TpsEngine::new(cfg, cls, inst)?;
    data.iter().for_each(|x| engine.observe(x));
    engine.select()
}
