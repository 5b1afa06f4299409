//! No-regret online learners over a finite policy class.

use crate::bandit::{coverage_coefficient, PreferenceDataset, PreferenceSample};
use crate::error::{Error, Result};
use crate::estimation::{
    argmax_first, argmin_first, induced_rewards, LikelihoodTracker, RpoProblem,
};
use crate::{Class, Instance, Policy};

use super::config::OracleKind;

/// Stateful online learner. Proposals are class positions; `None` means the
/// reference policy (cold start).
pub trait OnlineOracle {
    /// Records one online sample together with the policy that produced it.
    fn observe(&mut self, sample: &PreferenceSample, executed: &Policy);

    fn propose(&mut self) -> Result<Option<usize>>;
}

/// Minimizes L_{D_OL}(r_π) + (α/√n)·(1/n)Σ log π(ã_i|s_i) over the class.
/// The second term is small for policies that move mass away from the
/// reference comparator responses, which drives exploration; its weight
/// decays as data accumulates.
#[derive(Debug, Clone)]
pub struct XpoLikeOracle {
    tracker: LikelihoodTracker<f64>,
    log_sums: Vec<f64>,
    members: Vec<Policy>,
    alpha: f64,
}

impl XpoLikeOracle {
    pub fn new(cls: &Class, inst: &Instance, alpha_xpo: f64) -> Result<Self> {
        cls.ensure_nonempty()?;
        Ok(Self {
            tracker: LikelihoodTracker::new(induced_rewards(cls, inst)?),
            log_sums: vec![0.0; cls.len()],
            members: cls.policies().cloned().collect(),
            alpha: alpha_xpo,
        })
    }
}

impl OnlineOracle for XpoLikeOracle {
    fn observe(&mut self, x: &PreferenceSample, _executed: &Policy) {
        self.tracker.observe(x);
        for (sum, p) in self.log_sums.iter_mut().zip(&self.members) {
            *sum += p.get(x.s, x.a_tilde).ln();
        }
    }

    fn propose(&mut self) -> Result<Option<usize>> {
        let n = self.tracker.count();
        if n == 0 {
            return Ok(None);
        }
        let nf = n as f64;
        let weight = self.alpha / nf.sqrt();
        let scores: Vec<f64> = self
            .tracker
            .losses()?
            .iter()
            .zip(&self.log_sums)
            .map(|(l, s)| l + weight * s / nf)
            .collect();
        Ok(argmin_first(&scores))
    }
}

/// Maximizes value_vs_ref(π, r̂_MLE) + c·e^{2R}·√(Cov^{π|π_mix}·log(|Π|/δ)/n),
/// with π_mix the average of the executed online policies.
#[derive(Debug, Clone)]
pub struct OptimisticMleOracle {
    tracker: LikelihoodTracker<f64>,
    /// value_vs_ref(π_i, r_j).
    values: Vec<Vec<f64>>,
    members: Vec<Policy>,
    mix_sum: Vec<f64>,
    rho: Vec<f64>,
    dims: (usize, usize),
    scale: f64,
    log_term: f64,
}

impl OptimisticMleOracle {
    pub fn new(cls: &Class, inst: &Instance, c_ol: f64, delta: f64) -> Result<Self> {
        let problem = RpoProblem::new(cls, inst)?;
        let m = cls.len();
        let values = (0..m)
            .map(|i| (0..m).map(|j| problem.value_vs_ref(i, j)).collect())
            .collect();
        Ok(Self {
            tracker: LikelihoodTracker::new(problem.rewards().to_vec()),
            values,
            members: cls.policies().cloned().collect(),
            mix_sum: vec![0.0; inst.num_states() * inst.num_actions()],
            rho: inst.rho().to_vec(),
            dims: inst.dims(),
            scale: c_ol * (2.0 * inst.r_max()).exp(),
            log_term: (m as f64 / delta).ln(),
        })
    }
}

impl OnlineOracle for OptimisticMleOracle {
    fn observe(&mut self, x: &PreferenceSample, executed: &Policy) {
        self.tracker.observe(x);
        self.mix_sum
            .iter_mut()
            .zip(executed.as_slice())
            .for_each(|(acc, &p)| *acc += p);
    }

    fn propose(&mut self) -> Result<Option<usize>> {
        let n = self.tracker.count();
        if n == 0 {
            return Ok(None);
        }
        let j = argmin_first(&self.tracker.losses()?).expect("class is non-empty");
        let mix = Policy::from_weights(self.dims.0, self.dims.1, self.mix_sum.clone())?;
        let scores = self
            .members
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let cov = coverage_coefficient(p, &mix, &self.rho)?;
                Ok(self.values[i][j] + self.scale * (cov * self.log_term / n as f64).sqrt())
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(argmax_first(&scores))
    }
}

pub fn make_oracle(
    kind: OracleKind,
    cls: &Class,
    inst: &Instance,
) -> Result<Box<dyn OnlineOracle>> {
    kind.validate()?;
    Ok(match kind {
        OracleKind::XpoLike { alpha_xpo } => Box::new(XpoLikeOracle::new(cls, inst, alpha_xpo)?),
        OracleKind::OptimisticMle { c_ol, delta } => {
            Box::new(OptimisticMleOracle::new(cls, inst, c_ol, delta)?)
        }
    })
}

/// Stateless form of one oracle step: replays `history` (online samples and
/// the policies that produced them) and returns the next exploration policy.
pub fn online_oracle_step(
    history: &PreferenceDataset,
    executed: &[Policy],
    cls: &Class,
    inst: &Instance,
    kind: OracleKind,
) -> Result<Policy> {
    if history.len() != executed.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} executed policies", history.len()),
            found: format!("{}", executed.len()),
        });
    }
    history.validate(inst.num_states(), inst.num_actions())?;
    let mut oracle = make_oracle(kind, cls, inst)?;
    for (x, p) in history.iter().zip(executed) {
        oracle.observe(x, p);
    }
    Ok(match oracle.propose()? {
        Some(i) => cls.policy(i).clone(),
        None => inst.pi_ref().clone(),
    })
}
