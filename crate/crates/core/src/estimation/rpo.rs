//! Pessimistic offline preference learner (RPO).
//!
//! Solves max_π min_{r∈R^Π} F(π, r) with
//! F(π, r) = L_D(r)/η + E_{s∼ρ, a∼π, ã∼π_ref}[r(s,a) − r(s,ã)] − β·KL(π ‖ π_ref),
//! either over the members of Π or over mixtures of them.

use serde::{Deserialize, Serialize};

use crate::bandit::{
    expected_reward, kl_divergence, mixture_policy, BanditInstance, PolicyClass, PolicyTable,
    PreferenceDataset, RewardTable,
};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::likelihood::nll_loss;
use super::mle::{argmax_first, argmin_first, induced_rewards};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RpoMode {
    /// Outer maximization over class members.
    #[default]
    Enumerate,
    /// Outer maximization over mixture weights by Frank–Wolfe.
    Mixture,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrankWolfeOptions {
    pub max_iters: usize,
    /// Convergence threshold on the Frank–Wolfe gap.
    pub tol: f64,
    /// Golden-section iterations per line search.
    pub line_search_iters: usize,
}

impl Default for FrankWolfeOptions {
    fn default() -> Self {
        Self {
            max_iters: 200,
            tol: 1e-8,
            line_search_iters: 60,
        }
    }
}

/// Confidence-scaled step size η.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum EtaRule {
    /// (1+e^R)^{-2}·√(24·log(|Π|/δ)/|D|).
    #[default]
    Standard,
    /// c·(1+e^R)^{-2}·√(log(|Π|·T/δ)/|D|).
    Horizon {
        c: f64,
    },
    Fixed {
        eta: f64,
    },
}

impl EtaRule {
    pub fn eta(
        &self,
        r_max: f64,
        class_size: usize,
        horizon: usize,
        delta: f64,
        data_len: usize,
    ) -> f64 {
        match *self {
            EtaRule::Standard => eta_standard(r_max, class_size, delta, data_len),
            EtaRule::Horizon { c } => eta_horizon(c, r_max, class_size, horizon, delta, data_len),
            EtaRule::Fixed { eta } => eta,
        }
    }
}

pub fn eta_standard(r_max: f64, class_size: usize, delta: f64, data_len: usize) -> f64 {
    let scale = (1.0 + r_max.exp()).powi(-2);
    scale * (24.0 * (class_size as f64 / delta).ln() / data_len as f64).sqrt()
}

pub fn eta_horizon(
    c: f64,
    r_max: f64,
    class_size: usize,
    horizon: usize,
    delta: f64,
    data_len: usize,
) -> f64 {
    let scale = (1.0 + r_max.exp()).powi(-2);
    c * scale * ((class_size as f64 * horizon as f64 / delta).ln() / data_len as f64).sqrt()
}

/// Output of [`rpo_solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct RpoSolution<T> {
    pub pi_dstl: PolicyTable<T>,
    /// Weights over class positions; one-hot in enumerate mode.
    pub mixture_weights: Vec<T>,
    pub r_dstl: RewardTable<T>,
    /// Class position of the inner minimizer (r_dstl ∈ R^Π).
    pub reward_index: usize,
    /// Class position of the maximizer in enumerate mode.
    pub policy_index: Option<usize>,
    /// min_r F(π_dstl, r).
    pub inner_min_value: T,
    /// E_{π_dstl}[r_dstl] − E_{π_ref}[r_dstl] − β·KL(π_dstl ‖ π_ref).
    pub value_vs_ref: T,
    pub mode: RpoMode,
    pub converged: bool,
    pub iterations: usize,
}

/// JSON form of an [`RpoSolution`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpoDocument {
    pub pi_dstl: Vec<Vec<f64>>,
    pub mixture_weights: Vec<f64>,
    pub r_dstl: Vec<Vec<f64>>,
    pub mode: RpoMode,
    pub converged: bool,
}

impl<T: Scalar> RpoSolution<T> {
    pub fn to_document(&self) -> RpoDocument {
        RpoDocument {
            pi_dstl: self.pi_dstl.to_rows(),
            mixture_weights: self.mixture_weights.iter().map(|w| w.as_f64()).collect(),
            r_dstl: self.r_dstl.to_rows(),
            mode: self.mode,
            converged: self.converged,
        }
    }
}

/// Data-independent parts of the RPO objective for one class: the advantage
/// matrix adv[i][j] = E_{ρ,π_i}[r_j] − E_{ρ,π_ref}[r_j] and KL(π_i ‖ π_ref).
/// Only the per-reward losses change as data accumulates.
#[derive(Debug, Clone)]
pub struct RpoProblem<'a, T> {
    cls: &'a PolicyClass<T>,
    inst: &'a BanditInstance<T>,
    rewards: Vec<RewardTable<T>>,
    adv: Vec<Vec<T>>,
    kl: Vec<T>,
}

impl<'a, T: Scalar> RpoProblem<'a, T> {
    pub fn new(cls: &'a PolicyClass<T>, inst: &'a BanditInstance<T>) -> Result<Self> {
        cls.ensure_nonempty()?;
        let rewards = induced_rewards(cls, inst)?;
        let ref_means = rewards
            .iter()
            .map(|r| expected_reward(inst.pi_ref(), r, inst.rho()))
            .collect::<Result<Vec<_>>>()?;
        let mut adv = Vec::with_capacity(cls.len());
        let mut kl = Vec::with_capacity(cls.len());
        for p in cls.policies() {
            let row = rewards
                .iter()
                .zip(&ref_means)
                .map(|(r, &m)| Ok(expected_reward(p, r, inst.rho())? - m))
                .collect::<Result<Vec<_>>>()?;
            adv.push(row);
            kl.push(kl_divergence(p, inst.pi_ref(), inst.rho())?);
        }
        Ok(Self {
            cls,
            inst,
            rewards,
            adv,
            kl,
        })
    }

    pub fn class(&self) -> &PolicyClass<T> {
        self.cls
    }

    pub fn rewards(&self) -> &[RewardTable<T>] {
        &self.rewards
    }

    /// value_vs_ref(π_i, r_j).
    pub fn value_vs_ref(&self, i: usize, j: usize) -> T {
        self.adv[i][j] - self.inst.beta() * self.kl[i]
    }

    /// F(π_i, r_j) for the given per-reward average losses.
    pub fn objective(&self, i: usize, j: usize, losses: &[T], eta: T) -> T {
        losses[j] / eta + self.value_vs_ref(i, j)
    }

    /// Average loss of every reward in R^Π on `data`.
    pub fn losses(&self, data: &PreferenceDataset) -> Result<Vec<T>> {
        self.rewards.iter().map(|r| nll_loss(r, data)).collect()
    }

    fn inner_min(&self, i: usize, losses: &[T], eta: T) -> (usize, T) {
        let vals: Vec<T> = (0..self.rewards.len())
            .map(|j| self.objective(i, j, losses, eta))
            .collect();
        let j = argmin_first(&vals).expect("class is non-empty");
        (j, vals[j])
    }

    pub fn solve(
        &self,
        losses: &[T],
        eta: T,
        mode: RpoMode,
        fw: &FrankWolfeOptions,
    ) -> Result<RpoSolution<T>> {
        if losses.len() != self.rewards.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} losses", self.rewards.len()),
                found: format!("{} losses", losses.len()),
            });
        }
        if !(eta.is_finite() && eta > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "eta must be positive, got {eta}"
            )));
        }
        let inner: Vec<(usize, T)> = (0..self.cls.len())
            .map(|i| self.inner_min(i, losses, eta))
            .collect();
        let scores: Vec<T> = inner.iter().map(|x| x.1).collect();
        let i = argmax_first(&scores).expect("class is non-empty");
        let (j, value) = inner[i];
        let mut weights = vec![T::zero(); self.cls.len()];
        weights[i] = T::one();
        let vertex = RpoSolution {
            pi_dstl: self.cls.policy(i).clone(),
            mixture_weights: weights,
            r_dstl: self.rewards[j].clone(),
            reward_index: j,
            policy_index: Some(i),
            inner_min_value: value,
            value_vs_ref: self.value_vs_ref(i, j),
            mode,
            converged: true,
            iterations: 0,
        };
        match mode {
            RpoMode::Enumerate => Ok(vertex),
            RpoMode::Mixture => self.frank_wolfe(vertex, losses, eta, fw),
        }
    }

    fn mix(&self, lambda: &[T]) -> Result<PolicyTable<T>> {
        let ps: Vec<&PolicyTable<T>> = self.cls.policies().collect();
        mixture_policy(&ps, lambda)
    }

    /// g(λ) = min_j F(π_λ, r_j), with the minimizing j.
    fn mixed_value(
        &self,
        lambda: &[T],
        losses: &[T],
        eta: T,
    ) -> Result<(T, usize, PolicyTable<T>)> {
        let pi = self.mix(lambda)?;
        let kl = kl_divergence(&pi, self.inst.pi_ref(), self.inst.rho())?;
        let vals: Vec<T> = (0..self.rewards.len())
            .map(|j| {
                let lin: T = lambda
                    .iter()
                    .zip(&self.adv)
                    .map(|(&l, row)| l * row[j])
                    .sum();
                losses[j] / eta + lin
            })
            .collect();
        let j = argmin_first(&vals).expect("class is non-empty");
        Ok((vals[j] - self.inst.beta() * kl, j, pi))
    }

    fn frank_wolfe(
        &self,
        start: RpoSolution<T>,
        losses: &[T],
        eta: T,
        fw: &FrankWolfeOptions,
    ) -> Result<RpoSolution<T>> {
        let m = self.cls.len();
        let beta = self.inst.beta();
        let rho = self.inst.rho();
        let mut lambda = start.mixture_weights.clone();
        let (mut g, mut j, mut pi) = self.mixed_value(&lambda, losses, eta)?;
        let mut converged = false;
        let mut iterations = 0;
        while iterations < fw.max_iters {
            iterations += 1;
            // supergradient of g at λ for the active reward j
            let log_ratio: Vec<T> = pi
                .as_slice()
                .iter()
                .zip(self.inst.pi_ref().as_slice())
                .map(|(&p, &q)| (p / q).ln() + T::one())
                .collect();
            let na = pi.num_actions();
            let grad: Vec<T> = (0..m)
                .map(|i| {
                    let p = self.cls.policy(i).as_slice();
                    let dkl: T = (0..p.len())
                        .map(|k| rho[k / na] * p[k] * log_ratio[k])
                        .sum();
                    self.adv[i][j] - beta * dkl
                })
                .collect();
            let v = argmax_first(&grad).expect("class is non-empty");
            let current: T = lambda.iter().zip(&grad).map(|(&l, &d)| l * d).sum();
            let gap = grad[v] - current;
            if gap.as_f64() < fw.tol {
                converged = true;
                break;
            }
            let along = |t: T| -> Vec<T> {
                lambda
                    .iter()
                    .enumerate()
                    .map(|(i, &l)| (T::one() - t) * l + if i == v { t } else { T::zero() })
                    .collect()
            };
            let t = golden_section_max(
                |t| {
                    self.mixed_value(&along(t), losses, eta)
                        .map(|x| x.0)
                        .unwrap_or(T::neg_infinity())
                },
                T::zero(),
                T::one(),
                fw.line_search_iters,
            );
            let cand = along(t);
            let (g_new, j_new, pi_new) = self.mixed_value(&cand, losses, eta)?;
            if g_new <= g {
                // the supergradient of the active piece is not an ascent direction
                break;
            }
            lambda = cand;
            g = g_new;
            j = j_new;
            pi = pi_new;
        }
        if !converged {
            log::debug!("mixture RPO stopped after {iterations} iterations without meeting the gap tolerance");
        }
        let value_vs_ref = expected_reward(&pi, &self.rewards[j], rho)?
            - expected_reward(self.inst.pi_ref(), &self.rewards[j], rho)?
            - beta * kl_divergence(&pi, self.inst.pi_ref(), rho)?;
        if g < start.inner_min_value {
            return Ok(RpoSolution {
                mode: RpoMode::Mixture,
                converged,
                iterations,
                ..start
            });
        }
        Ok(RpoSolution {
            pi_dstl: pi,
            mixture_weights: lambda,
            r_dstl: self.rewards[j].clone(),
            reward_index: j,
            policy_index: None,
            inner_min_value: g,
            value_vs_ref,
            mode: RpoMode::Mixture,
            converged,
            iterations,
        })
    }
}

/// Maximizes a unimodal function on [lo, hi]; returns the best point probed,
/// including the endpoints.
pub fn golden_section_max<T: Scalar>(f: impl Fn(T) -> T, lo: T, hi: T, iters: usize) -> T {
    let inv_phi = T::lit(0.618_033_988_749_894_9);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = if f(lo) >= f(hi) {
        (lo, f(lo))
    } else {
        (hi, f(hi))
    };
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        for (x, fx) in [(c, fc), (d, fd)] {
            if fx > best.1 {
                best = (x, fx);
            }
        }
    }
    best.0
}

/// One-shot RPO on a dataset with default Frank–Wolfe options.
pub fn rpo_solve<T: Scalar>(
    cls: &PolicyClass<T>,
    data: &PreferenceDataset,
    inst: &BanditInstance<T>,
    eta: T,
    mode: RpoMode,
) -> Result<RpoSolution<T>> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let problem = RpoProblem::new(cls, inst)?;
    let losses = problem.losses(data)?;
    problem.solve(&losses, eta, mode, &FrankWolfeOptions::default())
}
