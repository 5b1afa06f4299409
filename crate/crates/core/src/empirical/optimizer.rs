//! Tabular softmax policy trained by full-batch gradient descent on
//! pairwise preference losses.

use serde::{Deserialize, Serialize};

use crate::bandit::PreferenceDataset;
use crate::error::{Error, Result};
use crate::scalar::{log_sigmoid, sigmoid};
use crate::Policy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoKind {
    Dpo,
    Ipo,
    Xpo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyOptimizer {
    pub kind: PoKind,
    pub learning_rate: f64,
    pub steps: usize,
    pub beta_po: f64,
    /// Weight of the mean log π(ã|s) term (xpo only).
    pub alpha_xpo: f64,
    /// IPO target temperature τ; defaults to beta_po.
    pub ipo_tau: Option<f64>,
    num_states: usize,
    num_actions: usize,
    logits: Vec<f64>,
}

impl PolicyOptimizer {
    /// Optimizer whose softmax starts at `init`.
    pub fn new(
        kind: PoKind,
        init: &Policy,
        learning_rate: f64,
        steps: usize,
        beta_po: f64,
    ) -> Result<Self> {
        if !(beta_po > 0.0 && learning_rate > 0.0) {
            return Err(Error::Config(
                "beta_po and learning_rate must be positive".into(),
            ));
        }
        Ok(Self {
            kind,
            learning_rate,
            steps,
            beta_po,
            alpha_xpo: 0.0,
            ipo_tau: None,
            num_states: init.num_states(),
            num_actions: init.num_actions(),
            logits: init.as_slice().iter().map(|p| p.ln()).collect(),
        })
    }

    pub fn with_alpha_xpo(mut self, alpha: f64) -> Self {
        self.alpha_xpo = alpha;
        self
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    pub fn set_logits(&mut self, logits: Vec<f64>) -> Result<()> {
        if logits.len() != self.logits.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} logits", self.logits.len()),
                found: format!("{}", logits.len()),
            });
        }
        self.logits = logits;
        Ok(())
    }

    pub fn policy(&self) -> Result<Policy> {
        Policy::softmax(self.num_states, self.num_actions, &self.logits)
    }

    fn tau(&self) -> f64 {
        self.ipo_tau.unwrap_or(self.beta_po)
    }

    /// Mean loss over the block at the given logits.
    pub fn loss_at(
        &self,
        logits: &[f64],
        pi_ref: &Policy,
        data: &PreferenceDataset,
    ) -> Result<f64> {
        Ok(self.loss_and_gradient(logits, pi_ref, data)?.0)
    }

    /// Mean loss and its gradient with respect to the logits.
    pub fn loss_and_gradient(
        &self,
        logits: &[f64],
        pi_ref: &Policy,
        data: &PreferenceDataset,
    ) -> Result<(f64, Vec<f64>)> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        data.validate(self.num_states, self.num_actions)?;
        let na = self.num_actions;
        let pi = Policy::softmax(self.num_states, na, logits)?;
        let log_pi = |s: usize, a: usize| pi.get(s, a).ln();
        let mut grad = vec![0.0; logits.len()];
        let mut loss = 0.0;
        let n = data.len() as f64;
        for x in data {
            let (w, l) = x.winner_loser();
            let s = x.s;
            let delta =
                (log_pi(s, w) - pi_ref.get(s, w).ln()) - (log_pi(s, l) - pi_ref.get(s, l).ln());
            // d delta / d logits[s, ·] = e_w − e_l
            let d_delta = match self.kind {
                PoKind::Dpo | PoKind::Xpo => {
                    loss -= log_sigmoid(self.beta_po * delta);
                    -self.beta_po * sigmoid(-self.beta_po * delta)
                }
                PoKind::Ipo => {
                    let e = delta - 1.0 / (2.0 * self.tau());
                    loss += e * e;
                    2.0 * e
                }
            };
            grad[s * na + w] += d_delta / n;
            grad[s * na + l] -= d_delta / n;
            if self.kind == PoKind::Xpo && self.alpha_xpo != 0.0 {
                loss += self.alpha_xpo * log_pi(s, x.a_tilde);
                // d log π(ã|s) / d logits[s, b] = 1[b = ã] − π(b|s)
                for b in 0..na {
                    let ind = if b == x.a_tilde { 1.0 } else { 0.0 };
                    grad[s * na + b] += self.alpha_xpo * (ind - pi.get(s, b)) / n;
                }
            }
        }
        Ok((loss / n, grad))
    }
}

/// Runs `steps` full-batch gradient steps on the block's data.
pub fn po_update(
    opt: &PolicyOptimizer,
    pi_ref: &Policy,
    block_data: &PreferenceDataset,
) -> Result<PolicyOptimizer> {
    if block_data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut next = opt.clone();
    for _ in 0..opt.steps {
        let (_, g) = next.loss_and_gradient(&next.logits, pi_ref, block_data)?;
        next.logits
            .iter_mut()
            .zip(&g)
            .for_each(|(x, d)| *x -= opt.learning_rate * d);
    }
    Ok(next)
}
