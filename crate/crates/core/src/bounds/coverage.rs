//! Coverage-coefficient bounds relating Cov^{π*|π} to value gaps, reward
//! errors and win rates.

use crate::bandit::{
    closed_form_policy, coverage_coefficient, policy_value, satisfies_ratio_bound, win_rate,
    BanditInstance, PolicyTable, RewardTable,
};
use crate::error::{Error, Result};
use crate::estimation::golden_section_max;
use crate::scalar::Scalar;

use super::report::{BoundParams, BoundReport};

/// κ(x) = (x−1)²/(x−1−log x) for x ≥ 1, with its limit 2 at x = 1 taken from
/// the series 1/(1/2 − h/3 + h²/4 − h³/5), h = x − 1, near one.
pub fn kappa<T: Scalar>(x: T) -> Result<T> {
    if x.is_nan() || x < T::one() {
        return Err(Error::Domain(format!("kappa needs x >= 1, got {x}")));
    }
    if x.is_infinite() {
        return Ok(T::infinity());
    }
    let h = x - T::one();
    let window = if T::epsilon().as_f64() > 1e-10 {
        1e-2
    } else {
        1e-6
    };
    if h.as_f64() < window {
        let half = T::lit(0.5);
        return Ok(
            T::one() / (half - h / T::lit(3.0) + h * h / T::lit(4.0) - h * h * h / T::lit(5.0))
        );
    }
    // written to avoid squaring huge x
    Ok(h / (T::one() - x.ln() / h))
}

fn base_params<T: Scalar>(inst: &BanditInstance<T>) -> BoundParams {
    BoundParams {
        beta: Some(inst.beta().as_f64()),
        r_max: Some(inst.r_max().as_f64()),
        ..BoundParams::default()
    }
}

/// Cov^{π*|π} ≤ 1 + κ(e^{2R/β})·(J_β(π*) − J_β(π))/β for π in the
/// bounded-ratio class.
pub fn cov_gap_upper_bound<T: Scalar>(
    pi: &PolicyTable<T>,
    inst: &BanditInstance<T>,
) -> Result<BoundReport> {
    if !satisfies_ratio_bound(pi, inst)? {
        return Err(Error::Domain(
            "policy violates the bounded-ratio condition".into(),
        ));
    }
    let lhs = coverage_coefficient(inst.optimal_policy(), pi, inst.rho())?;
    let gap = inst.regret(pi)?.max(T::zero());
    let k = kappa((T::lit(2.0) * inst.r_max() / inst.beta()).exp())?;
    let rhs = if gap == T::zero() {
        T::one()
    } else {
        T::one() + k * gap / inst.beta()
    };
    Ok(BoundReport::upper(
        "cov_gap_upper",
        lhs.as_f64(),
        rhs.as_f64(),
        base_params(inst),
    ))
}

/// Grid size for the shift b in [`cov_exp_upper_bound`].
pub const EXP_BOUND_GRID: usize = 401;

/// Cov^{π*|π*_r} ≤ min_b E_ρ[(E_{a∼π*}[exp(|r*−r−b|/β)])²], with b searched on
/// a grid over [−R, R] and refined by golden section.
pub fn cov_exp_upper_bound<T: Scalar>(
    r: &RewardTable<T>,
    inst: &BanditInstance<T>,
) -> Result<BoundReport> {
    let pi_r = closed_form_policy(r, inst)?;
    let pi_star = inst.optimal_policy();
    let lhs = coverage_coefficient(pi_star, &pi_r, inst.rho())?;
    let beta = inst.beta();
    let objective = |b: T| -> T {
        inst.rho()
            .iter()
            .enumerate()
            .map(|(s, &q)| {
                let m: T = (0..inst.num_actions())
                    .map(|a| {
                        pi_star.get(s, a)
                            * ((inst.r_star().get(s, a) - r.get(s, a) - b).abs() / beta).exp()
                    })
                    .sum();
                q * m * m
            })
            .sum()
    };
    let r_max = inst.r_max();
    let step = T::lit(2.0) * r_max / T::lit((EXP_BOUND_GRID - 1) as f64);
    let grid: Vec<T> = (0..EXP_BOUND_GRID)
        .map(|k| -r_max + step * T::lit(k as f64))
        .collect();
    let values: Vec<T> = grid.iter().map(|&b| objective(b)).collect();
    let k = crate::estimation::argmin_first(&values).expect("grid is non-empty");
    let lo = grid[k.saturating_sub(1)];
    let hi = grid[(k + 1).min(EXP_BOUND_GRID - 1)];
    let b_ref = golden_section_max(|b| -objective(b), lo, hi, 80);
    let (b, rhs) = if objective(b_ref) < values[k] {
        (b_ref, objective(b_ref))
    } else {
        (grid[k], values[k])
    };
    let mut params = base_params(inst);
    params.argument = Some(b.as_f64());
    Ok(BoundReport::upper(
        "cov_exp_upper",
        lhs.as_f64(),
        rhs.as_f64(),
        params,
    ))
}

/// Log-spaced γ values searched by [`win_rate_cov_lower_bound`].
#[derive(Debug, Clone, PartialEq)]
pub struct GammaGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    /// Golden-section refinement around the best grid point.
    pub refine: bool,
}

impl Default for GammaGrid {
    fn default() -> Self {
        Self {
            lo: 1e-3,
            hi: 1e4,
            points: 71,
            refine: true,
        }
    }
}

impl GammaGrid {
    pub fn single(gamma: f64) -> Self {
        Self {
            lo: gamma,
            hi: gamma,
            points: 1,
            refine: false,
        }
    }

    fn values(&self) -> Vec<f64> {
        if self.points <= 1 {
            return vec![self.lo];
        }
        let (a, b) = (self.lo.ln(), self.hi.ln());
        (0..self.points)
            .map(|k| (a + (b - a) * k as f64 / (self.points - 1) as f64).exp())
            .collect()
    }

    /// Minimizes φ(γ) = (γ + 2p)·log((1+γ)/γ) over the grid; returns (γ, φ).
    pub fn minimize(&self, p: f64) -> (f64, f64) {
        let phi = |g: f64| (g + 2.0 * p) * (1.0 / g).ln_1p();
        let grid = self.values();
        let vals: Vec<f64> = grid.iter().map(|&g| phi(g)).collect();
        let k = crate::estimation::argmin_first(&vals).expect("grid is non-empty");
        let mut best = (grid[k], vals[k]);
        if self.refine && grid.len() > 1 {
            let lo = grid[k.saturating_sub(1)].ln();
            let hi = grid[(k + 1).min(grid.len() - 1)].ln();
            let t = golden_section_max(|t: f64| -phi(t.exp()), lo, hi, 80);
            let v = phi(t.exp());
            if v < best.1 {
                best = (t.exp(), v);
            }
        }
        best
    }
}

/// Which win rate enters the lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WinRateVariant {
    /// P(π̄ ≻ π).
    ComparatorWins,
    /// P(π ≻ π̄).
    PolicyWins,
}

/// Cov^{π*|π} ≥ max_{γ, π̄} [√((γ + 2P)·log((1+γ)/γ)) + √((J_β(π*) − J_β(π̄))/(2β))]^{-1}
/// for P = P(π̄ ≻ π) and P = P(π ≻ π̄), with win rates under r* computed exactly.
pub fn win_rate_cov_lower_bound<T: Scalar>(
    pi: &PolicyTable<T>,
    inst: &BanditInstance<T>,
    comparators: &[(String, &PolicyTable<T>)],
    grid: &GammaGrid,
) -> Result<BoundReport> {
    if comparators.is_empty() {
        return Err(Error::InvalidInput(
            "win-rate bound needs at least one comparator".into(),
        ));
    }
    let lhs = coverage_coefficient(inst.optimal_policy(), pi, inst.rho())?.as_f64();
    let beta = inst.beta().as_f64();
    let mut best: Option<(f64, f64, String)> = None;
    for (tag, bar) in comparators {
        let gap = inst.regret(bar)?.as_f64().max(0.0);
        let second = (gap / (2.0 * beta)).sqrt();
        let p_bar = win_rate(bar, pi, inst.r_star(), inst.rho())?.as_f64();
        for (variant, p) in [
            (WinRateVariant::ComparatorWins, p_bar),
            (WinRateVariant::PolicyWins, 1.0 - p_bar),
        ] {
            let (gamma, phi) = grid.minimize(p);
            let value = 1.0 / (phi.sqrt() + second);
            if best.as_ref().is_none_or(|b| value > b.0) {
                let label = match variant {
                    WinRateVariant::ComparatorWins => format!("{tag}:comparator_wins"),
                    WinRateVariant::PolicyWins => format!("{tag}:policy_wins"),
                };
                best = Some((value, gamma, label));
            }
        }
    }
    let (rhs, gamma, label) = best.expect("at least one comparator");
    let mut params = base_params(inst);
    params.argument = Some(gamma);
    params.comparator = Some(label);
    Ok(BoundReport::lower("win_rate_cov_lower", lhs, rhs, params))
}

/// 1 − TV(π(·|s) ‖ π̃(·|s)) ≤ √((γ + 2·P_{r*}(π(·|s) ≻ π̃(·|s)))·log((1+γ)/γ))
/// at a single state and a fixed γ.
pub fn tv_preference_check<T: Scalar>(
    pi: &PolicyTable<T>,
    pi_tilde: &PolicyTable<T>,
    inst: &BanditInstance<T>,
    s: usize,
    gamma: f64,
) -> Result<BoundReport> {
    if s >= inst.num_states() || gamma <= 0.0 {
        return Err(Error::Domain(
            "state out of range or non-positive gamma".into(),
        ));
    }
    let (p, q) = (pi.row(s), pi_tilde.row(s));
    let tv: f64 = 0.5
        * p.iter()
            .zip(q)
            .map(|(&x, &y)| (x - y).abs().as_f64())
            .sum::<f64>();
    let mut pref = 0.0;
    for (a, &x) in p.iter().enumerate() {
        for (a2, &y) in q.iter().enumerate() {
            pref += (x * y).as_f64() * crate::bandit::bt_prob(inst.r_star(), s, a, a2).as_f64();
        }
    }
    let rhs = ((gamma + 2.0 * pref) * (1.0 / gamma).ln_1p()).sqrt();
    let mut params = base_params(inst);
    params.argument = Some(gamma);
    Ok(BoundReport::upper("tv_preference", 1.0 - tv, rhs, params))
}

/// |(J_β(π*) − J_β(π)) − β·KL(π ‖ π*)|, which vanishes identically.
pub fn kl_value_identity_residual<T: Scalar>(
    pi: &PolicyTable<T>,
    inst: &BanditInstance<T>,
) -> Result<T> {
    let gap = inst.optimal_value() - policy_value(pi, inst.r_star(), inst)?;
    let kl = crate::bandit::kl_divergence(pi, inst.optimal_policy(), inst.rho())?;
    Ok((gap - inst.beta() * kl).abs())
}
