use crate::bandit::{coverage_coefficient, BanditInstance, PolicyTable, RewardTable};
use crate::error::{Error, Result};
use crate::estimation::hellinger_sq_bt;
use crate::scalar::{sigmoid, Scalar};

use super::report::{BoundParams, BoundReport};

/// |x − y| ≤ 4·e^C·|σ(x) − σ(y)| for x, y ∈ [−C, C].
pub fn sigmoid_gap_check<T: Scalar>(x: T, y: T, c: T) -> Result<BoundReport> {
    if c.is_nan() || c <= T::zero() || x.abs() > c || y.abs() > c {
        return Err(Error::Domain(format!(
            "sigmoid check needs |x|, |y| <= C with C > 0 (x={x}, y={y}, C={c})"
        )));
    }
    let lhs = (x - y).abs();
    let rhs = T::lit(4.0) * c.exp() * (sigmoid(x) - sigmoid(y)).abs();
    let params = BoundParams {
        argument: Some(c.as_f64()),
        ..BoundParams::default()
    };
    Ok(BoundReport::upper(
        "sigmoid_gap",
        lhs.as_f64(),
        rhs.as_f64(),
        params,
    ))
}

/// E_{ρ,π,π_ref}|Δr* − Δr| ≤ 8√2·e^{2R}·√(Cov^{π|π̃}·E_{ρ,π̃,π_ref}[H²(P_r ‖ P_{r*})]),
/// where Δr = r(s,a) − r(s,ã). Both sides are evaluated by exact summation.
pub fn reward_error_hellinger_check<T: Scalar>(
    pi: &PolicyTable<T>,
    pi_tilde: &PolicyTable<T>,
    r: &RewardTable<T>,
    inst: &BanditInstance<T>,
) -> Result<BoundReport> {
    let rs = inst.r_star();
    let pr = inst.pi_ref();
    let (mut lhs, mut h2) = (T::zero(), T::zero());
    for (s, &q) in inst.rho().iter().enumerate() {
        for a in 0..inst.num_actions() {
            for at in 0..inst.num_actions() {
                let w = q * pr.get(s, at);
                let err = ((rs.get(s, a) - rs.get(s, at)) - (r.get(s, a) - r.get(s, at))).abs();
                lhs = lhs + w * pi.get(s, a) * err;
                h2 = h2 + w * pi_tilde.get(s, a) * hellinger_sq_bt(r, rs, s, a, at);
            }
        }
    }
    let cov = coverage_coefficient(pi, pi_tilde, inst.rho())?;
    let rhs = T::lit(8.0 * std::f64::consts::SQRT_2)
        * (T::lit(2.0) * inst.r_max()).exp()
        * (cov * h2).sqrt();
    let params = BoundParams {
        beta: Some(inst.beta().as_f64()),
        r_max: Some(inst.r_max().as_f64()),
        ..BoundParams::default()
    };
    Ok(BoundReport::upper(
        "reward_error_hellinger",
        lhs.as_f64(),
        rhs.as_f64(),
        params,
    ))
}
