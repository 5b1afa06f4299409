use crate::bandit::{expected_reward, kl_divergence, BanditInstance, PolicyTable, RewardTable};
use crate::error::Result;
use crate::scalar::Scalar;

/// E_{ρ,π}[r] − E_{ρ,π_ref}[r] − β·KL(π ‖ π_ref); equals J_β(π) − J_β(π_ref)
/// when r is the reward defining J_β.
pub fn value_vs_ref<T: Scalar>(
    pi: &PolicyTable<T>,
    r: &RewardTable<T>,
    inst: &BanditInstance<T>,
) -> Result<T> {
    Ok(expected_reward(pi, r, inst.rho())?
        - expected_reward(inst.pi_ref(), r, inst.rho())?
        - inst.beta() * kl_divergence(pi, inst.pi_ref(), inst.rho())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::policy_value;

    #[test]
    fn worked_example() {
        let inst = BanditInstance::new(
            vec![1.0],
            PolicyTable::uniform(1, 2).unwrap(),
            1.0,
            1.0,
            RewardTable::from_rows(&[vec![1.0, 0.0]]).unwrap(),
        )
        .unwrap();
        let v: f64 = value_vs_ref(inst.optimal_policy(), inst.r_star(), &inst).unwrap();
        assert!((v - 0.120_114_506_958_278).abs() < 1e-14);
        assert_eq!(
            value_vs_ref(inst.pi_ref(), inst.r_star(), &inst).unwrap(),
            0.0
        );
        let j = policy_value(inst.optimal_policy(), inst.r_star(), &inst).unwrap()
            - policy_value(inst.pi_ref(), inst.r_star(), &inst).unwrap();
        assert!((v - j).abs() < 1e-15);
    }
}
