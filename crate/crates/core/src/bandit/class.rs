use super::instance::BanditInstance;
use super::ops::max_abs_log_ratio;
use super::policy::{ensure_same_dims, PolicyTable};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A class member with a stable integer id that survives filtering.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMember<T> {
    pub id: usize,
    pub policy: PolicyTable<T>,
}

/// Finite policy class Π.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyClass<T> {
    members: Vec<ClassMember<T>>,
}

impl<T: Scalar> PolicyClass<T> {
    /// Assigns ids 0..n in order. All members must share dimensions.
    pub fn new(policies: Vec<PolicyTable<T>>) -> Result<Self> {
        Self::from_members(
            policies
                .into_iter()
                .enumerate()
                .map(|(id, policy)| ClassMember { id, policy })
                .collect(),
        )
    }

    pub fn from_members(members: Vec<ClassMember<T>>) -> Result<Self> {
        if let Some(first) = members.first() {
            for m in &members[1..] {
                ensure_same_dims(first.policy.dims(), m.policy.dims())?;
            }
        }
        let mut ids: Vec<usize> = members.iter().map(|m| m.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("duplicate class member id".into()));
        }
        Ok(Self { members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[ClassMember<T>] {
        &self.members
    }

    pub fn policies(&self) -> impl Iterator<Item = &PolicyTable<T>> {
        self.members.iter().map(|m| &m.policy)
    }

    /// Member at a position (not an id).
    pub fn policy(&self, index: usize) -> &PolicyTable<T> {
        &self.members[index].policy
    }

    pub fn id(&self, index: usize) -> usize {
        self.members[index].id
    }

    pub fn by_id(&self, id: usize) -> Option<&PolicyTable<T>> {
        self.members.iter().find(|m| m.id == id).map(|m| &m.policy)
    }

    /// Position of the first member within `tol` (max-abs) of `pi`.
    pub fn position_of(&self, pi: &PolicyTable<T>, tol: T) -> Option<usize> {
        self.members
            .iter()
            .position(|m| m.policy.max_abs_diff(pi).is_ok_and(|d| d <= tol))
    }

    /// Whether π*_{r*} of the instance is a member (realizability).
    pub fn is_realizable(&self, inst: &BanditInstance<T>) -> bool {
        self.position_of(inst.optimal_policy(), T::lit(1e-9))
            .is_some()
    }

    pub fn ensure_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptyClass)
        } else {
            Ok(())
        }
    }

    pub fn cast<U: Scalar>(&self) -> Result<PolicyClass<U>> {
        PolicyClass::from_members(
            self.members
                .iter()
                .map(|m| {
                    Ok(ClassMember {
                        id: m.id,
                        policy: m.policy.cast()?,
                    })
                })
                .collect::<Result<_>>()?,
        )
    }
}

/// Keeps the members whose log-ratio to π_ref is bounded by r_max/β
/// everywhere, preserving ids and order.
pub fn bounded_ratio_filter<T: Scalar>(
    cls: &PolicyClass<T>,
    inst: &BanditInstance<T>,
) -> Result<PolicyClass<T>> {
    let bound = inst.r_max() / inst.beta();
    let mut kept = Vec::new();
    for m in cls.members() {
        if passes_ratio_bound(&m.policy, inst, bound)? {
            kept.push(m.clone());
        }
    }
    PolicyClass::from_members(kept)
}

/// Whether max |log(π/π_ref)| ≤ r_max/β, with a relative rounding allowance
/// so that closed-form policies at the edge are not rejected.
pub fn satisfies_ratio_bound<T: Scalar>(
    pi: &PolicyTable<T>,
    inst: &BanditInstance<T>,
) -> Result<bool> {
    passes_ratio_bound(pi, inst, inst.r_max() / inst.beta())
}

fn passes_ratio_bound<T: Scalar>(
    pi: &PolicyTable<T>,
    inst: &BanditInstance<T>,
    bound: T,
) -> Result<bool> {
    let m = max_abs_log_ratio(pi, inst.pi_ref())?;
    let eps = T::lit(64.0) * T::epsilon() * (T::one() + bound);
    Ok(m <= bound + eps)
}

/// L∞ coverability max_s Σ_a max_{π∈Π} π(a|s), the closed form of
/// inf_μ sup_{π,s,a} π(a|s)/μ(a|s).
pub fn linf_coverability<T: Scalar>(cls: &PolicyClass<T>) -> Result<T> {
    cls.ensure_nonempty()?;
    let first = cls.policy(0);
    let (ns, na) = first.dims();
    let mut best = T::zero();
    for s in 0..ns {
        let total: T = (0..na)
            .map(|a| cls.policies().map(|p| p.get(s, a)).fold(T::zero(), T::max))
            .sum();
        best = best.max(total);
    }
    Ok(best)
}
