use serde::{Deserialize, Serialize};

use super::class::PolicyClass;
use super::instance::BanditInstance;
use super::policy::PolicyTable;
use super::reward::RewardTable;
use crate::error::{Error, Result};

/// JSON form of an instance together with its sources and policy class.
/// Matrices are row-major nested arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDocument {
    pub num_states: usize,
    pub num_actions: usize,
    pub rho: Vec<f64>,
    pub beta: f64,
    pub r_max: f64,
    pub pi_ref: Vec<Vec<f64>>,
    pub r_star: Vec<Vec<f64>>,
    #[serde(default)]
    pub sources: Vec<Vec<Vec<f64>>>,
    #[serde(default)]
    pub policy_class: Vec<Vec<Vec<f64>>>,
}

/// Validated contents of an [`InstanceDocument`]. Class ids are positions.
#[derive(Debug, Clone)]
pub struct InstanceBundle {
    pub instance: BanditInstance<f64>,
    pub sources: Vec<RewardTable<f64>>,
    pub class: PolicyClass<f64>,
}

impl InstanceDocument {
    pub fn from_parts(
        inst: &BanditInstance<f64>,
        sources: &[RewardTable<f64>],
        cls: &PolicyClass<f64>,
    ) -> Self {
        Self {
            num_states: inst.num_states(),
            num_actions: inst.num_actions(),
            rho: inst.rho().to_vec(),
            beta: inst.beta(),
            r_max: inst.r_max(),
            pi_ref: inst.pi_ref().to_rows(),
            r_star: inst.r_star().to_rows(),
            sources: sources.iter().map(RewardTable::to_rows).collect(),
            policy_class: cls.policies().map(PolicyTable::to_rows).collect(),
        }
    }

    pub fn to_bundle(&self) -> Result<InstanceBundle> {
        let dims = (self.num_states, self.num_actions);
        let pi_ref = PolicyTable::from_rows(&self.pi_ref)?;
        let r_star = RewardTable::from_rows(&self.r_star)?;
        if pi_ref.dims() != dims {
            return Err(Error::InvalidInput(
                "pi_ref does not match num_states x num_actions".into(),
            ));
        }
        let instance =
            BanditInstance::new(self.rho.clone(), pi_ref, self.beta, self.r_max, r_star)?;
        let sources = self
            .sources
            .iter()
            .map(|rows| {
                let r = RewardTable::from_rows(rows)?;
                if r.dims() != dims {
                    return Err(Error::InvalidInput(
                        "source reward has wrong dimensions".into(),
                    ));
                }
                Ok(r)
            })
            .collect::<Result<Vec<_>>>()?;
        let class = PolicyClass::new(
            self.policy_class
                .iter()
                .map(|rows| PolicyTable::from_rows(rows))
                .collect::<Result<_>>()?,
        )?;
        if class.policies().any(|p| p.dims() != dims) {
            return Err(Error::InvalidInput(
                "class member has wrong dimensions".into(),
            ));
        }
        Ok(InstanceBundle {
            instance,
            sources,
            class,
        })
    }
}
