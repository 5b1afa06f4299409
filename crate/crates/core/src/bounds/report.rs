use serde::{Deserialize, Serialize};

/// Slack allowed before a bound is reported as violated.
pub const SATISFY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    /// Claim lhs ≤ rhs.
    Upper,
    /// Claim lhs ≥ rhs.
    Lower,
}

/// Evaluation parameters recorded alongside a bound.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub beta: Option<f64>,
    pub r_max: Option<f64>,
    /// Optimizing γ (win-rate bound) or b (exponential bound).
    pub argument: Option<f64>,
    pub comparator: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_name: String,
    pub kind: BoundKind,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    /// rhs − lhs for upper bounds, lhs − rhs for lower bounds.
    pub slack: f64,
    pub params: BoundParams,
}

impl BoundReport {
    pub fn new(
        name: impl Into<String>,
        kind: BoundKind,
        lhs: f64,
        rhs: f64,
        params: BoundParams,
    ) -> Self {
        let slack = match kind {
            BoundKind::Upper => rhs - lhs,
            BoundKind::Lower => lhs - rhs,
        };
        Self {
            bound_name: name.into(),
            kind,
            lhs,
            rhs,
            satisfied: slack >= -SATISFY_TOL,
            slack,
            params,
        }
    }

    pub fn upper(name: impl Into<String>, lhs: f64, rhs: f64, params: BoundParams) -> Self {
        Self::new(name, BoundKind::Upper, lhs, rhs, params)
    }

    pub fn lower(name: impl Into<String>, lhs: f64, rhs: f64, params: BoundParams) -> Self {
        Self::new(name, BoundKind::Lower, lhs, rhs, params)
    }

    /// Same report under a different name.
    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.bound_name = name.into();
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn satisfaction_uses_tolerance() {
        assert!(BoundReport::upper("u", 1.0 + 5e-10, 1.0, BoundParams::default()).satisfied);
        assert!(!BoundReport::upper("u", 1.0 + 5e-9, 1.0, BoundParams::default()).satisfied);
        let lo = BoundReport::lower("l", 0.5, 0.7, BoundParams::default());
        assert!(!lo.satisfied);
        assert!((lo.slack + 0.2).abs() < 1e-15);
    }
}
