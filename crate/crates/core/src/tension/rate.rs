use serde::{Deserialize, Serialize};

use crate::model::norm1;
use crate::{Error, Result};

/// Model for the lower-deviation rate function `I_n(τ)` of the surface
/// tension, valid on `(τ^min(n), τ^q(n)]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateFunctionModel {
    /// Cost of a fully diluted cross-section: `-‖n‖₁ log P(J_e = 0)`,
    /// constant on the domain.
    BernoulliBound { p_zero: f64, tau_min: f64, tau_q: f64 },
    /// Piecewise-linear in `τ` through `(τ, I)` nodes, clamped to the end
    /// values between the nodes and the domain ends.
    Table { nodes: Vec<(f64, f64)>, tau_min: f64, tau_q: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateDomain {
    Inside,
    /// `τ ≤ τ^min`: the deviation cannot occur.
    BelowMinimum,
    /// `τ > τ^q`: not a lower deviation.
    AboveQuenched,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateValue {
    pub value: f64,
    pub domain: RateDomain,
}

impl RateFunctionModel {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.domain();
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Domain(format!("empty deviation range ({lo}, {hi}]")));
        }
        match self {
            RateFunctionModel::BernoulliBound { p_zero, .. } => {
                if !(*p_zero > 0.0 && *p_zero <= 1.0) {
                    return Err(Error::Domain(format!("P(J=0) = {p_zero} must lie in (0,1]")));
                }
            }
            RateFunctionModel::Table { nodes, .. } => {
                if nodes.is_empty() {
                    return Err(Error::Domain("empty rate table".into()));
                }
                if nodes.iter().any(|(t, v)| !t.is_finite() || !v.is_finite() || *v < 0.0) {
                    return Err(Error::Domain("rate table values must be finite and >= 0".into()));
                }
                if nodes.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return Err(Error::Domain("rate table nodes must be strictly increasing".into()));
                }
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> (f64, f64) {
        match self {
            RateFunctionModel::BernoulliBound { tau_min, tau_q, .. } | RateFunctionModel::Table { tau_min, tau_q, .. } => {
                (*tau_min, *tau_q)
            }
        }
    }

    /// `I_n(τ)`. Outside `(τ^min, τ^q]` the value is `+∞` and the side is
    /// reported in `domain`.
    pub fn eval(&self, n: &[f64], tau: f64) -> Result<RateValue> {
        self.validate()?;
        let (lo, hi) = self.domain();
        if tau <= lo {
            return Ok(RateValue { value: f64::INFINITY, domain: RateDomain::BelowMinimum });
        }
        if tau > hi {
            return Ok(RateValue { value: f64::INFINITY, domain: RateDomain::AboveQuenched });
        }
        let value = match self {
            RateFunctionModel::BernoulliBound { p_zero, .. } => -norm1(n) * p_zero.ln(),
            RateFunctionModel::Table { nodes, .. } => {
                let i = nodes.partition_point(|&(t, _)| t <= tau);
                if i == 0 {
                    nodes[0].1
                } else if i == nodes.len() {
                    nodes[i - 1].1
                } else {
                    let (t0, v0) = nodes[i - 1];
                    let (t1, v1) = nodes[i];
                    if tau == t0 {
                        v0
                    } else {
                        v0 + (v1 - v0) * (tau - t0) / (t1 - t0)
                    }
                }
            }
        };
        Ok(RateValue { value: value.max(0.0), domain: RateDomain::Inside })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_model_values() {
        let m = RateFunctionModel::BernoulliBound { p_zero: (-2.0f64).exp(), tau_min: 0.0, tau_q: 1.0 };
        assert!((m.eval(&[1.0, 0.0], 0.5).unwrap().value - 2.0).abs() < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((m.eval(&[s, s], 0.5).unwrap().value - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(m.eval(&[1.0, 0.0], 0.0).unwrap().domain, RateDomain::BelowMinimum);
        assert_eq!(m.eval(&[1.0, 0.0], 1.5).unwrap().domain, RateDomain::AboveQuenched);
        assert!(m.eval(&[1.0, 0.0], 1.5).unwrap().value.is_infinite());
        assert_eq!(m.eval(&[1.0, 0.0], 1.0).unwrap().domain, RateDomain::Inside);
    }

    #[test]
    fn table_reproduces_nodes() {
        let nodes = vec![(0.1, 3.0), (0.4, 1.0), (0.9, 0.2)];
        let m = RateFunctionModel::Table { nodes: nodes.clone(), tau_min: 0.05, tau_q: 1.0 };
        for (t, v) in nodes {
            assert_eq!(m.eval(&[1.0, 0.0], t).unwrap().value, v);
        }
        assert!((m.eval(&[1.0, 0.0], 0.25).unwrap().value - 2.0).abs() < 1e-12);
    }
}
