use serde::{Deserialize, Serialize};

use super::learning::{learning_terms, LearningModel};
use crate::error::{invalid, Error, Result};

/// Average abatement cost without learning,
/// `gamma0(sigma) = c0 + c1 * sigma^c2` with `sigma = m_dot / m_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbatementCostCurve {
    /// Intercept, trillion $/Gton. May be negative.
    pub c0: f64,
    /// Coefficient, trillion $/Gton.
    pub c1: f64,
    /// Exponent.
    pub c2: f64,
}

/// Marginal cost at `sigma = 1` for the default curve: 550 $/ton.
pub const DEFAULT_MAX_MARGINAL_COST: f64 = 0.55;
pub const DEFAULT_C2: f64 = 1.6;

impl Default for AbatementCostCurve {
    fn default() -> Self {
        AbatementCostCurve::from_max_marginal(0.0, DEFAULT_MAX_MARGINAL_COST, DEFAULT_C2)
    }
}

impl AbatementCostCurve {
    /// Curve whose marginal cost at `sigma = 1` (no learning) equals `c0 + max_marginal`.
    pub fn from_max_marginal(c0: f64, max_marginal: f64, c2: f64) -> Self {
        AbatementCostCurve {
            c0,
            c1: max_marginal / (1.0 + c2),
            c2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.c0.is_finite() {
            return Err(invalid("c0", "must be finite"));
        }
        if !(self.c1 > 0.0 && self.c1.is_finite()) {
            return Err(invalid("c1", "average cost must be increasing (c1 > 0)"));
        }
        if !(self.c2 > 0.0 && self.c2.is_finite()) {
            return Err(invalid("c2", "average cost must be increasing (c2 > 0)"));
        }
        Ok(())
    }

    /// `gamma0(sigma)`.
    pub fn gamma0(&self, sigma: f64) -> f64 {
        self.c0 + self.c1 * sigma.powf(self.c2)
    }

    /// Marginal cost of `sigma * gamma0(sigma) * m_max` with respect to `m_dot`.
    pub fn marginal0(&self, sigma: f64) -> f64 {
        self.c0 + (self.c2 + 1.0) * self.c1 * sigma.powf(self.c2)
    }
}

fn check_rates(m_dot: f64, m_max: f64) -> Result<f64> {
    if !(m_max > 0.0) {
        return Err(Error::Domain(format!(
            "maximum abatement rate must be positive, got {m_max}"
        )));
    }
    if !(m_dot >= 0.0) {
        return Err(Error::Domain(format!(
            "abatement rate must be nonnegative, got {m_dot}"
        )));
    }
    Ok(m_dot / m_max)
}

/// Average abatement cost with learning, `(gamma0(sigma) - f(M)) * h(M)`.
pub fn average_cost(
    curve: &AbatementCostCurve,
    learn: &LearningModel,
    m_dot: f64,
    m_max: f64,
    cum_abatement: f64,
) -> Result<f64> {
    let sigma = check_rates(m_dot, m_max)?;
    let lt = learning_terms(learn, cum_abatement)?;
    Ok((curve.gamma0(sigma) - lt.f) * lt.h)
}

/// Marginal abatement cost `{c0 + (c2 + 1) c1 sigma^c2 - f(M)} h(M)`.
pub fn marginal_cost(
    curve: &AbatementCostCurve,
    learn: &LearningModel,
    m_dot: f64,
    m_max: f64,
    cum_abatement: f64,
) -> Result<f64> {
    let sigma = check_rates(m_dot, m_max)?;
    let lt = learning_terms(learn, cum_abatement)?;
    Ok((curve.marginal0(sigma) - lt.f) * lt.h)
}
