use super::ModelSet;
use crate::cost_models::{damage_fraction_dm, learning_terms};
use crate::economy::{bau_cumulative_between, bau_rate_unchecked};
use crate::error::{Error, Result};

/// Exogenous quantities at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exogenous {
    pub t: f64,
    /// `i(t)`.
    pub interest: f64,
    /// `I(t)`.
    pub cum_interest: f64,
    /// `r(t)`.
    pub growth: f64,
    /// BAU emission rate (maximum abatement rate), Gton/yr.
    pub m_max: f64,
    /// Trillion $.
    pub gdp: f64,
    /// BAU emissions accumulated over `[0, t]`, Gton.
    pub bau_cum: f64,
}

impl Exogenous {
    /// Evaluates every driver at `t`, integrating BAU emissions from zero.
    pub fn at(models: &ModelSet, t: f64) -> Result<Self> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
        }
        let bau_cum = bau_cumulative_between(&models.econ, &models.growth, 0.0, t);
        Ok(Self::with_bau_cum(models, t, bau_cum))
    }

    pub(crate) fn with_bau_cum(models: &ModelSet, t: f64, bau_cum: f64) -> Self {
        Exogenous {
            t,
            interest: models.interest.rate(t),
            cum_interest: models.interest.integral_unchecked(t),
            growth: models.growth.rate(t),
            m_max: bau_rate_unchecked(&models.econ, &models.growth, t),
            gdp: models.econ.gdp0 * models.growth.integral_unchecked(t).exp(),
            bau_cum,
        }
    }

    /// Cumulative emissions since preindustrial given cumulative abatement `m`.
    pub fn cum_emissions(&self, models: &ModelSet, m: f64) -> f64 {
        models.econ.e_hist + self.bau_cum - m
    }
}

/// The two sides of the Euler-Lagrange equation, term by term.
///
/// `lhs_coeff * M'' / M' = interest + additive + bau_growth + multiplicative + damage`,
/// with `lhs_coeff = c1 c2 (c2 + 1) sigma^c2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElTerms {
    pub lhs_coeff: f64,
    /// `i (c0 + c1 (c2 + 1) sigma^c2)`.
    pub interest: f64,
    /// `-i f(M)`.
    pub additive: f64,
    /// `lhs_coeff * theta * r`.
    pub bau_growth: f64,
    /// `-c1 c2 sigma^c2 M' h'/h`.
    pub multiplicative: f64,
    /// `d'(M) G / h`.
    pub damage: f64,
}

impl ElTerms {
    pub fn rhs(&self) -> f64 {
        self.interest + self.additive + self.bau_growth + self.multiplicative + self.damage
    }

    pub fn rhs_magnitude(&self) -> f64 {
        self.interest.abs()
            + self.additive.abs()
            + self.bau_growth.abs()
            + self.multiplicative.abs()
            + self.damage.abs()
    }
}

pub fn el_terms(models: &ModelSet, exo: &Exogenous, m: f64, m_dot: f64) -> Result<ElTerms> {
    if !(m_dot > 0.0) {
        return Err(Error::Singular(format!(
            "Euler-Lagrange equation needs a positive abatement rate, got {m_dot} at t = {}",
            exo.t
        )));
    }
    let c = &models.curve;
    let lt = learning_terms(&models.learning, m)?;
    let sigma = m_dot / exo.m_max;
    let sp = sigma.powf(c.c2);
    let lhs_coeff = c.c1 * c.c2 * (c.c2 + 1.0) * sp;
    let damage = if models.damage.is_active() {
        let dd = damage_fraction_dm(&models.damage, exo.cum_emissions(models, m))?;
        dd * exo.gdp / lt.h
    } else {
        0.0
    };
    Ok(ElTerms {
        lhs_coeff,
        interest: exo.interest * (c.c0 + c.c1 * (c.c2 + 1.0) * sp),
        additive: -exo.interest * lt.f,
        bau_growth: lhs_coeff * models.econ.theta * exo.growth,
        multiplicative: -c.c1 * c.c2 * sp * m_dot * lt.dh / lt.h,
        damage,
    })
}

pub(crate) fn acceleration_from(terms: &ElTerms, m_dot: f64) -> f64 {
    m_dot * terms.rhs() / terms.lhs_coeff
}

/// `M''` at time `t` for cumulative abatement `m` and abatement rate `m_dot`.
pub fn el_acceleration(models: &ModelSet, t: f64, m: f64, m_dot: f64) -> Result<f64> {
    let exo = Exogenous::at(models, t)?;
    let terms = el_terms(models, &exo, m, m_dot)?;
    Ok(acceleration_from(&terms, m_dot))
}
