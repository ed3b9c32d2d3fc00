//! Exogenous drivers: GDP growth and interest-rate schedules, business-as-usual
//! (BAU) emissions and their time integrals.
//!
//! BAU emissions grow with GDP through the income elasticity `theta`, so that
//! `E_bau'(t) = E_bau'(0) * exp(theta * R(t))` where `R` is the integrated GDP
//! growth rate. The maximum abatement rate at time `t` is taken equal to the
//! BAU emission rate.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::adaptive_simpson;

/// Relative tolerance for BAU quadratures.
pub const BAU_QUAD_TOL: f64 = 1e-11;

/// A time-varying rate (GDP growth `r(t)` or interest `i(t)`) with a closed-form
/// antiderivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GrowthSchedule {
    Constant {
        base_rate: f64,
    },
    /// `rate(t) = base_rate * exp(-t / efold_time)`.
    ExponentialDecay {
        base_rate: f64,
        efold_time: f64,
    },
}

impl GrowthSchedule {
    pub fn constant(rate: f64) -> Self {
        GrowthSchedule::Constant { base_rate: rate }
    }

    pub fn exponential_decay(base_rate: f64, efold_time: f64) -> Self {
        GrowthSchedule::ExponentialDecay {
            base_rate,
            efold_time,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            GrowthSchedule::Constant { base_rate } => {
                if !base_rate.is_finite() {
                    return Err(invalid("base_rate", "must be finite"));
                }
            }
            GrowthSchedule::ExponentialDecay {
                base_rate,
                efold_time,
            } => {
                if !base_rate.is_finite() {
                    return Err(invalid("base_rate", "must be finite"));
                }
                if !(efold_time > 0.0 && efold_time.is_finite()) {
                    return Err(invalid("efold_time", "must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn base_rate(&self) -> f64 {
        match *self {
            GrowthSchedule::Constant { base_rate }
            | GrowthSchedule::ExponentialDecay { base_rate, .. } => base_rate,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, GrowthSchedule::Constant { .. })
    }

    /// Instantaneous rate at `t`.
    pub fn rate(&self, t: f64) -> f64 {
        match *self {
            GrowthSchedule::Constant { base_rate } => base_rate,
            GrowthSchedule::ExponentialDecay {
                base_rate,
                efold_time,
            } => base_rate * (-t / efold_time).exp(),
        }
    }

    /// `integral_0^t rate(s) ds`, without range checks.
    pub(crate) fn integral_unchecked(&self, t: f64) -> f64 {
        match *self {
            GrowthSchedule::Constant { base_rate } => base_rate * t,
            GrowthSchedule::ExponentialDecay {
                base_rate,
                efold_time,
            } => -efold_time * base_rate * (-t / efold_time).exp_m1(),
        }
    }

    /// Limit of the integral as `t -> infinity`, when finite.
    pub fn integral_limit(&self) -> Option<f64> {
        match *self {
            GrowthSchedule::Constant { base_rate: 0.0 } => Some(0.0),
            GrowthSchedule::Constant { .. } => None,
            GrowthSchedule::ExponentialDecay {
                base_rate,
                efold_time,
            } => Some(base_rate * efold_time),
        }
    }
}

/// `R(t)` (or `I(t)`): the exact integral of the schedule from 0 to `t`.
pub fn integrated_rate(schedule: &GrowthSchedule, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(schedule.integral_unchecked(t))
}

/// Parameters of the global economy at the start of the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EconomyParams {
    /// BAU emission rate at t = 0, Gton CO2/yr.
    pub e_bau0: f64,
    /// World GDP at t = 0, trillion $.
    pub gdp0: f64,
    /// Income elasticity of emissions.
    pub theta: f64,
    /// Cumulative emissions from preindustrial time to t = 0, Gton CO2.
    pub e_hist: f64,
    /// Horizon `T`, years.
    pub horizon: f64,
}

/// Approximate 2015 global fossil CO2 emissions, Gton/yr.
pub const DEFAULT_E_BAU0: f64 = 40.0;
/// 2015-era world GDP, trillion $.
pub const DEFAULT_GDP0: f64 = 105.0;
pub const DEFAULT_THETA: f64 = 0.75;
pub const DEFAULT_HORIZON: f64 = 80.0;
/// CO2-induced warming at t = 0, K.
pub const DEFAULT_PRESENT_WARMING: f64 = 1.0;

impl Default for EconomyParams {
    fn default() -> Self {
        EconomyParams {
            e_bau0: DEFAULT_E_BAU0,
            gdp0: DEFAULT_GDP0,
            theta: DEFAULT_THETA,
            e_hist: DEFAULT_PRESENT_WARMING / crate::cost_models::DEFAULT_ALPHA,
            horizon: DEFAULT_HORIZON,
        }
    }
}

impl EconomyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.e_bau0 > 0.0 && self.e_bau0.is_finite()) {
            return Err(invalid("e_bau0", "must be positive"));
        }
        if !(self.gdp0 > 0.0 && self.gdp0.is_finite()) {
            return Err(invalid("gdp0", "must be positive"));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(invalid("theta", "must lie in (0, 1]"));
        }
        if !(self.e_hist >= 0.0 && self.e_hist.is_finite()) {
            return Err(invalid("e_hist", "must be nonnegative"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(invalid("horizon", "must be positive"));
        }
        Ok(())
    }
}

/// Which part of the emission record a cumulative total covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    /// Emissions from t = 0 onward.
    Future,
    /// Future emissions plus the historical total `e_hist`.
    FromPreindustrial,
}

fn check_time(t: f64) -> Result<()> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    Ok(())
}

/// BAU emission rate at `t`, Gton/yr. Equal to the maximum abatement rate.
pub fn bau_emission_rate(econ: &EconomyParams, g: &GrowthSchedule, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(bau_rate_unchecked(econ, g, t))
}

pub(crate) fn bau_rate_unchecked(econ: &EconomyParams, g: &GrowthSchedule, t: f64) -> f64 {
    econ.e_bau0 * (econ.theta * g.integral_unchecked(t)).exp()
}

/// Cumulative BAU emissions over `[0, t]`, by adaptive quadrature.
pub fn bau_cumulative(
    econ: &EconomyParams,
    g: &GrowthSchedule,
    t: f64,
    baseline: Baseline,
) -> Result<f64> {
    check_time(t)?;
    let future = bau_cumulative_between(econ, g, 0.0, t);
    Ok(match baseline {
        Baseline::Future => future,
        Baseline::FromPreindustrial => future + econ.e_hist,
    })
}

pub(crate) fn bau_cumulative_between(
    econ: &EconomyParams,
    g: &GrowthSchedule,
    a: f64,
    b: f64,
) -> f64 {
    adaptive_simpson(|s| bau_rate_unchecked(econ, g, s), a, b, BAU_QUAD_TOL)
}

/// World GDP at `t`, trillion $.
pub fn gdp(econ: &EconomyParams, g: &GrowthSchedule, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(econ.gdp0 * g.integral_unchecked(t).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn econ() -> EconomyParams {
        EconomyParams {
            e_bau0: 40.0,
            gdp0: 100.0,
            theta: 0.75,
            e_hist: 0.0,
            horizon: 80.0,
        }
    }

    #[test]
    fn integrated_rate_examples() {
        let c = GrowthSchedule::constant(0.04);
        assert!((integrated_rate(&c, 10.0).unwrap() - 0.4).abs() < 1e-15);
        let d = GrowthSchedule::exponential_decay(0.04, 40.0);
        // 1.6 * (1 - e^-1)
        let expected = 1.011_392_894_125_692_2;
        assert!((integrated_rate(&d, 40.0).unwrap() - expected).abs() < 1e-12);
        assert_eq!(integrated_rate(&d, 0.0).unwrap(), 0.0);
        assert_eq!(integrated_rate(&c, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn negative_time_is_a_domain_error() {
        let c = GrowthSchedule::constant(0.04);
        assert!(matches!(integrated_rate(&c, -1.0), Err(Error::Domain(_))));
        assert!(bau_emission_rate(&econ(), &c, -0.5).is_err());
        assert!(gdp(&econ(), &c, -0.5).is_err());
    }

    #[test]
    fn bau_rate_examples() {
        let c = GrowthSchedule::constant(0.04);
        assert_eq!(bau_emission_rate(&econ(), &c, 0.0).unwrap(), 40.0);
        let v = bau_emission_rate(&econ(), &c, 10.0).unwrap();
        assert!((v - 40.0 * 0.3_f64.exp()).abs() < 1e-12);
        let d = GrowthSchedule::exponential_decay(0.04, 40.0);
        let far = bau_emission_rate(&econ(), &d, 4000.0).unwrap();
        assert!((far - 40.0 * 1.2_f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn cumulative_matches_closed_form_for_constant_growth() {
        let c = GrowthSchedule::constant(0.04);
        let k = 0.75 * 0.04;
        for &t in &[1.0, 10.0, 80.0, 200.0] {
            let q = bau_cumulative(&econ(), &c, t, Baseline::Future).unwrap();
            let exact = 40.0 * (k * t).exp_m1() / k;
            assert!(((q - exact) / exact).abs() < 1e-8, "t = {t}");
        }
        assert_eq!(
            bau_cumulative(&econ(), &c, 0.0, Baseline::Future).unwrap(),
            0.0
        );
        let flat = GrowthSchedule::constant(0.0);
        let q = bau_cumulative(&econ(), &flat, 30.0, Baseline::Future).unwrap();
        assert!((q - 1200.0).abs() < 1e-9);
    }

    #[test]
    fn history_is_added_on_request() {
        let mut e = econ();
        e.e_hist = 2000.0;
        let c = GrowthSchedule::constant(0.0);
        let q = bau_cumulative(&e, &c, 10.0, Baseline::FromPreindustrial).unwrap();
        assert!((q - 2400.0).abs() < 1e-9);
    }

    #[test]
    fn gdp_examples() {
        let c = GrowthSchedule::constant(0.04);
        assert_eq!(gdp(&econ(), &c, 0.0).unwrap(), 100.0);
        assert!((gdp(&econ(), &c, 25.0).unwrap() - 100.0 * 1f64.exp()).abs() < 1e-10);
        let d = GrowthSchedule::exponential_decay(0.04, 40.0);
        assert!((gdp(&econ(), &d, 5000.0).unwrap() - 100.0 * 1.6_f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(GrowthSchedule::exponential_decay(0.04, 0.0)
            .validate()
            .is_err());
        assert!(GrowthSchedule::constant(f64::NAN).validate().is_err());
        let mut e = econ();
        e.theta = 1.5;
        assert!(e.validate().is_err());
        e.theta = 0.75;
        e.e_bau0 = 0.0;
        assert!(e.validate().is_err());
        assert!(econ().validate().is_ok());
    }
}
