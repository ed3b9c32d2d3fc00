//! Closed forms for the case without learning or damages.
//!
//! With a zero-intercept cost curve the optimal abatement rate relative to
//! BAU grows as `exp(I(t)/c2)`, so every quantity of interest reduces to the
//! integral
//!
//! ```text
//! J(N, T) = ∫_N^T exp(I(t)/c2 + θ R(t)) dt
//! ```
//!
//! which has an elementary form when both rates are constant and is otherwise
//! evaluated by adaptive quadrature.

use serde::{Deserialize, Serialize};

use crate::cost_models::{AbatementCostCurve, USD_PER_TON_PER_TRILLION_PER_GTON};
use crate::economy::{EconomyParams, GrowthSchedule};
use crate::error::{invalid, Error, Result};
use crate::pathway_solver::ModelSet;
use crate::quadrature::adaptive_simpson;

/// Relative tolerance of every quadrature in this module.
pub const QUAD_TOL: f64 = 1e-12;

/// How the exponential integrals are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntegralRoute {
    /// Elementary form when both rates are constant, quadrature otherwise.
    #[default]
    Auto,
    /// Elementary form; an error unless both rates are constant.
    ClosedForm,
    Quadrature,
}

/// A no-learning, no-damage problem with abatement starting at `start_year`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticScenario {
    pub econ: EconomyParams,
    /// GDP growth rate `r(t)`.
    pub growth: GrowthSchedule,
    /// Interest rate `i(t)`.
    pub interest: GrowthSchedule,
    /// Must have `c0 = 0`.
    pub curve: AbatementCostCurve,
    /// Cumulative abatement goal, Gton.
    pub m_tot: f64,
    /// Start of abatement `N`, years.
    pub start_year: f64,
}

impl AnalyticScenario {
    /// Scenario sharing `models`' economy, rates and cost curve. Fails if any
    /// learning or damage model is active, since no closed form covers them.
    pub fn from_models(models: &ModelSet, m_tot: f64, start_year: f64) -> Result<Self> {
        if models.learning != crate::cost_models::LearningModel::None {
            return Err(Error::Domain(
                "closed forms assume no endogenous learning".into(),
            ));
        }
        if models.damage.is_active() {
            return Err(Error::Domain(
                "closed forms assume no climate damages".into(),
            ));
        }
        let s = AnalyticScenario {
            econ: models.econ,
            growth: models.growth,
            interest: models.interest,
            curve: models.curve,
            m_tot,
            start_year,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.econ.validate()?;
        self.growth.validate()?;
        self.interest.validate()?;
        self.curve.validate()?;
        if self.curve.c0 != 0.0 {
            return Err(invalid("c0", "closed forms need a zero intercept"));
        }
        if !(self.m_tot >= 0.0 && self.m_tot.is_finite()) {
            return Err(invalid(
                "m_tot",
                format!("must be nonnegative, got {}", self.m_tot),
            ));
        }
        if !(self.start_year >= 0.0 && self.start_year < self.econ.horizon) {
            return Err(invalid(
                "start_year",
                format!(
                    "must lie in [0, {}), got {}",
                    self.econ.horizon, self.start_year
                ),
            ));
        }
        Ok(())
    }

    fn c2(&self) -> f64 {
        self.curve.c2
    }

    fn horizon(&self) -> f64 {
        self.econ.horizon
    }

    /// `I(t)/c2 + θ R(t)`.
    fn exponent(&self, t: f64) -> f64 {
        self.interest.integral_unchecked(t) / self.c2()
            + self.econ.theta * self.growth.integral_unchecked(t)
    }

    /// `i(t)/c2 + θ r(t)`, the growth rate of the optimal abatement rate.
    fn exponent_rate(&self, t: f64) -> f64 {
        self.interest.rate(t) / self.c2() + self.econ.theta * self.growth.rate(t)
    }

    fn constant_rates(&self) -> bool {
        self.growth.is_constant() && self.interest.is_constant()
    }

    /// Goal in years of present BAU emissions, `M_tot / Ė_BAU(0)`.
    fn goal_years(&self) -> f64 {
        self.m_tot / self.econ.e_bau0
    }
}

fn closed_form_available(s: &AnalyticScenario, route: IntegralRoute) -> Result<bool> {
    match route {
        IntegralRoute::Auto => Ok(s.constant_rates()),
        IntegralRoute::Quadrature => Ok(false),
        IntegralRoute::ClosedForm if s.constant_rates() => Ok(true),
        IntegralRoute::ClosedForm => Err(Error::Domain(
            "closed forms need constant interest and growth rates".into(),
        )),
    }
}

/// `∫_a^b exp(k t) dt`, stable for small `k`.
fn exp_integral(k: f64, a: f64, b: f64) -> f64 {
    if k == 0.0 {
        b - a
    } else {
        (k * a).exp() * (k * (b - a)).exp_m1() / k
    }
}

/// `J = ∫_N^T exp(I/c2 + θR) dt`, years.
pub fn abatement_integral(s: &AnalyticScenario) -> Result<f64> {
    abatement_integral_with(s, IntegralRoute::Auto)
}

pub fn abatement_integral_with(s: &AnalyticScenario, route: IntegralRoute) -> Result<f64> {
    s.validate()?;
    Ok(if closed_form_available(s, route)? {
        exp_integral(s.exponent_rate(0.0), s.start_year, s.horizon())
    } else {
        adaptive_simpson(|t| s.exponent(t).exp(), s.start_year, s.horizon(), QUAD_TOL)
    })
}

/// `∫_0^T exp(θR) dt`: future BAU emissions in years of present BAU emissions.
pub fn bau_integral_with(s: &AnalyticScenario, route: IntegralRoute) -> Result<f64> {
    s.validate()?;
    let theta = s.econ.theta;
    Ok(if closed_form_available(s, route)? {
        exp_integral(theta * s.growth.rate(0.0), 0.0, s.horizon())
    } else {
        adaptive_simpson(
            |t| (theta * s.growth.integral_unchecked(t)).exp(),
            0.0,
            s.horizon(),
            QUAD_TOL,
        )
    })
}

/// Optimal abatement rate relative to BAU at the start of abatement.
pub fn sigma_start(s: &AnalyticScenario) -> Result<f64> {
    let j = abatement_integral(s)?;
    Ok(s.goal_years() * (s.interest.integral_unchecked(s.start_year) / s.c2()).exp() / j)
}

/// Optimal abatement rate relative to BAU at the horizon.
pub fn sigma_end(s: &AnalyticScenario) -> Result<f64> {
    let j = abatement_integral(s)?;
    Ok(s.goal_years() * (s.interest.integral_unchecked(s.horizon()) / s.c2()).exp() / j)
}

/// Present value of the optimal abatement cost, trillion $.
pub fn total_cost(s: &AnalyticScenario) -> Result<f64> {
    let j = abatement_integral(s)?;
    let c2 = s.c2();
    Ok(s.curve.c1 * s.goal_years().powf(c2 + 1.0) * s.econ.e_bau0 / j.powf(c2))
}

/// Relative growth of the total cost per year of delay, `d ln C / dN`.
pub fn delay_cost_growth(s: &AnalyticScenario) -> Result<f64> {
    delay_cost_growth_with(s, IntegralRoute::Auto)
}

/// With constant rates the closed form is `c2 k / (exp(k (T - N)) - 1)` with
/// `k = i/c2 + θr`; otherwise `c2 exp(I(N)/c2 + θR(N)) / J`.
pub fn delay_cost_growth_with(s: &AnalyticScenario, route: IntegralRoute) -> Result<f64> {
    s.validate()?;
    let c2 = s.c2();
    if closed_form_available(s, route)? {
        let k = s.exponent_rate(0.0);
        let span = s.horizon() - s.start_year;
        return Ok(if k == 0.0 {
            c2 / span
        } else {
            c2 * k / (k * span).exp_m1()
        });
    }
    let j = abatement_integral_with(s, route)?;
    Ok(c2 * s.exponent(s.start_year).exp() / j)
}

/// Carbon tax at the start of abatement, $/ton.
pub fn initial_tax(s: &AnalyticScenario) -> Result<f64> {
    let j = abatement_integral(s)?;
    let c2 = s.c2();
    let per_gton = s.curve.c1
        * (c2 + 1.0)
        * s.goal_years().powf(c2)
        * s.interest.integral_unchecked(s.start_year).exp()
        / j.powf(c2);
    Ok(per_gton * USD_PER_TON_PER_TRILLION_PER_GTON)
}

/// Relative growth of the initial tax per year of delay: the interest rate at
/// `N` plus [`delay_cost_growth`].
pub fn tax_delay_growth(s: &AnalyticScenario) -> Result<f64> {
    Ok(s.interest.rate(s.start_year) + delay_cost_growth(s)?)
}

/// Cumulative abatement that limits future warming to `warming_increase` K
/// above present, Gton. Negative when BAU already stays below the goal.
pub fn goal_abatement(s: &AnalyticScenario, alpha: f64, warming_increase: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(invalid("alpha", format!("must be positive, got {alpha}")));
    }
    let b = bau_integral_with(s, IntegralRoute::Auto)?;
    Ok(s.econ.e_bau0 * b - warming_increase / alpha)
}

/// Initial tax needed to hold warming at `final_warming` K at the horizon,
/// starting from `present_warming` K. The scenario's own `m_tot` is ignored.
/// Zero when BAU emissions already meet the goal.
pub fn initial_tax_from_goal(
    s: &AnalyticScenario,
    alpha: f64,
    final_warming: f64,
    present_warming: f64,
) -> Result<f64> {
    let m_tot = goal_abatement(s, alpha, final_warming - present_warming)?;
    if m_tot <= 0.0 {
        return Ok(0.0);
    }
    initial_tax(&AnalyticScenario { m_tot, ..*s })
}

/// Lowest future warming reachable without net-negative emissions, and how
/// it moves with the start of abatement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OvershootThreshold {
    /// Minimum future warming, K.
    pub warming: f64,
    /// Derivative with respect to the start year, K/yr.
    pub d_dn: f64,
    /// Second derivative with respect to the start year, K/yr².
    pub d2_dn2: f64,
}

/// Any goal below `warming` forces the optimal path to exceed full abatement
/// (`sigma > 1`) before the horizon. The scenario's `m_tot` is ignored.
pub fn overshoot_threshold(s: &AnalyticScenario, alpha: f64) -> Result<OvershootThreshold> {
    overshoot_threshold_with(s, alpha, IntegralRoute::Auto)
}

pub fn overshoot_threshold_with(
    s: &AnalyticScenario,
    alpha: f64,
    route: IntegralRoute,
) -> Result<OvershootThreshold> {
    if !(alpha > 0.0) {
        return Err(invalid("alpha", format!("must be positive, got {alpha}")));
    }
    let b = bau_integral_with(s, route)?;
    let j = abatement_integral_with(s, route)?;
    let scale = alpha * s.econ.e_bau0;
    let tail = (-s.interest.integral_unchecked(s.horizon()) / s.c2()).exp();
    let d_dn = scale * tail * s.exponent(s.start_year).exp();
    Ok(OvershootThreshold {
        warming: scale * (b - tail * j),
        d_dn,
        d2_dn2: s.exponent_rate(s.start_year) * d_dn,
    })
}

/// Share of future BAU emissions removed by the largest goal reachable
/// without overshoot.
pub fn abated_fraction(s: &AnalyticScenario) -> Result<f64> {
    let b = bau_integral_with(s, IntegralRoute::Auto)?;
    let j = abatement_integral(s)?;
    let tail = (-s.interest.integral_unchecked(s.horizon()) / s.c2()).exp();
    Ok(tail * j / b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost_models::DEFAULT_ALPHA;

    fn constant(i: f64, r: f64, n: f64, t: f64) -> AnalyticScenario {
        AnalyticScenario {
            econ: EconomyParams {
                horizon: t,
                ..EconomyParams::default()
            },
            growth: GrowthSchedule::constant(r),
            interest: GrowthSchedule::constant(i),
            curve: AbatementCostCurve::default(),
            m_tot: 3000.0,
            start_year: n,
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn no_discounting_no_growth_is_a_constant_rate() {
        let s = constant(0.0, 0.0, 0.0, 80.0);
        let sigma = sigma_start(&s).unwrap();
        assert!(rel(sigma, 3000.0 / (40.0 * 80.0)) < 1e-15);
        assert_eq!(sigma, sigma_end(&s).unwrap());
    }

    #[test]
    fn routes_agree_for_constant_rates() {
        for (i, r, n) in [(0.03, 0.04, 0.0), (0.01, 0.0, 30.0), (0.05, 0.02, 79.0)] {
            let s = constant(i, r, n, 80.0);
            let q = abatement_integral_with(&s, IntegralRoute::Quadrature).unwrap();
            let c = abatement_integral_with(&s, IntegralRoute::ClosedForm).unwrap();
            assert!(rel(q, c) < 1e-10);
            let q = delay_cost_growth_with(&s, IntegralRoute::Quadrature).unwrap();
            let c = delay_cost_growth_with(&s, IntegralRoute::ClosedForm).unwrap();
            assert!(rel(q, c) < 1e-10);
            let q = overshoot_threshold_with(&s, DEFAULT_ALPHA, IntegralRoute::Quadrature).unwrap();
            let c = overshoot_threshold_with(&s, DEFAULT_ALPHA, IntegralRoute::ClosedForm).unwrap();
            assert!(rel(q.warming, c.warming) < 1e-10);
            assert!(rel(q.d_dn, c.d_dn) < 1e-12);
        }
    }

    #[test]
    fn closed_form_rejects_decaying_growth() {
        let s = AnalyticScenario {
            growth: GrowthSchedule::exponential_decay(0.04, 40.0),
            ..constant(0.03, 0.04, 0.0, 80.0)
        };
        assert!(abatement_integral_with(&s, IntegralRoute::ClosedForm).is_err());
        assert!(abatement_integral(&s).is_ok());
    }

    #[test]
    fn cost_is_homogeneous_in_the_goal() {
        let s = constant(0.03, 0.04, 10.0, 80.0);
        let double = AnalyticScenario { m_tot: 6000.0, ..s };
        let ratio = total_cost(&double).unwrap() / total_cost(&s).unwrap();
        assert!(rel(ratio, 2f64.powf(2.6)) < 1e-13);
    }

    #[test]
    fn delay_raises_sigma_and_cost() {
        let mut last = (0.0, 0.0);
        for n in [0.0, 10.0, 20.0, 40.0, 60.0] {
            let s = constant(0.03, 0.04, n, 80.0);
            let now = (sigma_start(&s).unwrap(), total_cost(&s).unwrap());
            assert!(now.0 > last.0 && now.1 > last.1);
            last = now;
        }
    }

    #[test]
    fn delay_growth_is_the_log_derivative_of_cost() {
        let s = AnalyticScenario {
            growth: GrowthSchedule::exponential_decay(0.04, 40.0),
            ..constant(0.03, 0.04, 25.0, 80.0)
        };
        let h = 1e-3;
        let at = |n| {
            total_cost(&AnalyticScenario { start_year: n, ..s })
                .unwrap()
                .ln()
        };
        let fd = (at(25.0 + h) - at(25.0 - h)) / (2.0 * h);
        assert!(rel(fd, delay_cost_growth(&s).unwrap()) < 1e-6);
    }

    #[test]
    fn delay_growth_limits() {
        let k = 0.03 / 1.6 + 0.75 * 0.04;
        // Near the horizon the growth tends to c2/(T-N); the leading
        // correction is a factor 1 - k (T-N)/2.
        let s = constant(0.03, 0.04, 79.75, 80.0);
        assert!(rel(delay_cost_growth(&s).unwrap(), 1.6 / 0.25) < 0.01);
        let s = constant(0.03, 0.04, 79.0, 80.0);
        let gap = 1.0 - delay_cost_growth(&s).unwrap() / 1.6;
        assert!((gap - k / 2.0).abs() < 1e-3, "{gap}");
        let s = constant(0.03, 0.04, 0.0, 200.0);
        let limit = 1.6 * k / (k * 200.0f64).exp();
        assert!(rel(delay_cost_growth(&s).unwrap(), limit) < 0.01);
    }

    #[test]
    fn tax_delay_growth_adds_interest() {
        let s = constant(0.03, 0.04, 15.0, 80.0);
        let diff = tax_delay_growth(&s).unwrap() - delay_cost_growth(&s).unwrap();
        assert!((diff - 0.03).abs() < 1e-12);
    }

    #[test]
    fn initial_tax_is_the_marginal_cost_at_sigma_start() {
        let s = constant(0.02, 0.03, 5.0, 80.0);
        let direct = s.curve.marginal0(sigma_start(&s).unwrap()) * 1000.0;
        assert!(rel(initial_tax(&s).unwrap(), direct) < 1e-13);
    }

    #[test]
    fn goal_tax_falls_with_interest() {
        let mut last = f64::INFINITY;
        for i in [0.01, 0.02, 0.03, 0.05] {
            let s = constant(i, 0.02, 0.0, 80.0);
            let p = initial_tax_from_goal(&s, DEFAULT_ALPHA, 2.0, 1.0).unwrap();
            assert!(p < last);
            last = p;
        }
    }

    #[test]
    fn goal_already_met_costs_nothing() {
        let s = constant(0.03, 0.04, 0.0, 80.0);
        assert_eq!(
            initial_tax_from_goal(&s, DEFAULT_ALPHA, 50.0, 1.0).unwrap(),
            0.0
        );
    }

    #[test]
    fn overshoot_threshold_rises_ever_faster_with_delay() {
        let mut last: Option<OvershootThreshold> = None;
        for n in (0..=40).step_by(5) {
            let s = constant(0.03, 0.04, n as f64, 80.0);
            let o = overshoot_threshold(&s, DEFAULT_ALPHA).unwrap();
            assert!(o.d_dn > 0.0 && o.d2_dn2 > 0.0);
            if let Some(prev) = last {
                assert!(o.warming > prev.warming);
            }
            last = Some(o);
        }
        let s = constant(0.03, 0.04, 20.0, 80.0);
        let h = 1e-3;
        let w = |n| {
            overshoot_threshold(&AnalyticScenario { start_year: n, ..s }, DEFAULT_ALPHA)
                .unwrap()
                .warming
        };
        let o = overshoot_threshold(&s, DEFAULT_ALPHA).unwrap();
        assert!(rel((w(20.0 + h) - w(20.0 - h)) / (2.0 * h), o.d_dn) < 1e-6);
    }

    #[test]
    fn sigma_end_below_one_iff_goal_above_threshold() {
        let s = constant(0.03, 0.04, 10.0, 80.0);
        let threshold = overshoot_threshold(&s, DEFAULT_ALPHA).unwrap().warming;
        for goal in [
            0.5 * threshold,
            0.99 * threshold,
            1.01 * threshold,
            2.0 * threshold,
        ] {
            let m_tot = goal_abatement(&s, DEFAULT_ALPHA, goal).unwrap();
            let sig = sigma_end(&AnalyticScenario { m_tot, ..s }).unwrap();
            assert_eq!(sig < 1.0, goal > threshold, "goal {goal}");
        }
    }

    #[test]
    fn abated_fraction_limits() {
        let s = constant(0.03, 0.04, 0.0, 300.0);
        let k = 0.03 / 1.6 + 0.03;
        assert!(rel(abated_fraction(&s).unwrap(), 0.03 / k) < 0.02);
        let s = constant(0.0, 0.04, 0.0, 300.0);
        assert!(rel(abated_fraction(&s).unwrap(), 1.0) < 1e-10);
        let o = overshoot_threshold(&s, DEFAULT_ALPHA).unwrap();
        assert!(o.warming.abs() < 1e-9);
    }

    #[test]
    fn rejects_intercepts_and_bad_starts() {
        let mut s = constant(0.03, 0.04, 0.0, 80.0);
        s.curve.c0 = 0.01;
        assert!(sigma_start(&s).is_err());
        let s = constant(0.03, 0.04, 80.0, 80.0);
        assert!(total_cost(&s).is_err());
    }
}
