use super::cost::{annual_costs, discounted_cost};
use super::dynamics::{acceleration_from, el_terms, Exogenous};
use super::{DiscountedCost, ModelSet, Pathway, SolverConfig};
use crate::cost_models::{marginal_cost, DamageVariant, USD_PER_TON_PER_TRILLION_PER_GTON};
use crate::economy::bau_cumulative_between;
use crate::error::{Error, Result};

/// Abatement rates above this multiple of BAU emissions count as divergence.
const BLOWUP_SIGMA: f64 = 1e3;

/// Exogenous drivers tabulated on the integration grid.
///
/// Nodes before the start of abatement are stored at the pre-start spacing;
/// from the start onward they are stored at half-step spacing so that RK4
/// stages can look them up without re-integrating BAU emissions.
#[derive(Debug, Clone)]
pub(crate) struct Timeline {
    pub start_year: f64,
    pub pre: Vec<Exogenous>,
    pub half: Vec<Exogenous>,
    pub step: f64,
    pub steps: usize,
}

impl Timeline {
    pub fn new(models: &ModelSet, start_year: f64, dt: f64) -> Result<Self> {
        let horizon = models.horizon();
        if !(start_year >= 0.0 && start_year < horizon) {
            return Err(Error::Domain(format!(
                "start of abatement must lie in [0, {horizon}), got {start_year}"
            )));
        }
        if !(dt > 0.0) {
            return Err(Error::Domain(format!("step must be positive, got {dt}")));
        }
        let econ = &models.econ;
        let g = &models.growth;

        let pre_steps = segment_steps(start_year, dt);
        let pre_step = if pre_steps > 0 {
            start_year / pre_steps as f64
        } else {
            0.0
        };
        let mut pre = Vec::with_capacity(pre_steps);
        let mut cum = 0.0;
        let mut prev_t = 0.0;
        for k in 0..pre_steps {
            let t = k as f64 * pre_step;
            cum += bau_cumulative_between(econ, g, prev_t, t);
            prev_t = t;
            pre.push(Exogenous::with_bau_cum(models, t, cum));
        }
        cum += bau_cumulative_between(econ, g, prev_t, start_year);

        let steps = segment_steps(horizon - start_year, dt).max(1);
        let step = (horizon - start_year) / steps as f64;
        let mut half = Vec::with_capacity(2 * steps + 1);
        half.push(Exogenous::with_bau_cum(models, start_year, cum));
        let mut prev_t = start_year;
        for j in 1..=2 * steps {
            let t = if j == 2 * steps {
                horizon
            } else {
                start_year + 0.5 * step * j as f64
            };
            cum += bau_cumulative_between(econ, g, prev_t, t);
            prev_t = t;
            half.push(Exogenous::with_bau_cum(models, t, cum));
        }
        Ok(Timeline {
            start_year,
            pre,
            half,
            step,
            steps,
        })
    }

    pub fn node(&self, j: usize) -> &Exogenous {
        &self.half[2 * j]
    }
}

fn segment_steps(length: f64, dt: f64) -> usize {
    if length <= 0.0 {
        return 0;
    }
    (length / dt - 1e-9).ceil().max(1.0) as usize
}

/// Cumulative abatement and abatement rate on the post-start nodes.
#[derive(Debug, Clone)]
pub(crate) struct RawTrajectory {
    pub m: Vec<f64>,
    pub m_dot: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) enum Failure {
    /// The abatement rate fell to zero.
    Collapse {
        time: f64,
    },
    /// The abatement rate diverged.
    Blowup {
        time: f64,
    },
    /// Cumulative abatement exceeded cumulative emissions under a power-law damage model.
    Overabated {
        time: f64,
    },
    Model(Error),
}

impl Failure {
    pub fn into_error(self) -> Error {
        match self {
            Failure::Collapse { time } => Error::Trajectory {
                time,
                reason: "abatement rate fell to zero".into(),
            },
            Failure::Blowup { time } => Error::Trajectory {
                time,
                reason: "abatement rate diverged".into(),
            },
            Failure::Overabated { time } => Error::Trajectory {
                time,
                reason: "cumulative abatement exceeds cumulative emissions".into(),
            },
            Failure::Model(e) => e,
        }
    }
}

/// Fixed-step RK4 on `(M, M')` from the start of abatement to the horizon.
pub(crate) fn integrate_raw(
    models: &ModelSet,
    tl: &Timeline,
    m_dot_start: f64,
) -> std::result::Result<RawTrajectory, Failure> {
    let h = tl.step;
    let mut m = models.learning.initial_abatement();
    let mut v = m_dot_start;
    let mut ms = Vec::with_capacity(tl.steps + 1);
    let mut vs = Vec::with_capacity(tl.steps + 1);
    ms.push(m);
    vs.push(v);

    let bounded_damage = matches!(models.damage.variant, DamageVariant::PowerLaw { .. });
    let accel = |exo: &Exogenous, m: f64, v: f64| -> std::result::Result<f64, Failure> {
        if !(v > 0.0) {
            return Err(Failure::Collapse { time: exo.t });
        }
        if !v.is_finite() || v > BLOWUP_SIGMA * exo.m_max {
            return Err(Failure::Blowup { time: exo.t });
        }
        if bounded_damage && exo.cum_emissions(models, m) < 0.0 {
            return Err(Failure::Overabated { time: exo.t });
        }
        let terms = el_terms(models, exo, m, v).map_err(Failure::Model)?;
        let a = acceleration_from(&terms, v);
        if !a.is_finite() {
            return Err(Failure::Blowup { time: exo.t });
        }
        Ok(a)
    };

    for j in 0..tl.steps {
        let e0 = &tl.half[2 * j];
        let e1 = &tl.half[2 * j + 1];
        let e2 = &tl.half[2 * j + 2];
        let k1m = v;
        let k1v = accel(e0, m, v)?;
        let k2m = v + 0.5 * h * k1v;
        let k2v = accel(e1, m + 0.5 * h * k1m, k2m)?;
        let k3m = v + 0.5 * h * k2v;
        let k3v = accel(e1, m + 0.5 * h * k2m, k3m)?;
        let k4m = v + h * k3v;
        let k4v = accel(e2, m + h * k3m, k4m)?;
        m += h / 6.0 * (k1m + 2.0 * k2m + 2.0 * k3m + k4m);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if !(v > 0.0) {
            return Err(Failure::Collapse { time: e2.t });
        }
        if !v.is_finite() || !m.is_finite() || v > BLOWUP_SIGMA * e2.m_max {
            return Err(Failure::Blowup { time: e2.t });
        }
        ms.push(m);
        vs.push(v);
    }
    Ok(RawTrajectory { m: ms, m_dot: vs })
}

fn check_start(models: &ModelSet, m_dot_start: f64, start_year: f64) -> Result<()> {
    models.validate()?;
    if !(m_dot_start > 0.0 && m_dot_start.is_finite()) {
        return Err(Error::Domain(format!(
            "initial abatement rate must be positive, got {m_dot_start}"
        )));
    }
    if !(start_year >= 0.0 && start_year < models.horizon()) {
        return Err(Error::Domain(format!(
            "start of abatement must lie in [0, T), got {start_year}"
        )));
    }
    Ok(())
}

/// Integrates the Euler-Lagrange equation forward from `start_year` with the
/// given initial abatement rate and returns the full pathway.
pub fn integrate_trajectory(
    m_dot_start: f64,
    start_year: f64,
    models: &ModelSet,
    cfg: &SolverConfig,
) -> Result<Pathway> {
    check_start(models, m_dot_start, start_year)?;
    cfg.validate()?;
    let tl = Timeline::new(models, start_year, cfg.dt)?;
    let raw = integrate_raw(models, &tl, m_dot_start).map_err(Failure::into_error)?;
    assemble(models, &tl, &raw)
}

/// Cumulative abatement reached at the horizon from a given initial rate.
pub fn terminal_abatement(
    m_dot_start: f64,
    start_year: f64,
    models: &ModelSet,
    dt: f64,
) -> Result<f64> {
    check_start(models, m_dot_start, start_year)?;
    let tl = Timeline::new(models, start_year, dt)?;
    let raw = integrate_raw(models, &tl, m_dot_start).map_err(Failure::into_error)?;
    Ok(*raw.m.last().expect("at least one node"))
}

/// Builds a pathway from post-start values of `(M, M')`.
pub(crate) fn assemble(models: &ModelSet, tl: &Timeline, raw: &RawTrajectory) -> Result<Pathway> {
    let n_pre = tl.pre.len();
    let len = n_pre + tl.steps + 1;
    let m_start = models.learning.initial_abatement();
    let mut p = Pathway {
        grid: Vec::with_capacity(len),
        start_index: n_pre,
        start_year: tl.start_year,
        cum_abatement: Vec::with_capacity(len),
        abatement_rate: Vec::with_capacity(len),
        sigma: Vec::with_capacity(len),
        bau_rate: Vec::with_capacity(len),
        gdp: Vec::with_capacity(len),
        emissions: Vec::with_capacity(len),
        cum_emissions: Vec::with_capacity(len),
        warming: Vec::with_capacity(len),
        tax: Vec::with_capacity(len),
        abatement_cost: Vec::with_capacity(len),
        damage_cost: Vec::with_capacity(len),
        annual_cost: Vec::with_capacity(len),
        discount: Vec::with_capacity(len),
        discounted: DiscountedCost::default(),
    };
    let nodes = tl
        .pre
        .iter()
        .map(|e| (e, m_start, 0.0, false))
        .chain((0..=tl.steps).map(|j| (tl.node(j), raw.m[j], raw.m_dot[j], true)));
    for (exo, m, m_dot, active) in nodes {
        let cum_em = exo.cum_emissions(models, m);
        let (abate, damage) = annual_costs(models, m, m_dot, exo.m_max, exo.gdp, cum_em)?;
        let tax = if active {
            marginal_cost(&models.curve, &models.learning, m_dot, exo.m_max, m)?
                * USD_PER_TON_PER_TRILLION_PER_GTON
        } else {
            0.0
        };
        p.grid.push(exo.t);
        p.cum_abatement.push(m);
        p.abatement_rate.push(m_dot);
        p.sigma.push(m_dot / exo.m_max);
        p.bau_rate.push(exo.m_max);
        p.gdp.push(exo.gdp);
        p.emissions.push(exo.m_max - m_dot);
        p.cum_emissions.push(cum_em);
        p.warming
            .push(crate::cost_models::warming(&models.damage, cum_em));
        p.tax.push(tax);
        p.abatement_cost.push(abate);
        p.damage_cost.push(damage);
        p.annual_cost.push(abate + damage);
        p.discount.push((-exo.cum_interest).exp());
    }
    p.discounted = discounted_cost(&p, models)?;
    Ok(p)
}

/// Pathway with no abatement at all.
pub(crate) fn zero_pathway(models: &ModelSet, tl: &Timeline) -> Result<Pathway> {
    let m0 = models.learning.initial_abatement();
    let raw = RawTrajectory {
        m: vec![m0; tl.steps + 1],
        m_dot: vec![0.0; tl.steps + 1],
    };
    assemble(models, tl, &raw)
}
