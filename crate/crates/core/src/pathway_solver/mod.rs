//! Optimal abatement pathways.
//!
//! Minimizing the present value of abatement (and optionally damage) costs
//! subject to a fixed cumulative abatement `M(T) = M_tot` gives a second-order
//! Euler-Lagrange equation in cumulative abatement `M(t)`. It is solved here by
//! shooting on the initial abatement rate, integrating the initial-value
//! problem with fixed-step RK4.

mod cost;
mod dynamics;
mod integrate;
mod perturb;
mod residual;
mod shooting;
mod tax;

pub use cost::{discounted_cost, DiscountedCost};
pub use dynamics::{el_acceleration, el_terms, ElTerms, Exogenous};
pub use integrate::{integrate_trajectory, terminal_abatement};
pub use perturb::{perturbation_check, PerturbationReport};
pub use residual::el_residual;
pub use shooting::solve_bvp;
pub use tax::{carbon_tax_path, TaxPath};

use serde::{Deserialize, Serialize};

use crate::cost_models::{AbatementCostCurve, DamageModel, LearningModel, DEFAULT_ALPHA};
use crate::economy::{EconomyParams, GrowthSchedule};
use crate::error::{invalid, Result};

/// Every exogenous and cost model entering the optimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSet {
    pub econ: EconomyParams,
    /// GDP growth rate `r(t)`.
    pub growth: GrowthSchedule,
    /// Risk-free interest rate `i(t)`.
    pub interest: GrowthSchedule,
    pub curve: AbatementCostCurve,
    pub learning: LearningModel,
    pub damage: DamageModel,
}

impl Default for ModelSet {
    fn default() -> Self {
        ModelSet {
            econ: EconomyParams::default(),
            growth: GrowthSchedule::exponential_decay(0.04, 40.0),
            interest: GrowthSchedule::constant(0.03),
            curve: AbatementCostCurve::default(),
            learning: LearningModel::None,
            damage: DamageModel::none(DEFAULT_ALPHA),
        }
    }
}

impl ModelSet {
    pub fn validate(&self) -> Result<()> {
        self.econ.validate()?;
        self.growth.validate()?;
        self.interest.validate()?;
        self.curve.validate()?;
        self.learning.validate()?;
        self.damage.validate()
    }

    pub fn horizon(&self) -> f64 {
        self.econ.horizon
    }
}

/// Numerical settings for the shooting solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Integration step, years.
    pub dt: f64,
    /// Accepted `|M(T) - M_tot|`, Gton.
    pub shoot_tol: f64,
    /// Initial search interval for the starting abatement rate, Gton/yr.
    pub bracket: (f64, f64),
    /// Bound on bracket expansions and on refinement iterations.
    pub max_iters: usize,
    /// Largest normalized Euler-Lagrange residual accepted on a solved pathway.
    pub residual_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 0.05,
            shoot_tol: 1e-3,
            bracket: (0.1, 100.0),
            max_iters: 200,
            residual_tol: 1e-4,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", "must be positive"));
        }
        if !(self.shoot_tol > 0.0) {
            return Err(invalid("shoot_tol", "must be positive"));
        }
        let (lo, hi) = self.bracket;
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(invalid("bracket", "need 0 < low < high"));
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters", "must be at least 1"));
        }
        if !(self.residual_tol > 0.0) {
            return Err(invalid("residual_tol", "must be positive"));
        }
        Ok(())
    }
}

/// A discretized abatement trajectory with everything derived from it.
///
/// The grid covers `[0, T]` and always has a node at the start of abatement
/// `N`; nodes before `N` carry zero abatement. Arrays share the grid's length.
#[derive(Debug, Clone, PartialEq)]
pub struct Pathway {
    /// Years since the present.
    pub grid: Vec<f64>,
    /// Index of the node at the start of abatement.
    pub start_index: usize,
    pub start_year: f64,
    /// Cumulative abatement `M`, Gton.
    pub cum_abatement: Vec<f64>,
    /// Abatement rate, Gton/yr. Jumps from zero to its initial value at `N`.
    pub abatement_rate: Vec<f64>,
    /// Abatement rate relative to BAU emissions.
    pub sigma: Vec<f64>,
    /// BAU emission rate (= maximum abatement rate), Gton/yr.
    pub bau_rate: Vec<f64>,
    /// World GDP, trillion $.
    pub gdp: Vec<f64>,
    /// Net emission rate, Gton/yr.
    pub emissions: Vec<f64>,
    /// Cumulative emissions since preindustrial, Gton.
    pub cum_emissions: Vec<f64>,
    /// CO2-induced warming, K.
    pub warming: Vec<f64>,
    /// Carbon tax (marginal abatement cost), $/ton. Zero before `N`.
    pub tax: Vec<f64>,
    /// Annual abatement cost, trillion $/yr.
    pub abatement_cost: Vec<f64>,
    /// Annual climate damage cost, trillion $/yr.
    pub damage_cost: Vec<f64>,
    /// `abatement_cost + damage_cost`.
    pub annual_cost: Vec<f64>,
    /// `exp(-I(t))`.
    pub discount: Vec<f64>,
    pub discounted: DiscountedCost,
}

impl Pathway {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Grid indices from the start of abatement to the horizon.
    pub fn active(&self) -> std::ops::Range<usize> {
        self.start_index..self.grid.len()
    }

    /// Step of the post-start grid.
    pub fn active_step(&self) -> f64 {
        let r = self.active();
        if r.len() < 2 {
            return 0.0;
        }
        (self.grid[r.end - 1] - self.grid[r.start]) / (r.len() - 1) as f64
    }

    pub fn terminal_abatement(&self) -> f64 {
        *self
            .cum_abatement
            .last()
            .expect("pathway grid is never empty")
    }

    pub fn initial_rate(&self) -> f64 {
        self.abatement_rate[self.start_index]
    }

    pub fn initial_sigma(&self) -> f64 {
        self.sigma[self.start_index]
    }

    pub fn initial_tax(&self) -> f64 {
        self.tax[self.start_index]
    }
}
