use super::residual::{central_derivative, exogenous_at};
use super::{ModelSet, Pathway};
use crate::cost_models::{
    average_cost, damage_fraction_dm, learning_terms, marginal_cost,
    USD_PER_TON_PER_TRILLION_PER_GTON,
};
use crate::error::Result;
use crate::quadrature::cumulative_simpson;

/// Carbon tax along a pathway, computed two ways.
///
/// All series share the pathway's grid and are zero before the start of
/// abatement.
#[derive(Debug, Clone, PartialEq)]
pub struct TaxPath {
    /// Marginal abatement cost, $/ton.
    pub usd_per_ton: Vec<f64>,
    /// Tax growth `dP/dt` from the optimality conditions, $/ton/yr.
    pub growth: Vec<f64>,
    /// Initial tax plus the running integral of `growth`, $/ton.
    pub integrated: Vec<f64>,
    /// Largest relative gap between `growth` and a finite-difference
    /// derivative of `usd_per_ton`.
    pub derivative_mismatch: f64,
    /// Largest relative gap between `integrated` and `usd_per_ton`.
    pub integral_mismatch: f64,
}

impl TaxPath {
    pub fn consistent(&self, tol: f64) -> bool {
        self.derivative_mismatch < tol && self.integral_mismatch < tol
    }
}

/// `dP/dt = i P + (gamma h'/h - f' h) M' + d'(M) G` at node `k`, trillion $/Gton/yr.
fn tax_growth_at(path: &Pathway, models: &ModelSet, k: usize, price: f64) -> Result<f64> {
    let exo = exogenous_at(path, models, k);
    let m = path.cum_abatement[k];
    let m_dot = path.abatement_rate[k];
    let lt = learning_terms(&models.learning, m)?;
    let gamma = average_cost(&models.curve, &models.learning, m_dot, exo.m_max, m)?;
    let damage = if models.damage.is_active() {
        damage_fraction_dm(&models.damage, path.cum_emissions[k])? * exo.gdp
    } else {
        0.0
    };
    Ok(exo.interest * price + (gamma * lt.dh / lt.h - lt.df * lt.h) * m_dot + damage)
}

/// Carbon tax `P(t)` equal to the marginal abatement cost along the pathway,
/// cross-checked against its growth equation.
pub fn carbon_tax_path(path: &Pathway, models: &ModelSet) -> Result<TaxPath> {
    let n = path.len();
    let act = path.active();
    let h = path.active_step();
    let mut usd = vec![0.0; n];
    let mut growth = vec![0.0; n];
    for k in act.clone() {
        let p = marginal_cost(
            &models.curve,
            &models.learning,
            path.abatement_rate[k],
            path.bau_rate[k],
            path.cum_abatement[k],
        )?;
        usd[k] = p * USD_PER_TON_PER_TRILLION_PER_GTON;
        growth[k] = tax_growth_at(path, models, k, p)? * USD_PER_TON_PER_TRILLION_PER_GTON;
    }

    let mut integrated = vec![0.0; n];
    let running = cumulative_simpson(&growth[act.clone()], h);
    for (j, k) in act.clone().enumerate() {
        integrated[k] = usd[act.start] + running[j];
    }

    let span = (path.grid[act.end - 1] - path.grid[act.start]).max(h);
    let mut derivative_mismatch = 0.0f64;
    let mut integral_mismatch = 0.0f64;
    let active_usd = &usd[act.clone()];
    for (j, k) in act.clone().enumerate() {
        let floor = usd[k].abs() / span;
        if j > 0 && j + 1 < active_usd.len() {
            let fd = central_derivative(active_usd, j, h);
            let scale = fd.abs().max(growth[k].abs()).max(floor);
            if scale > 0.0 {
                derivative_mismatch = derivative_mismatch.max((fd - growth[k]).abs() / scale);
            }
        }
        let scale = usd[k].abs().max(integrated[k].abs());
        if scale > 0.0 {
            integral_mismatch = integral_mismatch.max((integrated[k] - usd[k]).abs() / scale);
        }
    }
    Ok(TaxPath {
        usd_per_ton: usd,
        growth,
        integrated,
        derivative_mismatch,
        integral_mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost_models::LearningModel;
    use crate::pathway_solver::{integrate_trajectory, SolverConfig};

    #[test]
    fn matches_stored_tax() {
        let models = ModelSet::default();
        let p = integrate_trajectory(6.0, 10.0, &models, &SolverConfig::default()).unwrap();
        let tax = carbon_tax_path(&p, &models).unwrap();
        assert_eq!(tax.usd_per_ton, p.tax);
        assert!(tax.usd_per_ton[..p.start_index].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn two_routes_agree_with_learning() {
        let cfg = SolverConfig::default();
        for learning in [
            LearningModel::None,
            LearningModel::Additive { c_f: 1e-5 },
            LearningModel::Exponential { m_h: 2000.0 },
        ] {
            let models = ModelSet {
                learning,
                ..ModelSet::default()
            };
            let p = integrate_trajectory(8.0, 0.0, &models, &cfg).unwrap();
            let tax = carbon_tax_path(&p, &models).unwrap();
            assert!(tax.consistent(1e-3), "{learning:?}: {tax:?}");
        }
    }

    #[test]
    fn full_abatement_costs_the_maximum_marginal_price() {
        let models = ModelSet::default();
        let p = integrate_trajectory(40.0, 0.0, &models, &SolverConfig::default()).unwrap();
        let tax = carbon_tax_path(&p, &models).unwrap();
        assert!((tax.usd_per_ton[0] - 550.0).abs() < 1e-9);
    }
}
