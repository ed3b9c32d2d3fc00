use super::{ModelSet, Pathway};
use crate::cost_models::{average_cost, damage_fraction};
use crate::error::Result;
use crate::quadrature::uniform_simpson;

/// Present values at t = 0, trillion $.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DiscountedCost {
    pub abatement: f64,
    pub damage: f64,
    pub total: f64,
}

/// Annual abatement and damage costs at one state, trillion $/yr.
pub(crate) fn annual_costs(
    models: &ModelSet,
    m: f64,
    m_dot: f64,
    m_max: f64,
    gdp: f64,
    cum_emissions: f64,
) -> Result<(f64, f64)> {
    let abatement = if m_dot == 0.0 {
        0.0
    } else {
        average_cost(&models.curve, &models.learning, m_dot, m_max, m)? * m_dot
    };
    let damage = if models.damage.is_active() {
        damage_fraction(&models.damage, cum_emissions)? * gdp
    } else {
        0.0
    };
    Ok((abatement, damage))
}

/// Present value of abatement and damage costs along a pathway.
///
/// Annual costs are re-evaluated from the pathway's state and integrated
/// with composite Simpson separately on the pre-start and post-start grids.
pub fn discounted_cost(path: &Pathway, models: &ModelSet) -> Result<DiscountedCost> {
    let mut abate = Vec::with_capacity(path.len());
    let mut damage = Vec::with_capacity(path.len());
    for k in 0..path.len() {
        let (a, d) = annual_costs(
            models,
            path.cum_abatement[k],
            path.abatement_rate[k],
            path.bau_rate[k],
            path.gdp[k],
            path.cum_emissions[k],
        )?;
        abate.push(path.discount[k] * a);
        damage.push(path.discount[k] * d);
    }
    let s = path.start_index;
    let pre_step = if s > 0 { path.grid[s] / s as f64 } else { 0.0 };
    let post_step = path.active_step();
    // No abatement happens before the start; damages accrue over the whole
    // horizon and are continuous at the start node.
    let abatement = uniform_simpson(&abate[s..], post_step);
    let pre_damage = if s > 0 {
        uniform_simpson(&damage[..=s], pre_step)
    } else {
        0.0
    };
    let damage = pre_damage + uniform_simpson(&damage[s..], post_step);
    Ok(DiscountedCost {
        abatement,
        damage,
        total: abatement + damage,
    })
}
