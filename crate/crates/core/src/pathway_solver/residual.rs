use super::dynamics::{el_terms, Exogenous};
use super::{ModelSet, Pathway};
use crate::error::{Error, Result};

/// Derivative of `ys` at interior index `k` of a uniform grid, fourth-order
/// accurate: central where the five-point stencil fits, offset by one node
/// next to the ends. Falls back to second-order central on short grids.
pub(crate) fn central_derivative(ys: &[f64], k: usize, h: f64) -> f64 {
    let n = ys.len();
    debug_assert!(k >= 1 && k + 1 < n);
    if k >= 2 && k + 2 < n {
        (ys[k - 2] - 8.0 * ys[k - 1] + 8.0 * ys[k + 1] - ys[k + 2]) / (12.0 * h)
    } else if n >= 5 && k == 1 {
        (-3.0 * ys[0] - 10.0 * ys[1] + 18.0 * ys[2] - 6.0 * ys[3] + ys[4]) / (12.0 * h)
    } else if n >= 5 && k == n - 2 {
        (3.0 * ys[n - 1] + 10.0 * ys[n - 2] - 18.0 * ys[n - 3] + 6.0 * ys[n - 4] - ys[n - 5])
            / (12.0 * h)
    } else {
        (ys[k + 1] - ys[k - 1]) / (2.0 * h)
    }
}

pub(crate) fn exogenous_at(path: &Pathway, models: &ModelSet, k: usize) -> Exogenous {
    let bau_cum = path.cum_emissions[k] - models.econ.e_hist + path.cum_abatement[k];
    Exogenous::with_bau_cum(models, path.grid[k], bau_cum)
}

/// Largest normalized Euler-Lagrange residual over the interior post-start nodes.
///
/// `M''` is taken from finite differences of the stored abatement rate, so
/// this is independent of the integrator. Each node's mismatch
/// `|LHS - RHS|` is divided by the largest of `|LHS|`, `|RHS|`, the sum of
/// the right side's term magnitudes, and `lhs_coeff / (T - N)`; the last
/// keeps the measure meaningful where both sides vanish (zero rates).
pub fn el_residual(path: &Pathway, models: &ModelSet) -> Result<f64> {
    let act = path.active();
    if act.len() < 3 {
        return Ok(0.0);
    }
    let h = path.active_step();
    let span = path.grid[act.end - 1] - path.grid[act.start];
    let rates = &path.abatement_rate[act.clone()];
    let mut worst = 0.0f64;
    for j in 1..rates.len() - 1 {
        let k = act.start + j;
        let m_dot = rates[j];
        if !(m_dot > 0.0) {
            return Err(Error::Singular(format!(
                "abatement rate {m_dot} at t = {} leaves the Euler-Lagrange equation undefined",
                path.grid[k]
            )));
        }
        let exo = exogenous_at(path, models, k);
        let terms = el_terms(models, &exo, path.cum_abatement[k], m_dot)?;
        let lhs = terms.lhs_coeff * central_derivative(rates, j, h) / m_dot;
        let rhs = terms.rhs();
        let scale = lhs
            .abs()
            .max(rhs.abs())
            .max(terms.rhs_magnitude())
            .max(terms.lhs_coeff / span);
        worst = worst.max((lhs - rhs).abs() / scale);
    }
    Ok(worst)
}
