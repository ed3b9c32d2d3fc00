use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cost::annual_costs;
use super::dynamics::Exogenous;
use super::residual::exogenous_at;
use super::{ModelSet, Pathway};
use crate::quadrature::uniform_simpson;

/// Relative size, against total discounted cost, of a cost decrease still
/// attributed to round-off.
pub const PERTURBATION_REL_TOL: f64 = 1e-7;
/// Highest sine mode in a random perturbation.
const MAX_MODES: usize = 4;
/// Times the amplitude may be halved to keep a perturbed path admissible.
const MAX_HALVINGS: usize = 10;

/// Outcome of comparing a pathway's cost against random neighbours.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationReport {
    /// Perturbations actually evaluated.
    pub trials: usize,
    /// Smallest `cost(perturbed) - cost(path)`, trillion $.
    pub min_delta: f64,
    pub mean_delta: f64,
    /// Largest cost decrease tolerated, trillion $.
    pub tolerance: f64,
    pub passed: bool,
    /// Trials whose amplitude had to be reduced to keep the rate positive.
    pub rescaled: usize,
    /// Trials abandoned because no reduced amplitude was admissible.
    pub skipped: usize,
}

struct Objective<'a> {
    models: &'a ModelSet,
    exo: Vec<Exogenous>,
    step: f64,
}

impl Objective<'_> {
    /// Present value of post-start costs; `None` if the state is inadmissible.
    fn eval(&self, m: &[f64], m_dot: &[f64]) -> Option<f64> {
        let m_start = self.models.learning.initial_abatement();
        let mut ys = Vec::with_capacity(m.len());
        for (k, e) in self.exo.iter().enumerate() {
            if !(m_dot[k] > 0.0) || m[k] < m_start {
                return None;
            }
            let cum_em = e.cum_emissions(self.models, m[k]);
            let (a, d) = annual_costs(self.models, m[k], m_dot[k], e.m_max, e.gdp, cum_em).ok()?;
            ys.push((-e.cum_interest).exp() * (a + d));
        }
        Some(uniform_simpson(&ys, self.step))
    }
}

/// Random endpoint-preserving sine series scaled to unit peak, with its
/// time derivative. `s` runs over `[0, 1]`.
fn random_shape(rng: &mut ChaCha8Rng, s: &[f64], span: f64) -> (Vec<f64>, Vec<f64>) {
    loop {
        let modes = rng.gen_range(1..=MAX_MODES);
        let coeffs: Vec<f64> = (0..modes).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let shape: Vec<f64> = s
            .iter()
            .map(|&x| {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, a)| a * ((j + 1) as f64 * PI * x).sin())
                    .sum()
            })
            .collect();
        let peak = shape.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if peak < 1e-12 {
            continue;
        }
        let slope = s
            .iter()
            .map(|&x| {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, a)| {
                        let w = (j + 1) as f64 * PI;
                        a * w * (w * x).cos() / span
                    })
                    .sum::<f64>()
                    / peak
            })
            .collect();
        return (shape.iter().map(|v| v / peak).collect(), slope);
    }
}

/// Compares the pathway's discounted cost against `n_trials` random smooth
/// perturbations `dM` with peak `amplitude` (Gton) that vanish at the start of
/// abatement and at the horizon, so the cumulative goal is unchanged.
///
/// A perturbation that would drive the abatement rate nonpositive is halved
/// until admissible. The check passes when no perturbation lowers the cost by
/// more than `PERTURBATION_REL_TOL` times the pathway's total cost.
pub fn perturbation_check(
    path: &Pathway,
    models: &ModelSet,
    n_trials: usize,
    amplitude: f64,
    seed: u64,
) -> PerturbationReport {
    let act = path.active();
    let objective = Objective {
        models,
        exo: act.clone().map(|k| exogenous_at(path, models, k)).collect(),
        step: path.active_step(),
    };
    let m = &path.cum_abatement[act.clone()];
    let m_dot = &path.abatement_rate[act.clone()];
    let tolerance = PERTURBATION_REL_TOL * path.discounted.total.abs();
    let mut report = PerturbationReport {
        trials: 0,
        min_delta: 0.0,
        mean_delta: 0.0,
        tolerance,
        passed: true,
        rescaled: 0,
        skipped: 0,
    };
    let Some(base) = objective.eval(m, m_dot) else {
        report.skipped = n_trials;
        return report;
    };
    let t0 = path.grid[act.start];
    let span = path.grid[act.end - 1] - t0;
    let s: Vec<f64> = act.clone().map(|k| (path.grid[k] - t0) / span).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut min = f64::INFINITY;

    for _ in 0..n_trials {
        let (shape, slope) = random_shape(&mut rng, &s, span);
        let mut amp = amplitude;
        let mut outcome = None;
        for halving in 0..=MAX_HALVINGS {
            let pm: Vec<f64> = m.iter().zip(&shape).map(|(x, d)| x + amp * d).collect();
            let pv: Vec<f64> = m_dot.iter().zip(&slope).map(|(x, d)| x + amp * d).collect();
            if let Some(c) = objective.eval(&pm, &pv) {
                outcome = Some((c - base, halving > 0));
                break;
            }
            amp *= 0.5;
        }
        match outcome {
            Some((delta, shrunk)) => {
                report.trials += 1;
                report.rescaled += usize::from(shrunk);
                sum += delta;
                min = min.min(delta);
            }
            None => report.skipped += 1,
        }
    }
    if report.trials > 0 {
        report.min_delta = min;
        report.mean_delta = sum / report.trials as f64;
    }
    report.passed = report.min_delta >= -tolerance;
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pathway_solver::{integrate_trajectory, SolverConfig};

    #[test]
    fn zero_amplitude_changes_nothing() {
        let models = ModelSet::default();
        let p = integrate_trajectory(8.0, 0.0, &models, &SolverConfig::default()).unwrap();
        let r = perturbation_check(&p, &models, 10, 0.0, 3);
        assert_eq!(r.trials, 10);
        assert_eq!(r.min_delta, 0.0);
        assert_eq!(r.mean_delta, 0.0);
        assert!(r.passed);
    }

    #[test]
    fn shapes_vanish_at_both_ends() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
        for _ in 0..20 {
            let (shape, slope) = random_shape(&mut rng, &s, 50.0);
            assert!(shape[0].abs() < 1e-15 && shape[100].abs() < 1e-12);
            let peak = shape.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            assert!((peak - 1.0).abs() < 1e-12);
            // slope is d(shape)/dt with t = 50 s
            let fd = (shape[51] - shape[49]) / (2.0 * 0.5);
            assert!((fd - slope[50]).abs() < 1e-3 * (1.0 + slope[50].abs()));
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let models = ModelSet::default();
        let p = integrate_trajectory(8.0, 0.0, &models, &SolverConfig::default()).unwrap();
        let a = perturbation_check(&p, &models, 5, 10.0, 42);
        let b = perturbation_check(&p, &models, 5, 10.0, 42);
        assert_eq!(a, b);
    }
}
