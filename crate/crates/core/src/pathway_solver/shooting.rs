use super::integrate::{assemble, integrate_raw, zero_pathway, Failure, RawTrajectory, Timeline};
use super::residual::el_residual;
use super::{ModelSet, Pathway, SolverConfig};
use crate::error::{Error, Result};

/// Smallest initial rate tried while bracketing, Gton/yr.
const RATE_FLOOR: f64 = 1e-9;
/// Times the step may be halved to bring the Euler-Lagrange residual under tolerance.
pub const MAX_REFINEMENTS: usize = 6;

/// Signed miss `M(T) - M_tot` of one shot. Collapsed trajectories undershoot
/// without bound and diverging ones overshoot without bound.
#[derive(Debug, Clone)]
enum Shot {
    Miss(f64, RawTrajectory),
    Under,
    Over,
}

impl Shot {
    fn key(&self) -> f64 {
        match self {
            Shot::Miss(f, _) => *f,
            Shot::Under => f64::NEG_INFINITY,
            Shot::Over => f64::INFINITY,
        }
    }
}

struct Shooter<'a> {
    models: &'a ModelSet,
    tl: Timeline,
    target: f64,
}

impl Shooter<'_> {
    fn shoot(&self, rate: f64) -> Result<Shot> {
        match integrate_raw(self.models, &self.tl, rate) {
            Ok(raw) => {
                let miss = raw.m.last().copied().unwrap_or(f64::NAN) - self.target;
                Ok(Shot::Miss(miss, raw))
            }
            Err(Failure::Collapse { .. }) => Ok(Shot::Under),
            Err(Failure::Blowup { .. }) | Err(Failure::Overabated { .. }) => Ok(Shot::Over),
            Err(Failure::Model(e)) => Err(e),
        }
    }
}

fn non_monotone(a: (f64, f64), b: (f64, f64)) -> Error {
    Error::Solver(format!(
        "terminal abatement is not monotone in the initial rate: \
         rate {:.6e} misses by {:.6e}, rate {:.6e} misses by {:.6e}",
        a.0, a.1, b.0, b.1
    ))
}

/// Solves the two-point boundary problem `M(N) = M_start`, `M(T) = m_tot`.
///
/// The initial abatement rate is bracketed (expanding the configured bracket
/// by doubling or halving as needed), then refined by bisection with
/// Illinois-style secant steps. Every new shot is checked to lie between its
/// bracketing neighbours; a violation means `M(T)` is not monotone in the
/// initial rate and is reported rather than resolved.
///
/// The accepted pathway must satisfy the Euler-Lagrange equation to within
/// `cfg.residual_tol` at every interior node. If it does not at `cfg.dt`
/// (fast early dynamics under power-law learning), the step is halved and the
/// problem re-solved, up to `MAX_REFINEMENTS` times.
pub fn solve_bvp(
    m_tot: f64,
    start_year: f64,
    models: &ModelSet,
    cfg: &SolverConfig,
) -> Result<Pathway> {
    models.validate()?;
    cfg.validate()?;
    let tl = Timeline::new(models, start_year, cfg.dt)?;
    let m_start = models.learning.initial_abatement();
    if !(m_tot >= 0.0 && m_tot.is_finite()) {
        return Err(Error::Infeasible(format!(
            "cumulative abatement goal must be nonnegative, got {m_tot}"
        )));
    }
    if m_tot == 0.0 && m_start == 0.0 {
        return zero_pathway(models, &tl);
    }
    if m_tot <= m_start {
        return Err(Error::Infeasible(format!(
            "goal {m_tot} Gton does not exceed the initial cumulative abatement {m_start} Gton"
        )));
    }

    let mut dt = cfg.dt;
    let mut residual = f64::NAN;
    for _ in 0..=MAX_REFINEMENTS {
        let shooter = Shooter {
            models,
            tl: Timeline::new(models, start_year, dt)?,
            target: m_tot,
        };
        let raw = bracket_and_refine(&shooter, cfg)?;
        let path = assemble(models, &shooter.tl, &raw)?;
        residual = el_residual(&path, models)?;
        if residual <= cfg.residual_tol {
            return Ok(path);
        }
        dt *= 0.5;
    }
    Err(Error::Solver(format!(
        "Euler-Lagrange residual {residual:.3e} exceeds tolerance {:.3e} even at step {:.3e} yr",
        cfg.residual_tol,
        2.0 * dt
    )))
}

fn bracket_and_refine(s: &Shooter<'_>, cfg: &SolverConfig) -> Result<RawTrajectory> {
    let (mut lo_rate, mut hi_rate) = cfg.bracket;
    let mut lo = s.shoot(lo_rate)?;
    let mut hi = s.shoot(hi_rate)?;
    if lo.key() > hi.key() {
        return Err(non_monotone((lo_rate, lo.key()), (hi_rate, hi.key())));
    }

    let mut expansions = 0;
    while hi.key() < 0.0 {
        if expansions == cfg.max_iters {
            return Err(Error::Infeasible(format!(
                "no initial rate up to {hi_rate:.3e} Gton/yr reaches the goal"
            )));
        }
        expansions += 1;
        let next_rate = 2.0 * hi_rate;
        let next = s.shoot(next_rate)?;
        if next.key() < hi.key() {
            return Err(non_monotone((hi_rate, hi.key()), (next_rate, next.key())));
        }
        (lo_rate, lo) = (hi_rate, hi);
        (hi_rate, hi) = (next_rate, next);
    }
    while lo.key() > 0.0 {
        if expansions == cfg.max_iters || lo_rate <= RATE_FLOOR {
            return Err(Error::Infeasible(format!(
                "even an initial rate of {lo_rate:.3e} Gton/yr overshoots the goal"
            )));
        }
        expansions += 1;
        let next_rate = (0.5 * lo_rate).max(RATE_FLOOR);
        let next = s.shoot(next_rate)?;
        if next.key() > lo.key() {
            return Err(non_monotone((next_rate, next.key()), (lo_rate, lo.key())));
        }
        (hi_rate, hi) = (lo_rate, lo);
        (lo_rate, lo) = (next_rate, next);
    }

    let tol = cfg.shoot_tol;
    for shot in [&lo, &hi] {
        if let Shot::Miss(f, raw) = shot {
            if f.abs() < tol && raw.m_dot[0] > RATE_FLOOR {
                return Ok(raw.clone());
            }
        }
    }

    // Illinois weights: halve the retained end's miss when the same end
    // survives twice in a row.
    let mut lo_w = 1.0;
    let mut hi_w = 1.0;
    let mut last_side = 0i8;
    for _ in 0..cfg.max_iters {
        let (fl, fh) = (lo.key() * lo_w, hi.key() * hi_w);
        let mut rate = if fl.is_finite() && fh.is_finite() && fh > fl {
            lo_rate - fl * (hi_rate - lo_rate) / (fh - fl)
        } else {
            0.5 * (lo_rate + hi_rate)
        };
        let width = hi_rate - lo_rate;
        if !(rate > lo_rate + 1e-3 * width && rate < hi_rate - 1e-3 * width) {
            rate = 0.5 * (lo_rate + hi_rate);
        }
        if !(rate > lo_rate && rate < hi_rate) {
            // Terminal abatement jumps across the goal: no interior pathway.
            match (&lo, &hi) {
                (Shot::Under, Shot::Miss(f, _)) => {
                    return Err(Error::Infeasible(format!(
                        "initial rates below {lo_rate:.6e} Gton/yr collapse before the horizon \
                         and the lowest surviving rate overshoots the goal by {f:.6e} Gton"
                    )))
                }
                (Shot::Miss(f, _), Shot::Over) => {
                    return Err(Error::Infeasible(format!(
                        "initial rates above {hi_rate:.6e} Gton/yr diverge and the highest \
                         finite rate misses the goal by {f:.6e} Gton"
                    )))
                }
                _ => {}
            }
            return Err(Error::Solver(format!(
                "bracket collapsed at {lo_rate:.12e} Gton/yr without meeting tolerance {tol:e}"
            )));
        }
        let shot = s.shoot(rate)?;
        let f = shot.key();
        if f < lo.key() || f > hi.key() {
            return Err(non_monotone((lo_rate, lo.key()), (rate, f)));
        }
        if let Shot::Miss(miss, raw) = &shot {
            if miss.abs() < tol {
                return Ok(raw.clone());
            }
        }
        if f < 0.0 {
            (lo_rate, lo) = (rate, shot);
            lo_w = 1.0;
            if last_side == -1 {
                hi_w *= 0.5;
            }
            last_side = -1;
        } else {
            (hi_rate, hi) = (rate, shot);
            hi_w = 1.0;
            if last_side == 1 {
                lo_w *= 0.5;
            }
            last_side = 1;
        }
    }
    Err(Error::Solver(format!(
        "no convergence within {} iterations (bracket [{lo_rate:.6e}, {hi_rate:.6e}] Gton/yr)",
        cfg.max_iters
    )))
}
