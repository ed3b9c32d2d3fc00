use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Damage fraction of GDP as a function of cumulative emissions `E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DamageVariant {
    None,
    /// `d = d0 * (alpha * E / t0)^d1`.
    PowerLaw {
        d0: f64,
        d1: f64,
        t0: f64,
    },
    /// `d = 1 / (1 + exp(-E / e_d) / d2)`.
    Logistic {
        d2: f64,
        e_d: f64,
    },
}

/// Damage variant plus the TCRE `alpha` (K per Gton CO2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DamageModel {
    pub variant: DamageVariant,
    pub alpha: f64,
}

/// Reference warming of the power-law damage function, K.
pub const DEFAULT_T0: f64 = 10.0;

impl DamageModel {
    pub fn none(alpha: f64) -> Self {
        DamageModel {
            variant: DamageVariant::None,
            alpha,
        }
    }

    pub fn is_active(&self) -> bool {
        !matches!(self.variant, DamageVariant::None)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha", "TCRE must be positive"));
        }
        match self.variant {
            DamageVariant::None => {}
            DamageVariant::PowerLaw { d0, d1, t0 } => {
                if !(d0 > 0.0 && d0.is_finite()) {
                    return Err(invalid("d0", "must be positive"));
                }
                if !(d1 > 0.0 && d1.is_finite()) {
                    return Err(invalid("d1", "must be positive"));
                }
                if !(t0 > 0.0 && t0.is_finite()) {
                    return Err(invalid("t0", "must be positive"));
                }
            }
            DamageVariant::Logistic { d2, e_d } => {
                if !(d2 > 0.0 && d2.is_finite()) {
                    return Err(invalid("d2", "must be positive"));
                }
                if !(e_d > 0.0 && e_d.is_finite()) {
                    return Err(invalid("e_d", "must be positive"));
                }
            }
        }
        Ok(())
    }
}

/// Warming from cumulative emissions, `alpha * E`, K.
pub fn warming(damage: &DamageModel, cum_emissions: f64) -> f64 {
    damage.alpha * cum_emissions
}

fn check_power_law_emissions(e: f64) -> Result<()> {
    if e < 0.0 || e.is_nan() {
        return Err(Error::Domain(format!(
            "power-law damage is undefined for negative cumulative emissions ({e} Gton)"
        )));
    }
    Ok(())
}

/// Damage fraction of GDP at cumulative emissions `E` (Gton CO2).
pub fn damage_fraction(damage: &DamageModel, cum_emissions: f64) -> Result<f64> {
    let e = cum_emissions;
    match damage.variant {
        DamageVariant::None => Ok(0.0),
        DamageVariant::PowerLaw { d0, d1, t0 } => {
            check_power_law_emissions(e)?;
            Ok(d0 * (damage.alpha * e / t0).powf(d1))
        }
        DamageVariant::Logistic { d2, e_d } => Ok(logistic(d2, e_d, e)),
    }
}

fn logistic(d2: f64, e_d: f64, e: f64) -> f64 {
    1.0 / (1.0 + (-e / e_d).exp() / d2)
}

/// Derivative of the damage fraction with respect to cumulative abatement `M`.
///
/// Cumulative emissions fall one-for-one with abatement, so this is
/// `-dd/dE`, which is nonpositive.
pub fn damage_fraction_dm(damage: &DamageModel, cum_emissions: f64) -> Result<f64> {
    let e = cum_emissions;
    let dd_de = match damage.variant {
        DamageVariant::None => 0.0,
        DamageVariant::PowerLaw { d0, d1, t0 } => {
            check_power_law_emissions(e)?;
            let scale = damage.alpha / t0;
            d0 * d1 * scale * (scale * e).powf(d1 - 1.0)
        }
        DamageVariant::Logistic { d2, e_d } => {
            let d = logistic(d2, e_d, e);
            d * (1.0 - d) / e_d
        }
    };
    Ok(-dd_de)
}

/// A (warming, damage fraction) pair used to pin a two-parameter damage model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    /// K.
    pub warming: f64,
    pub fraction: f64,
}

impl CalibrationPoint {
    pub fn new(warming: f64, fraction: f64) -> Self {
        CalibrationPoint { warming, fraction }
    }
}

/// Which damage family to calibrate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DamageVariantKind {
    PowerLaw { t0: f64 },
    Logistic,
}

/// Fits a two-parameter damage model through two calibration points.
///
/// The power law is solved in closed form. The logistic curve is found by a
/// damped Newton iteration on the two fraction residuals, seeded from a
/// straight line in log-odds through the first point.
pub fn calibrate_damage(
    kind: DamageVariantKind,
    p1: CalibrationPoint,
    p2: CalibrationPoint,
    alpha: f64,
) -> Result<DamageModel> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Calibration("alpha must be positive".into()));
    }
    if !(p1.warming > 0.0 && p1.warming < p2.warming && p2.warming.is_finite()) {
        return Err(Error::Calibration(format!(
            "need 0 < dT1 < dT2, got {} and {}",
            p1.warming, p2.warming
        )));
    }
    if !(p1.fraction > 0.0 && p1.fraction < p2.fraction && p2.fraction < 1.0) {
        return Err(Error::Calibration(format!(
            "need 0 < d1 < d2 < 1, got {} and {}",
            p1.fraction, p2.fraction
        )));
    }
    let variant = match kind {
        DamageVariantKind::PowerLaw { t0 } => {
            if !(t0 > 0.0) {
                return Err(Error::Calibration("t0 must be positive".into()));
            }
            let d1 = (p2.fraction / p1.fraction).ln() / (p2.warming / p1.warming).ln();
            let d0 = p1.fraction * (t0 / p1.warming).powf(d1);
            DamageVariant::PowerLaw { d0, d1, t0 }
        }
        DamageVariantKind::Logistic => {
            let (d2, e_d) = fit_logistic(p1, p2, alpha)?;
            DamageVariant::Logistic { d2, e_d }
        }
    };
    let model = DamageModel { variant, alpha };
    model
        .validate()
        .map_err(|e| Error::Calibration(e.to_string()))?;
    Ok(model)
}

// Unknowns: a = ln(1/d2) and k = 1/e_d, so d(E) = 1 / (1 + exp(a - k E)).
fn fit_logistic(p1: CalibrationPoint, p2: CalibrationPoint, alpha: f64) -> Result<(f64, f64)> {
    let e1 = p1.warming / alpha;
    let e2 = p2.warming / alpha;
    let frac = |a: f64, k: f64, e: f64| 1.0 / (1.0 + (a - k * e).exp());
    let residual = |a: f64, k: f64| [frac(a, k, e1) - p1.fraction, frac(a, k, e2) - p2.fraction];
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());

    let mut k = 1.0 / e2;
    let mut a = (1.0 / p1.fraction - 1.0).ln() + k * e1;
    let mut r = residual(a, k);
    for _ in 0..200 {
        if norm(r) < 1e-14 {
            break;
        }
        let d1 = frac(a, k, e1);
        let d2 = frac(a, k, e2);
        // Jacobian of (d(E1), d(E2)) with respect to (a, k).
        let (j11, j12) = (-d1 * (1.0 - d1), e1 * d1 * (1.0 - d1));
        let (j21, j22) = (-d2 * (1.0 - d2), e2 * d2 * (1.0 - d2));
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Calibration(
                "singular Jacobian in logistic fit".into(),
            ));
        }
        let da = -(j22 * r[0] - j12 * r[1]) / det;
        let dk = -(-j21 * r[0] + j11 * r[1]) / det;
        let mut step = 1.0;
        loop {
            let (na, nk) = (a + step * da, k + step * dk);
            let nr = residual(na, nk);
            if nk > 0.0 && norm(nr) < norm(r) {
                a = na;
                k = nk;
                r = nr;
                break;
            }
            step *= 0.5;
            if step < 1e-12 {
                break;
            }
        }
        if step < 1e-12 {
            break;
        }
    }
    if !(norm(r) < 1e-10) {
        return Err(Error::Calibration(format!(
            "logistic fit did not converge (residual {:e})",
            norm(r)
        )));
    }
    if !(k > 0.0) {
        return Err(Error::Calibration("logistic scale must be positive".into()));
    }
    Ok(((-a).exp(), 1.0 / k))
}
