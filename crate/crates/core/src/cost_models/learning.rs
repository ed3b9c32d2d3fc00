use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Learning-by-doing: cumulative abatement `M` lowers the average cost through
/// an additive shift `f(M)` and/or a multiplicative factor `h(M)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LearningModel {
    None,
    /// `f(M) = c_f * M`, trillion $/Gton^2.
    Additive {
        c_f: f64,
    },
    /// `h(M) = exp(-M / m_h)`.
    Exponential {
        m_h: f64,
    },
    /// `h(M) = (M / m0)^-b`; requires `M >= m0 > 0`.
    PowerLaw {
        b: f64,
        m0: f64,
    },
}

pub const DEFAULT_C_F: f64 = 1e-5;
pub const DEFAULT_M_H: f64 = 2000.0;
/// 20% cost cut per doubling of cumulative abatement.
pub const DEFAULT_B: f64 = 0.322;
pub const DEFAULT_M0: f64 = 1.0;

/// `f`, `f'`, `h`, `h'` at one value of cumulative abatement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearningTerms {
    pub f: f64,
    pub df: f64,
    pub h: f64,
    pub dh: f64,
}

impl LearningModel {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        match *self {
            LearningModel::None => Ok(()),
            LearningModel::Additive { c_f } if !positive(c_f) => {
                Err(invalid("c_f", "must be positive"))
            }
            LearningModel::Exponential { m_h } if !positive(m_h) => {
                Err(invalid("m_h", "must be positive"))
            }
            LearningModel::PowerLaw { b, .. } if !positive(b) => {
                Err(invalid("b", "must be positive"))
            }
            LearningModel::PowerLaw { m0, .. } if !positive(m0) => {
                Err(invalid("m0", "must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Cumulative abatement at the start of abatement: `m0` for power-law learning, else 0.
    pub fn initial_abatement(&self) -> f64 {
        match *self {
            LearningModel::PowerLaw { m0, .. } => m0,
            _ => 0.0,
        }
    }

    pub fn is_multiplicative(&self) -> bool {
        matches!(
            self,
            LearningModel::Exponential { .. } | LearningModel::PowerLaw { .. }
        )
    }
}

pub fn learning_terms(learn: &LearningModel, m: f64) -> Result<LearningTerms> {
    if !(m >= 0.0) {
        return Err(Error::Domain(format!(
            "cumulative abatement must be nonnegative, got {m}"
        )));
    }
    Ok(match *learn {
        LearningModel::None => LearningTerms {
            f: 0.0,
            df: 0.0,
            h: 1.0,
            dh: 0.0,
        },
        LearningModel::Additive { c_f } => LearningTerms {
            f: c_f * m,
            df: c_f,
            h: 1.0,
            dh: 0.0,
        },
        LearningModel::Exponential { m_h } => {
            let h = (-m / m_h).exp();
            LearningTerms {
                f: 0.0,
                df: 0.0,
                h,
                dh: -h / m_h,
            }
        }
        LearningModel::PowerLaw { b, m0 } => {
            if m < m0 {
                return Err(Error::Domain(format!(
                    "power-law learning needs M >= m0 = {m0}, got {m}"
                )));
            }
            let h = (m / m0).powf(-b);
            LearningTerms {
                f: 0.0,
                df: 0.0,
                h,
                dh: -b * h / m,
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn none_variant_is_identity() {
        let t = learning_terms(&LearningModel::None, 123.0).unwrap();
        assert_eq!((t.f, t.df, t.h, t.dh), (0.0, 0.0, 1.0, 0.0));
    }

    #[test]
    fn boundary_values_at_start() {
        let e = learning_terms(&LearningModel::Exponential { m_h: 2000.0 }, 0.0).unwrap();
        assert_eq!(e.h, 1.0);
        let a = learning_terms(&LearningModel::Additive { c_f: 1e-5 }, 0.0).unwrap();
        assert_eq!(a.f, 0.0);
        let p = learning_terms(&LearningModel::PowerLaw { b: 0.322, m0: 1.0 }, 1.0).unwrap();
        assert_eq!(p.h, 1.0);
    }

    #[test]
    fn power_law_per_doubling() {
        let learn = LearningModel::PowerLaw { b: 0.322, m0: 1.0 };
        for &m in &[1.0, 7.5, 300.0] {
            let a = learning_terms(&learn, m).unwrap().h;
            let b = learning_terms(&learn, 2.0 * m).unwrap().h;
            assert!((b / a - 0.5f64.powf(0.322)).abs() < 1e-14);
        }
    }

    #[test]
    fn exponential_log_derivative_is_constant() {
        let learn = LearningModel::Exponential { m_h: 2000.0 };
        for &m in &[0.0, 10.0, 4000.0] {
            let t = learning_terms(&learn, m).unwrap();
            assert!((t.dh / t.h + 1.0 / 2000.0).abs() < 1e-18);
        }
    }

    #[test]
    fn power_law_below_seed_is_an_error() {
        let learn = LearningModel::PowerLaw { b: 0.3, m0: 1.0 };
        assert!(matches!(learning_terms(&learn, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let models = [
            LearningModel::Additive { c_f: 1e-5 },
            LearningModel::Exponential { m_h: 2000.0 },
            LearningModel::PowerLaw { b: 0.322, m0: 1.0 },
        ];
        let eps = 1e-4;
        for learn in models {
            let m = 850.0;
            let p = learning_terms(&learn, m + eps).unwrap();
            let q = learning_terms(&learn, m - eps).unwrap();
            let t = learning_terms(&learn, m).unwrap();
            assert!(((p.f - q.f) / (2.0 * eps) - t.df).abs() < 1e-10);
            assert!(((p.h - q.h) / (2.0 * eps) - t.dh).abs() < 1e-10);
        }
    }
}
