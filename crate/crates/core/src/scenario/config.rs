use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cost_models::{
    alpha_from_tcre, calibrate_damage, AbatementCostCurve, CalibrationPoint, DamageModel,
    DamageVariant, DamageVariantKind, LearningModel, DEFAULT_C2, DEFAULT_T0,
    DEFAULT_TCRE_K_PER_TTONC, USD_PER_TON_PER_TRILLION_PER_GTON,
};
use crate::economy::{
    EconomyParams, GrowthSchedule, DEFAULT_E_BAU0, DEFAULT_GDP0, DEFAULT_HORIZON,
    DEFAULT_PRESENT_WARMING, DEFAULT_THETA,
};
use crate::error::{Error, Result};
use crate::pathway_solver::{ModelSet, SolverConfig};

/// Economy section. Exactly one of `present_warming` and `e_hist` may be
/// given; with neither, present warming defaults to 1 K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EconomySpec {
    /// Gton CO2/yr.
    pub e_bau0: f64,
    /// Trillion $.
    pub gdp0: f64,
    pub theta: f64,
    /// Years.
    pub horizon: f64,
    /// K.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub present_warming: Option<f64>,
    /// Gton CO2 emitted before t = 0.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_hist: Option<f64>,
}

impl Default for EconomySpec {
    fn default() -> Self {
        EconomySpec {
            e_bau0: DEFAULT_E_BAU0,
            gdp0: DEFAULT_GDP0,
            theta: DEFAULT_THETA,
            horizon: DEFAULT_HORIZON,
            present_warming: None,
            e_hist: None,
        }
    }
}

impl EconomySpec {
    pub fn resolve(&self, alpha: f64) -> Result<EconomyParams> {
        let e_hist = match (self.present_warming, self.e_hist) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "economy: give present_warming or e_hist, not both".into(),
                ))
            }
            (Some(w), None) => w / alpha,
            (None, Some(e)) => e,
            (None, None) => DEFAULT_PRESENT_WARMING / alpha,
        };
        let econ = EconomyParams {
            e_bau0: self.e_bau0,
            gdp0: self.gdp0,
            theta: self.theta,
            e_hist,
            horizon: self.horizon,
        };
        econ.validate()?;
        Ok(econ)
    }
}

/// Cost curve section. The scale is set by `c1` (trillion $/Gton) or by the
/// marginal cost at full abatement, `max_marginal_usd_per_ton`; with neither
/// it defaults to 550 $/ton.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostCurveSpec {
    pub c0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_marginal_usd_per_ton: Option<f64>,
    pub c2: f64,
}

impl Default for CostCurveSpec {
    fn default() -> Self {
        CostCurveSpec {
            c0: 0.0,
            c1: None,
            max_marginal_usd_per_ton: None,
            c2: DEFAULT_C2,
        }
    }
}

impl CostCurveSpec {
    pub fn resolve(&self) -> Result<AbatementCostCurve> {
        let curve = match (self.c1, self.max_marginal_usd_per_ton) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "cost_curve: give c1 or max_marginal_usd_per_ton, not both".into(),
                ))
            }
            (Some(c1), None) => AbatementCostCurve {
                c0: self.c0,
                c1,
                c2: self.c2,
            },
            (None, max) => AbatementCostCurve::from_max_marginal(
                self.c0,
                max.unwrap_or(550.0) / USD_PER_TON_PER_TRILLION_PER_GTON,
                self.c2,
            ),
        };
        curve.validate()?;
        Ok(curve)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClimateSpec {
    /// Warming per trillion tons of carbon, K.
    pub tcre: f64,
}

impl Default for ClimateSpec {
    fn default() -> Self {
        ClimateSpec {
            tcre: DEFAULT_TCRE_K_PER_TTONC,
        }
    }
}

impl ClimateSpec {
    pub fn alpha(&self) -> Result<f64> {
        if !(self.tcre > 0.0 && self.tcre.is_finite()) {
            return Err(Error::Config(format!(
                "climate: tcre must be positive, got {}",
                self.tcre
            )));
        }
        Ok(alpha_from_tcre(self.tcre))
    }
}

/// Damage model given either by its parameters or by two calibration points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "variant", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DamageSpec {
    #[default]
    None,
    PowerLaw {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d0: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d1: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t0: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        calibration: Option<[CalibrationPoint; 2]>,
    },
    Logistic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d2: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        e_d: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        calibration: Option<[CalibrationPoint; 2]>,
    },
}

impl DamageSpec {
    pub fn resolve(&self, alpha: f64) -> Result<DamageModel> {
        let model = match *self {
            DamageSpec::None => DamageModel::none(alpha),
            DamageSpec::PowerLaw {
                d0,
                d1,
                t0,
                calibration,
            } => {
                let t0 = t0.unwrap_or(DEFAULT_T0);
                match (d0, d1, calibration) {
                    (Some(d0), Some(d1), None) => DamageModel {
                        variant: DamageVariant::PowerLaw { d0, d1, t0 },
                        alpha,
                    },
                    (None, None, Some([p1, p2])) => {
                        calibrate_damage(DamageVariantKind::PowerLaw { t0 }, p1, p2, alpha)?
                    }
                    _ => {
                        return Err(Error::Config(
                            "power-law damage needs either d0 and d1 or calibration".into(),
                        ))
                    }
                }
            }
            DamageSpec::Logistic {
                d2,
                e_d,
                calibration,
            } => match (d2, e_d, calibration) {
                (Some(d2), Some(e_d), None) => DamageModel {
                    variant: DamageVariant::Logistic { d2, e_d },
                    alpha,
                },
                (None, None, Some([p1, p2])) => {
                    calibrate_damage(DamageVariantKind::Logistic, p1, p2, alpha)?
                }
                _ => {
                    return Err(Error::Config(
                        "logistic damage needs either d2 and e_d or calibration".into(),
                    ))
                }
            },
        };
        model.validate()?;
        Ok(model)
    }
}

/// One named combination of learning and damage models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantSpec {
    pub name: String,
    #[serde(default = "no_learning")]
    pub learning: LearningModel,
    #[serde(default)]
    pub damage: DamageSpec,
}

fn no_learning() -> LearningModel {
    LearningModel::None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    /// Cumulative abatement goals, Gton.
    pub m_tot: Vec<f64>,
    /// Start of abatement, years from now.
    #[serde(default)]
    pub start_year: f64,
    /// Variant names to run; all variants when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variants: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationSpec {
    pub trials: usize,
    /// Peak perturbation of cumulative abatement, Gton.
    pub amplitude: f64,
    pub seed: u64,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        PerturbationSpec {
            trials: 100,
            amplitude: 10.0,
            seed: 0,
        }
    }
}

/// Model sections shared by scenario and sweep files.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub economy: EconomySpec,
    pub growth: GrowthSchedule,
    pub interest: GrowthSchedule,
    pub cost_curve: CostCurveSpec,
    pub climate: ClimateSpec,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            economy: EconomySpec::default(),
            growth: default_growth(),
            interest: default_interest(),
            cost_curve: CostCurveSpec::default(),
            climate: ClimateSpec::default(),
        }
    }
}

pub(crate) fn default_growth() -> GrowthSchedule {
    GrowthSchedule::exponential_decay(0.04, 40.0)
}

pub(crate) fn default_interest() -> GrowthSchedule {
    GrowthSchedule::constant(0.03)
}

impl ModelSpec {
    /// Models with the given learning and damage choices.
    pub fn resolve(&self, learning: LearningModel, damage: &DamageSpec) -> Result<ModelSet> {
        let alpha = self.climate.alpha()?;
        let models = ModelSet {
            econ: self.economy.resolve(alpha)?,
            growth: self.growth,
            interest: self.interest,
            curve: self.cost_curve.resolve()?,
            learning,
            damage: damage.resolve(alpha)?,
        };
        models.validate()?;
        Ok(models)
    }
}

/// A scenario file: shared models, a set of variants, goals, and numerics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub economy: EconomySpec,
    #[serde(default = "default_growth")]
    pub growth: GrowthSchedule,
    #[serde(default = "default_interest")]
    pub interest: GrowthSchedule,
    #[serde(default)]
    pub cost_curve: CostCurveSpec,
    #[serde(default)]
    pub climate: ClimateSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub perturbation: PerturbationSpec,
    pub scenario: ScenarioSpec,
    #[serde(rename = "variant")]
    pub variants: Vec<VariantSpec>,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenario.m_tot.is_empty() {
            return Err(Error::Config("scenario.m_tot must not be empty".into()));
        }
        if let Some(m) = self
            .scenario
            .m_tot
            .iter()
            .find(|m| !(**m >= 0.0 && m.is_finite()))
        {
            return Err(Error::Config(format!(
                "scenario.m_tot entries must be nonnegative, got {m}"
            )));
        }
        let mut seen = BTreeSet::new();
        for m in &self.scenario.m_tot {
            if !seen.insert(m.to_bits()) {
                return Err(Error::Config(format!("scenario.m_tot lists {m} twice")));
            }
        }
        if self.variants.is_empty() {
            return Err(Error::Config("at least one [[variant]] is required".into()));
        }
        let mut names = BTreeSet::new();
        for v in &self.variants {
            if v.name.is_empty()
                || !v
                    .name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
            {
                return Err(Error::Config(format!(
                    "variant name {:?} must be nonempty ASCII letters, digits, '-' or '_'",
                    v.name
                )));
            }
            if !names.insert(v.name.as_str()) {
                return Err(Error::Config(format!(
                    "duplicate variant name {:?}",
                    v.name
                )));
            }
            self.variant_models(v)
                .map_err(|e| Error::Config(format!("variant {:?}: {e}", v.name)))?;
        }
        if let Some(selected) = &self.scenario.variants {
            if selected.is_empty() {
                return Err(Error::Config("scenario.variants must not be empty".into()));
            }
            for name in selected {
                if !names.contains(name.as_str()) {
                    return Err(Error::Config(format!(
                        "scenario.variants names unknown variant {name:?}"
                    )));
                }
            }
        }
        self.solver.validate()?;
        if !(self.perturbation.amplitude >= 0.0 && self.perturbation.amplitude.is_finite()) {
            return Err(Error::Config(
                "perturbation.amplitude must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// Variants to run, in file order.
    pub fn selected_variants(&self) -> Vec<&VariantSpec> {
        match &self.scenario.variants {
            None => self.variants.iter().collect(),
            Some(sel) => self
                .variants
                .iter()
                .filter(|v| sel.contains(&v.name))
                .collect(),
        }
    }

    pub fn model_spec(&self) -> ModelSpec {
        ModelSpec {
            economy: self.economy.clone(),
            growth: self.growth,
            interest: self.interest,
            cost_curve: self.cost_curve.clone(),
            climate: self.climate.clone(),
        }
    }

    pub fn variant_models(&self, v: &VariantSpec) -> Result<ModelSet> {
        self.model_spec().resolve(v.learning, &v.damage)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
output_dir = "out"

[economy]
present_warming = 1.0

[growth]
kind = "exponential-decay"
base_rate = 0.04
efold_time = 40.0

[interest]
kind = "constant"
base_rate = 0.03

[cost_curve]
max_marginal_usd_per_ton = 550.0
c2 = 1.6

[scenario]
m_tot = [1000.0, 3000.0]
start_year = 5.0

[solver]
dt = 0.1

[[variant]]
name = "none"

[[variant]]
name = "additive"
learning = { variant = "additive", c_f = 1e-5 }

[[variant]]
name = "damage"
[variant.damage]
variant = "power-law"
calibration = [{ warming = 2.5, fraction = 0.05 }, { warming = 5.0, fraction = 0.2 }]
"#;

    #[test]
    fn parses_and_resolves() {
        let cfg = ScenarioConfig::from_toml(EXAMPLE).unwrap();
        assert_eq!(cfg.variants.len(), 3);
        assert_eq!(cfg.solver.dt, 0.1);
        assert_eq!(cfg.solver.shoot_tol, SolverConfig::default().shoot_tol);
        let m = cfg.variant_models(&cfg.variants[2]).unwrap();
        match m.damage.variant {
            DamageVariant::PowerLaw { d0, d1, t0 } => {
                assert!((d1 - 2.0).abs() < 1e-12 && (d0 - 0.8).abs() < 1e-12 && t0 == 10.0)
            }
            other => panic!("{other:?}"),
        }
        assert!((m.curve.c1 - 0.55 / 2.6).abs() < 1e-15);
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = ScenarioConfig::from_toml(EXAMPLE).unwrap();
        let again = ScenarioConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn unknown_keys_are_errors() {
        let bad = EXAMPLE.replace("c2 = 1.6", "c2 = 1.6\nc3 = 1.0");
        assert!(matches!(
            ScenarioConfig::from_toml(&bad),
            Err(Error::Config(_))
        ));
        let bad = EXAMPLE.replace("[solver]\ndt = 0.1", "[solver]\nstep = 0.1");
        assert!(ScenarioConfig::from_toml(&bad).is_err());
        let bad = EXAMPLE.replace("c_f = 1e-5", "cf = 1e-5");
        assert!(ScenarioConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn referential_checks() {
        let bad = EXAMPLE.replace(
            "start_year = 5.0",
            "start_year = 5.0\nvariants = [\"nope\"]",
        );
        assert!(ScenarioConfig::from_toml(&bad).is_err());
        let bad = EXAMPLE.replace("m_tot = [1000.0, 3000.0]", "m_tot = []");
        assert!(ScenarioConfig::from_toml(&bad).is_err());
        let bad = EXAMPLE.replace("name = \"additive\"", "name = \"none\"");
        assert!(ScenarioConfig::from_toml(&bad).is_err());
        let bad = EXAMPLE.replace(
            "present_warming = 1.0",
            "present_warming = 1.0\ne_hist = 2000.0",
        );
        assert!(ScenarioConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn damage_needs_exactly_one_source() {
        let alpha = 4.5e-4;
        let both = DamageSpec::PowerLaw {
            d0: Some(0.8),
            d1: Some(2.0),
            t0: None,
            calibration: Some([
                CalibrationPoint::new(2.5, 0.05),
                CalibrationPoint::new(5.0, 0.2),
            ]),
        };
        assert!(both.resolve(alpha).is_err());
        let partial = DamageSpec::Logistic {
            d2: Some(0.1),
            e_d: None,
            calibration: None,
        };
        assert!(partial.resolve(alpha).is_err());
    }
}
