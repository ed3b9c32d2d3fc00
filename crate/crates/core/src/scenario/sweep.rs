use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{
    default_growth, default_interest, ClimateSpec, CostCurveSpec, DamageSpec, EconomySpec,
    ModelSpec,
};
use super::format::sig12;
use super::run::{tax_growth_fit, write_files};
use crate::analytic::{
    delay_cost_growth, initial_tax, initial_tax_from_goal, overshoot_threshold, tax_delay_growth,
    AnalyticScenario,
};
use crate::cost_models::{LearningModel, DEFAULT_T0};
use crate::economy::GrowthSchedule;
use crate::error::{Error, Result};
use crate::pathway_solver::{solve_bvp, ModelSet, SolverConfig};

/// Goal used when neither the fixed values nor an axis set one, Gton.
pub const DEFAULT_SWEEP_M_TOT: f64 = 3000.0;

/// A scalar a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Base rate of the interest schedule, fraction/yr.
    InterestRate,
    /// Base rate of the GDP growth schedule, fraction/yr.
    GrowthRate,
    /// e-folding time of a decaying GDP growth schedule, years.
    GrowthEfoldTime,
    StartYear,
    Horizon,
    C2,
    Theta,
    /// Cumulative abatement goal, Gton.
    MTot,
    /// Warming at the horizon, K; replaces `m_tot` for the initial tax.
    GoalWarming,
    /// Additive learning slope, trillion $/Gton².
    CF,
    /// Exponential learning scale, Gton.
    MH,
    /// Power-law learning exponent.
    B,
    /// K per trillion tons of carbon.
    Tcre,
    /// Power-law damage fraction at 2.5 K; rescales `d0`, keeping `d1` and `t0`.
    /// Zero switches damages off.
    #[serde(rename = "damage_at_2p5k")]
    DamageAt2p5K,
}

/// Warming at which [`SweepParam::DamageAt2p5K`] pins the damage fraction, K.
const DAMAGE_REFERENCE_WARMING: f64 = 2.5;

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::InterestRate => "interest_rate",
            SweepParam::GrowthRate => "growth_rate",
            SweepParam::GrowthEfoldTime => "growth_efold_time",
            SweepParam::StartYear => "start_year",
            SweepParam::Horizon => "horizon",
            SweepParam::C2 => "c2",
            SweepParam::Theta => "theta",
            SweepParam::MTot => "m_tot",
            SweepParam::GoalWarming => "goal_warming",
            SweepParam::CF => "c_f",
            SweepParam::MH => "m_h",
            SweepParam::B => "b",
            SweepParam::Tcre => "tcre",
            SweepParam::DamageAt2p5K => "damage_at_2p5k",
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Quantity reported for each sweep cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Response {
    /// Fitted growth rate of the solved carbon tax, fraction/yr.
    TaxGrowth,
    /// Closed-form initial carbon tax, $/ton.
    InitialTax,
    /// Closed-form growth of total cost per year of delay, fraction/yr.
    DelayCostGrowth,
    /// Closed-form growth of the initial tax per year of delay, fraction/yr.
    TaxDelayGrowth,
    /// Lowest future warming reachable without overshoot, K.
    OvershootThreshold,
}

impl Response {
    pub fn name(self) -> &'static str {
        match self {
            Response::TaxGrowth => "tax_growth",
            Response::InitialTax => "initial_tax",
            Response::DelayCostGrowth => "delay_cost_growth",
            Response::TaxDelayGrowth => "tax_delay_growth",
            Response::OvershootThreshold => "overshoot_threshold",
        }
    }

    fn units(self) -> &'static str {
        match self {
            Response::TaxGrowth | Response::DelayCostGrowth | Response::TaxDelayGrowth => {
                "fraction/yr"
            }
            Response::InitialTax => "$/ton CO2",
            Response::OvershootThreshold => "K of future warming",
        }
    }
}

/// Evenly spaced values `start, start + step, ...` up to `stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    #[serde(default)]
    pub step: f64,
}

impl Axis {
    pub fn values(&self) -> Result<Vec<f64>> {
        let bad = |why: &str| Error::Config(format!("axis {}: {why}", self.param));
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(bad("range must be finite"));
        }
        if self.start == self.stop {
            return Ok(vec![self.start]);
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(bad("step must be positive"));
        }
        if self.stop < self.start {
            return Err(bad("stop must not be below start"));
        }
        let span = (self.stop - self.start) / self.step;
        let n = span.round();
        if (span - n).abs() > 1e-9 * span.max(1.0) {
            return Err(bad("step must divide stop - start"));
        }
        if n > 1e6 {
            return Err(bad("too many points"));
        }
        Ok((0..=n as usize)
            .map(|k| self.start + k as f64 * self.step)
            .collect())
    }
}

/// A sweep file: one or two axes, a response, fixed overrides, and the
/// model sections of a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// File name of the grid CSV.
    #[serde(default = "default_output")]
    pub output: String,
    pub response: Response,
    pub axis1: Axis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis2: Option<Axis>,
    #[serde(default)]
    pub fixed: BTreeMap<SweepParam, f64>,
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
    #[serde(default = "no_learning")]
    pub learning: LearningModel,
    #[serde(default)]
    pub damage: DamageSpec,
    #[serde(default)]
    pub solver: SolverConfig,
}

fn default_output() -> String {
    "sweep.csv".into()
}

fn no_learning() -> LearningModel {
    LearningModel::None
}

/// One evaluated cell; `value` holds the failure if the cell could not be computed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub axis1: f64,
    pub axis2: Option<f64>,
    pub value: std::result::Result<f64, Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub written: PathBuf,
    pub cells: Vec<SweepCell>,
}

/// Everything a response needs at one point of parameter space.
#[derive(Debug, Clone)]
struct Point {
    models: ModelSpec,
    learning: LearningModel,
    damage: DamageSpec,
    m_tot: f64,
    start_year: f64,
    goal_warming: Option<f64>,
}

fn with_base_rate(s: GrowthSchedule, rate: f64) -> GrowthSchedule {
    match s {
        GrowthSchedule::Constant { .. } => GrowthSchedule::Constant { base_rate: rate },
        GrowthSchedule::ExponentialDecay { efold_time, .. } => GrowthSchedule::ExponentialDecay {
            base_rate: rate,
            efold_time,
        },
    }
}

impl Point {
    fn apply(&mut self, param: SweepParam, v: f64) -> Result<()> {
        let wrong_learning = |want: &str| {
            Error::Config(format!(
                "sweep parameter {param} needs {want} learning, got {:?}",
                self.learning
            ))
        };
        match param {
            SweepParam::InterestRate => {
                self.models.interest = with_base_rate(self.models.interest, v)
            }
            SweepParam::GrowthRate => self.models.growth = with_base_rate(self.models.growth, v),
            SweepParam::GrowthEfoldTime => match self.models.growth {
                GrowthSchedule::ExponentialDecay { base_rate, .. } => {
                    self.models.growth = GrowthSchedule::ExponentialDecay {
                        base_rate,
                        efold_time: v,
                    }
                }
                GrowthSchedule::Constant { .. } => {
                    return Err(Error::Config(
                        "growth_efold_time needs an exponential-decay growth schedule".into(),
                    ))
                }
            },
            SweepParam::StartYear => self.start_year = v,
            SweepParam::Horizon => self.models.economy.horizon = v,
            SweepParam::C2 => self.models.cost_curve.c2 = v,
            SweepParam::Theta => self.models.economy.theta = v,
            SweepParam::MTot => self.m_tot = v,
            SweepParam::GoalWarming => self.goal_warming = Some(v),
            SweepParam::CF => match self.learning {
                LearningModel::Additive { .. } => {
                    self.learning = LearningModel::Additive { c_f: v }
                }
                _ => return Err(wrong_learning("additive")),
            },
            SweepParam::MH => match self.learning {
                LearningModel::Exponential { .. } => {
                    self.learning = LearningModel::Exponential { m_h: v }
                }
                _ => return Err(wrong_learning("exponential")),
            },
            SweepParam::B => match self.learning {
                LearningModel::PowerLaw { m0, .. } => {
                    self.learning = LearningModel::PowerLaw { b: v, m0 }
                }
                _ => return Err(wrong_learning("power-law")),
            },
            SweepParam::Tcre => self.models.climate.tcre = v,
            SweepParam::DamageAt2p5K if v == 0.0 => self.damage = DamageSpec::None,
            SweepParam::DamageAt2p5K => match &mut self.damage {
                DamageSpec::PowerLaw {
                    d0: Some(d0),
                    d1: Some(d1),
                    t0,
                    calibration: None,
                } => {
                    let t0 = t0.unwrap_or(DEFAULT_T0);
                    *d0 = v / (DAMAGE_REFERENCE_WARMING / t0).powf(*d1);
                }
                _ => {
                    return Err(Error::Config(
                        "damage_at_2p5k needs power-law damage given by d0 and d1".into(),
                    ))
                }
            },
        }
        Ok(())
    }
}

impl SweepSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: SweepSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
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
        self.axis1.values()?;
        if let Some(a2) = &self.axis2 {
            a2.values()?;
            if a2.param == self.axis1.param {
                return Err(Error::Config(
                    "axis1 and axis2 vary the same parameter".into(),
                ));
            }
        }
        if let Some((p, v)) = self.fixed.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Config(format!("fixed.{p} must be finite, got {v}")));
        }
        if self.output.is_empty() || self.output.contains(['/', '\\']) {
            return Err(Error::Config(format!(
                "output must be a plain file name, got {:?}",
                self.output
            )));
        }
        self.solver.validate()?;
        // Resolve the base point so bad sections fail early.
        self.point(&[])?;
        Ok(())
    }

    fn point(&self, overrides: &[(SweepParam, f64)]) -> Result<Point> {
        let mut p = Point {
            models: ModelSpec {
                economy: self.economy.clone(),
                growth: self.growth,
                interest: self.interest,
                cost_curve: self.cost_curve.clone(),
                climate: self.climate.clone(),
            },
            learning: self.learning,
            damage: self.damage.clone(),
            m_tot: DEFAULT_SWEEP_M_TOT,
            start_year: 0.0,
            goal_warming: None,
        };
        for (&param, &v) in &self.fixed {
            p.apply(param, v)?;
        }
        for &(param, v) in overrides {
            p.apply(param, v)?;
        }
        Ok(p)
    }

    /// Model set at a point of parameter space.
    pub fn models_at(&self, overrides: &[(SweepParam, f64)]) -> Result<ModelSet> {
        let p = self.point(overrides)?;
        p.models.resolve(p.learning, &p.damage)
    }

    /// The response at one point; sweeps call exactly this for every cell.
    pub fn evaluate(&self, overrides: &[(SweepParam, f64)]) -> Result<f64> {
        let p = self.point(overrides)?;
        let models = p.models.resolve(p.learning, &p.damage)?;
        if self.response == Response::TaxGrowth {
            let path = solve_bvp(p.m_tot, p.start_year, &models, &self.solver)?;
            return Ok(tax_growth_fit(&path)?.rate);
        }
        let s = AnalyticScenario::from_models(&models, p.m_tot, p.start_year)?;
        let alpha = models.damage.alpha;
        match self.response {
            Response::TaxGrowth => unreachable!("handled above"),
            Response::InitialTax => match p.goal_warming {
                Some(goal) => {
                    let present = alpha * models.econ.e_hist;
                    initial_tax_from_goal(&s, alpha, goal, present)
                }
                None => initial_tax(&s),
            },
            Response::DelayCostGrowth => delay_cost_growth(&s),
            Response::TaxDelayGrowth => tax_delay_growth(&s),
            Response::OvershootThreshold => Ok(overshoot_threshold(&s, alpha)?.warming),
        }
    }

    /// Grid cells in axis1-major order.
    pub fn cells(&self) -> Result<Vec<(f64, Option<f64>)>> {
        let a1 = self.axis1.values()?;
        let a2 = match &self.axis2 {
            Some(a) => a.values()?.into_iter().map(Some).collect(),
            None => vec![None],
        };
        Ok(a1
            .iter()
            .flat_map(|&x| a2.iter().map(move |&y| (x, y)))
            .collect())
    }
}

fn schedule_label(s: &GrowthSchedule) -> String {
    match *s {
        GrowthSchedule::Constant { base_rate } => format!("constant at {}", sig12(base_rate)),
        GrowthSchedule::ExponentialDecay {
            base_rate,
            efold_time,
        } => format!(
            "exponential decay from {} with e-folding time {} yr",
            sig12(base_rate),
            sig12(efold_time)
        ),
    }
}

/// Evaluates every cell (concurrently) and renders the grid CSV. Failed
/// cells are reported in the `status` column and leave `value` empty.
pub fn render_sweep(spec: &SweepSpec) -> Result<(String, Vec<SweepCell>)> {
    spec.validate()?;
    let cells: Vec<SweepCell> = spec
        .cells()?
        .par_iter()
        .map(|&(x, y)| {
            let mut overrides = vec![(spec.axis1.param, x)];
            if let (Some(a2), Some(y)) = (&spec.axis2, y) {
                overrides.push((a2.param, y));
            }
            SweepCell {
                axis1: x,
                axis2: y,
                value: spec.evaluate(&overrides),
            }
        })
        .collect();

    let mut out = format!(
        "# units: rates in fraction/yr, years from present, warming in K, goals in Gton CO2; \
         {} in {}\n",
        spec.response.name(),
        spec.response.units()
    );
    let base = spec.point(&[])?;
    out.push_str(&format!(
        "# growth schedule: {}; interest schedule: {}; learning: {:?}; damage: {:?}\n",
        schedule_label(&base.models.growth),
        schedule_label(&base.models.interest),
        base.learning,
        base.damage
    ));
    if !spec.fixed.is_empty() {
        let fixed: Vec<String> = spec
            .fixed
            .iter()
            .map(|(p, v)| format!("{p} = {}", sig12(*v)))
            .collect();
        out.push_str(&format!("# fixed: {}\n", fixed.join(", ")));
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header = vec![spec.axis1.param.name()];
    if let Some(a2) = &spec.axis2 {
        header.push(a2.param.name());
    }
    header.push(spec.response.name());
    header.push("status");
    w.write_record(&header)
        .map_err(|e| Error::Io(e.to_string()))?;
    for c in &cells {
        let mut rec = vec![sig12(c.axis1)];
        if let Some(y) = c.axis2 {
            rec.push(sig12(y));
        }
        match &c.value {
            Ok(v) => {
                rec.push(sig12(*v));
                rec.push("ok".into());
            }
            Err(e) => {
                rec.push(String::new());
                rec.push(format!("error: {e}"));
            }
        }
        w.write_record(&rec).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    out.push_str(&String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))?);
    Ok((out, cells))
}

/// Renders a sweep and writes it to `output_dir/output` (`out/` by default).
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepReport> {
    let (csv, cells) = render_sweep(spec)?;
    let dir = spec
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("out"));
    let written = write_files(&dir, &[(spec.output.clone(), csv)])?;
    Ok(SweepReport {
        written: written.into_iter().next().expect("one file written"),
        cells,
    })
}
