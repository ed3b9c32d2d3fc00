use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::ScenarioConfig;
use super::fit::{fit_growth_rate, GrowthFit};
use super::format::sig12;
use crate::error::{Error, Result};
use crate::pathway_solver::{
    carbon_tax_path, el_residual, perturbation_check, solve_bvp, DiscountedCost, Pathway,
    PerturbationReport,
};

pub const PATHWAY_UNITS: &str = "# units: year = years from present; M, cum_emissions = Gton CO2; \
m_dot, emissions = Gton CO2/yr; sigma = abatement rate / BAU emission rate; \
warming_K = K above preindustrial; tax_usd_per_ton = $/ton CO2; \
annual_cost_trillion = trillion $/yr (abatement + damage)";

pub const SUMMARY_UNITS: &str = "# units: m_tot, start_year in Gton CO2 and years; \
m_dot_start = Gton CO2/yr; tax_start = $/ton CO2; pv_* = trillion $ present value at t = 0; \
tax_growth = fraction/yr with 95% interval; perturb_min_delta = trillion $; step = years";

const PATHWAY_HEADER: [&str; 9] = [
    "year",
    "M",
    "m_dot",
    "sigma",
    "emissions",
    "cum_emissions",
    "warming_K",
    "tax_usd_per_ton",
    "annual_cost_trillion",
];

const SUMMARY_HEADER: [&str; 19] = [
    "variant",
    "m_tot",
    "start_year",
    "status",
    "m_dot_start",
    "sigma_start",
    "tax_start",
    "pv_abatement",
    "pv_damage",
    "pv_total",
    "tax_growth",
    "tax_growth_ci_low",
    "tax_growth_ci_high",
    "el_residual",
    "tax_route_mismatch",
    "perturb_trials",
    "perturb_min_delta",
    "perturb_passed",
    "step",
];

/// Diagnostics of one successful solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveSummary {
    pub initial_rate: f64,
    pub initial_sigma: f64,
    pub initial_tax: f64,
    pub discounted: DiscountedCost,
    /// `None` when the tax is not positive throughout (zero goal).
    pub tax_growth: Option<GrowthFit>,
    pub el_residual: f64,
    pub tax_route_mismatch: f64,
    /// `None` for the zero pathway.
    pub perturbation: Option<PerturbationReport>,
    pub step: f64,
}

/// One (variant, goal) cell of a scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRow {
    pub variant: String,
    pub m_tot: f64,
    pub start_year: f64,
    pub outcome: std::result::Result<SolveSummary, Error>,
}

/// Rendered output of a scenario run: `(file name, contents)` pairs plus
/// the summary rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutput {
    pub files: Vec<(String, String)>,
    pub rows: Vec<ScenarioRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub written: Vec<PathBuf>,
    pub rows: Vec<ScenarioRow>,
}

pub fn pathway_file_name(variant: &str, m_tot: f64) -> String {
    format!("pathway_{variant}_M{}.csv", sig12(m_tot))
}

/// Exponential growth rate of the carbon tax from the start of abatement on.
pub fn tax_growth_fit(path: &Pathway) -> Result<GrowthFit> {
    let act = path.active();
    fit_growth_rate(&path.grid[act.clone()], &path.tax[act])
}

fn summarize(
    path: &Pathway,
    cfg: &ScenarioConfig,
    models: &crate::pathway_solver::ModelSet,
) -> Result<SolveSummary> {
    let moving = path.initial_rate() > 0.0;
    let tax = carbon_tax_path(path, models)?;
    let perturbation = moving.then(|| {
        perturbation_check(
            path,
            models,
            cfg.perturbation.trials,
            cfg.perturbation.amplitude,
            cfg.perturbation.seed,
        )
    });
    Ok(SolveSummary {
        initial_rate: path.initial_rate(),
        initial_sigma: path.initial_sigma(),
        initial_tax: path.initial_tax(),
        discounted: path.discounted,
        tax_growth: if moving {
            tax_growth_fit(path).ok()
        } else {
            None
        },
        el_residual: if moving {
            el_residual(path, models)?
        } else {
            0.0
        },
        tax_route_mismatch: tax.derivative_mismatch.max(tax.integral_mismatch),
        perturbation,
        step: path.active_step(),
    })
}

fn pathway_csv(path: &Pathway, variant: &str, m_tot: f64) -> Result<String> {
    let mut out = String::new();
    out.push_str(PATHWAY_UNITS);
    out.push('\n');
    out.push_str(&format!(
        "# variant = {variant}; m_tot = {} Gton CO2; start_year = {}\n",
        sig12(m_tot),
        sig12(path.start_year)
    ));
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(PATHWAY_HEADER).map_err(csv_err)?;
    for k in 0..path.len() {
        let row = [
            path.grid[k],
            path.cum_abatement[k],
            path.abatement_rate[k],
            path.sigma[k],
            path.emissions[k],
            path.cum_emissions[k],
            path.warming[k],
            path.tax[k],
            path.annual_cost[k],
        ];
        w.write_record(row.iter().map(|v| sig12(*v)))
            .map_err(csv_err)?;
    }
    out.push_str(&finish(w)?);
    Ok(out)
}

fn summary_csv(rows: &[ScenarioRow]) -> Result<String> {
    let mut out = String::from(SUMMARY_UNITS);
    out.push('\n');
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    for row in rows {
        let mut rec = vec![row.variant.clone(), sig12(row.m_tot), sig12(row.start_year)];
        match &row.outcome {
            Err(e) => {
                rec.push(format!("error: {e}"));
                rec.resize(SUMMARY_HEADER.len(), String::new());
            }
            Ok(s) => {
                let opt = |v: Option<f64>| v.map(sig12).unwrap_or_default();
                rec.push("ok".into());
                rec.extend(
                    [
                        s.initial_rate,
                        s.initial_sigma,
                        s.initial_tax,
                        s.discounted.abatement,
                        s.discounted.damage,
                        s.discounted.total,
                    ]
                    .map(sig12),
                );
                rec.push(opt(s.tax_growth.map(|f| f.rate)));
                rec.push(opt(s.tax_growth.map(|f| f.ci95.0)));
                rec.push(opt(s.tax_growth.map(|f| f.ci95.1)));
                rec.push(sig12(s.el_residual));
                rec.push(sig12(s.tax_route_mismatch));
                match &s.perturbation {
                    Some(p) => {
                        rec.push(p.trials.to_string());
                        rec.push(sig12(p.min_delta));
                        rec.push(p.passed.to_string());
                    }
                    None => rec.extend([String::new(), String::new(), String::new()]),
                }
                rec.push(sig12(s.step));
            }
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    out.push_str(&finish(w)?);
    Ok(out)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Solves every selected (variant, goal) pair and renders the CSV files
/// without touching the filesystem. Solver failures become error rows; the
/// remaining pairs still run. Pairs run concurrently; output order follows
/// the config (variants, then goals).
pub fn render_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    cfg.validate()?;
    let variants = cfg.selected_variants();
    let mut jobs = Vec::new();
    for v in &variants {
        let models = cfg.variant_models(v)?;
        for &m_tot in &cfg.scenario.m_tot {
            jobs.push((v.name.as_str(), models, m_tot));
        }
    }
    let start = cfg.scenario.start_year;
    let solved: Vec<(ScenarioRow, Option<String>)> = jobs
        .par_iter()
        .map(|&(name, models, m_tot)| {
            let attempt = solve_bvp(m_tot, start, &models, &cfg.solver).and_then(|path| {
                let summary = summarize(&path, cfg, &models)?;
                let csv = pathway_csv(&path, name, m_tot)?;
                Ok((summary, csv))
            });
            let (outcome, csv) = match attempt {
                Ok((s, csv)) => (Ok(s), Some(csv)),
                Err(e) => (Err(e), None),
            };
            let row = ScenarioRow {
                variant: name.to_string(),
                m_tot,
                start_year: start,
                outcome,
            };
            (row, csv)
        })
        .collect();

    let mut files = Vec::new();
    let mut rows = Vec::with_capacity(solved.len());
    for (row, csv) in solved {
        if let Some(csv) = csv {
            files.push((pathway_file_name(&row.variant, row.m_tot), csv));
        }
        rows.push(row);
    }
    files.push(("summary.csv".into(), summary_csv(&rows)?));
    Ok(ScenarioOutput { files, rows })
}

/// Directory a run writes to: the config's `output_dir`, or `out`.
pub fn output_dir(cfg: &ScenarioConfig) -> PathBuf {
    cfg.output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Renders a scenario and writes its files under [`output_dir`].
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let output = render_scenario(cfg)?;
    let dir = output_dir(cfg);
    let written = write_files(&dir, &output.files)?;
    Ok(ScenarioReport {
        written,
        rows: output.rows,
    })
}

pub(crate) fn write_files(dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let path = dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}
