//! Config-driven batch runs: scenario solves and parameter sweeps, written
//! as CSV.

mod config;
mod fit;
mod format;
mod run;
mod sweep;

pub use config::{
    ClimateSpec, CostCurveSpec, DamageSpec, EconomySpec, ModelSpec, PerturbationSpec,
    ScenarioConfig, ScenarioSpec, VariantSpec,
};
pub use fit::{fit_growth_rate, GrowthFit};
pub use format::sig12;
pub use run::{
    output_dir, pathway_file_name, render_scenario, run_scenario, tax_growth_fit, ScenarioOutput,
    ScenarioReport, ScenarioRow, SolveSummary,
};
pub use sweep::{
    render_sweep, run_sweep, Axis, Response, SweepCell, SweepParam, SweepReport, SweepSpec,
    DEFAULT_SWEEP_M_TOT,
};
