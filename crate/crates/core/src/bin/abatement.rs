use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use abatement::cost_models::{
    alpha_from_tcre, calibrate_damage, CalibrationPoint, DamageVariant, DamageVariantKind,
    DEFAULT_T0, DEFAULT_TCRE_K_PER_TTONC,
};
use abatement::scenario::{run_scenario, run_sweep, sig12, ScenarioConfig, SweepSpec};
use abatement::{verify, Error, Result};

/// Cost-minimizing CO2 abatement pathways.
#[derive(Parser)]
#[command(name = "abatement", version)]
struct Cli {
    /// Worker threads for solves and sweep cells (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve every (variant, M_tot) pair of a scenario file.
    Solve(RunArgs),
    /// Evaluate a response over a one- or two-axis parameter grid.
    Sweep(RunArgs),
    /// Run the built-in acceptance suite.
    Verify,
    /// Fit damage parameters through two (warming, fraction) points.
    CalibrateDamage(CalibrateArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding the file's `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Integration step in years.
    #[arg(long)]
    dt: Option<f64>,
    /// Seed of the perturbation trials.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    PowerLaw,
    Logistic,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long, value_enum)]
    variant: Family,
    /// First point as WARMING_K,FRACTION.
    #[arg(long, value_parser = parse_point)]
    p1: CalibrationPoint,
    /// Second point as WARMING_K,FRACTION.
    #[arg(long, value_parser = parse_point)]
    p2: CalibrationPoint,
    /// TCRE in K per 1000 Gton carbon.
    #[arg(long, default_value_t = DEFAULT_TCRE_K_PER_TTONC)]
    tcre: f64,
    /// Reference warming of the power law, K.
    #[arg(long, default_value_t = DEFAULT_T0)]
    t0: f64,
}

fn parse_point(s: &str) -> std::result::Result<CalibrationPoint, String> {
    let (w, f) = s
        .split_once(',')
        .ok_or_else(|| format!("expected WARMING,FRACTION, got `{s}`"))?;
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    Ok(CalibrationPoint::new(num(w)?, num(f)?))
}

fn solve(args: &RunArgs) -> Result<bool> {
    let mut cfg = ScenarioConfig::load(&args.config)?;
    if let Some(dir) = &args.out {
        cfg.output_dir = Some(dir.clone());
    }
    if let Some(dt) = args.dt {
        cfg.solver.dt = dt;
    }
    if let Some(seed) = args.seed {
        cfg.perturbation.seed = seed;
    }
    let report = run_scenario(&cfg)?;
    let mut ok = true;
    for row in &report.rows {
        if let Err(e) = &row.outcome {
            ok = false;
            eprintln!(
                "variant {} M_tot {} N {}: {e}",
                row.variant,
                sig12(row.m_tot),
                sig12(row.start_year)
            );
        }
    }
    for path in &report.written {
        println!("{}", path.display());
    }
    Ok(ok)
}

fn sweep(args: &RunArgs) -> Result<bool> {
    let mut spec = SweepSpec::load(&args.config)?;
    if let Some(dir) = &args.out {
        spec.output_dir = Some(dir.clone());
    }
    if let Some(dt) = args.dt {
        spec.solver.dt = dt;
    }
    if args.seed.is_some() {
        eprintln!("note: --seed has no effect on sweeps");
    }
    let report = run_sweep(&spec)?;
    let failed = report.cells.iter().filter(|c| c.value.is_err()).count();
    if failed > 0 {
        eprintln!("{failed} of {} cells failed", report.cells.len());
    }
    println!("{}", report.written.display());
    Ok(failed == 0)
}

fn run_verify() -> bool {
    let checks = verify::run_all();
    for c in &checks {
        println!("{c}");
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    println!("{passed}/{} criteria passed", checks.len());
    passed == checks.len()
}

fn calibrate(args: &CalibrateArgs) -> Result<()> {
    let kind = match args.variant {
        Family::PowerLaw => DamageVariantKind::PowerLaw { t0: args.t0 },
        Family::Logistic => DamageVariantKind::Logistic,
    };
    let model = calibrate_damage(kind, args.p1, args.p2, alpha_from_tcre(args.tcre))?;
    println!("[damage]");
    match model.variant {
        DamageVariant::PowerLaw { d0, d1, t0 } => {
            println!("variant = \"power-law\"");
            println!("d0 = {}\nd1 = {}\nt0 = {}", sig12(d0), sig12(d1), sig12(t0));
        }
        DamageVariant::Logistic { d2, e_d } => {
            println!("variant = \"logistic\"");
            println!("d2 = {}\ne_d = {}", sig12(d2), sig12(e_d));
        }
        DamageVariant::None => unreachable!("calibration never yields no damages"),
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Sweep(a) => sweep(a),
        Command::Verify => Ok(run_verify()),
        Command::CalibrateDamage(a) => calibrate(a).map(|()| true),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let outcome = pool
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
        .and_then(|pool| pool.install(|| dispatch(&cli)));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
