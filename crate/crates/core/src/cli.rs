//! `retrofit-lcc` command line: exit 0 on success, 1 on usage or validation errors, 2 on I/O errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{
    base_energy, cumulative_waterfall, pareto_front, per_measure_deltas, rank_measures, EnergySource, Imported,
    Metrics, ParetoOptions, Simulated, EXHAUSTIVE_LIMIT,
};
use crate::econ::{calibrate_fuel_split, carbon_tax_at, FuelSplit};
use crate::enduse::EndUseTable;
use crate::io::config::{load_scenario_config, Mode, ScenarioConfig};
use crate::io::import::import_end_use_csv;
use crate::io::report::{emit_reports, ReportInput};
use crate::measures::{Catalog, Transformation};
use crate::sim::{calibrate_model, CalibrationResult, MonthlyWeather};
use crate::{Error, Result};

/// Environment variable naming the default report directory.
pub const OUT_ENV: &str = "RETROFIT_LCC_OUT";
pub const CALIBRATED_CONFIG: &str = "calibrated_config.toml";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "retrofit-lcc",
    version,
    about = "Evaluate building energy-retrofit measures: energy, cost, emissions and life-cycle cost"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-measure deltas, the cumulative waterfall and the Pareto front.
    Evaluate(RunArgs),
    /// Cumulative waterfall in the configured order.
    Waterfall(RunArgs),
    /// Pareto front of measure packages over (LCC, annual GHG).
    Pareto(RunArgs),
    /// Tune the declared model parameters against the configured targets.
    Calibrate(RunArgs),
    /// Load and validate the configuration without writing reports.
    Validate(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Scenario configuration file (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Report directory [default: $RETROFIT_LCC_OUT, then the config's report_dir, then ./out].
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Energy source, overriding the config.
    #[arg(long, value_name = "simulate|import")]
    mode: Option<Mode>,
    /// Only enumerate Pareto packages with at most this many measures.
    #[arg(long, value_name = "N")]
    max_size: Option<usize>,
}

/// Run with explicit arguments (the first item is the program name); returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let env_out = std::env::var_os(OUT_ENV).map(PathBuf::from);
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, env_out, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with the environment override and output streams supplied by the caller.
pub fn run_with<I, T>(argv: I, env_out: Option<PathBuf>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match execute(cli.command, env_out, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_io() {
                EXIT_IO
            } else {
                EXIT_INVALID
            }
        }
    }
}

enum Source {
    Simulated(Box<MonthlyWeather>),
    Imported(BTreeMap<String, EndUseTable>),
}

impl Source {
    fn load(config: &ScenarioConfig) -> Result<Self> {
        match config.mode {
            Mode::Simulate => Ok(Source::Simulated(Box::new(config.weather()?))),
            Mode::Import => {
                let path = config
                    .import_path()
                    .ok_or_else(|| Error::InvalidInput("mode = \"import\" needs import_path in the config".into()))?;
                Ok(Source::Imported(import_end_use_csv(&path)?.cases))
            }
        }
    }

    fn with<R>(&self, f: impl FnOnce(&dyn EnergySource) -> R) -> R {
        match self {
            Source::Simulated(weather) => f(&Simulated { weather }),
            Source::Imported(cases) => f(&Imported { cases }),
        }
    }
}

fn out_dir(args: &RunArgs, env_out: Option<PathBuf>, config: &ScenarioConfig) -> PathBuf {
    args.out
        .clone()
        .or(env_out.filter(|p| !p.as_os_str().is_empty()))
        .or_else(|| config.report_dir())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn reference_split(config: &ScenarioConfig) -> Result<Option<FuelSplit>> {
    let Some(r) = &config.reference else {
        return Ok(None);
    };
    let (Some(energy), Some(cost)) = (r.total_energy_gj, r.energy_cost_cad) else {
        return Ok(None);
    };
    let econ = &config.economics;
    let carbon = match (econ.include_carbon, r.ghg_t) {
        (true, Some(ghg)) => Some(ghg * carbon_tax_at(&econ.carbon_tax, econ.anchor_year)?),
        _ => None,
    };
    calibrate_fuel_split(energy, cost, &econ.tariff, carbon, r.fuel_constraint).map(Some)
}

fn execute(command: Command, env_out: Option<PathBuf>, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let (args, kind) = match &command {
        Command::Evaluate(a) => (a, "evaluate"),
        Command::Waterfall(a) => (a, "waterfall"),
        Command::Pareto(a) => (a, "pareto"),
        Command::Calibrate(a) => (a, "calibrate"),
        Command::Validate(a) => (a, "validate"),
    };
    let loaded = load_scenario_config(&args.config)?;
    for w in &loaded.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    let mut config = loaded.config;
    if let Some(mode) = args.mode {
        config.mode = mode;
        let problems = config.validate(&args.config.display().to_string());
        if !problems.is_empty() {
            return Err(Error::Config(problems));
        }
    }
    let catalog = config.catalog()?;
    let source = Source::load(&config)?;

    if kind == "validate" {
        source.with(|s| base_energy(&config.building, s))?;
        let _ = writeln!(
            out,
            "{}: valid ({} measures, mode {:?})",
            args.config.display(),
            catalog.len(),
            config.mode
        );
        return Ok(());
    }

    let scenario = &config.economics;
    let building = &config.building;
    let mut report = ReportInput {
        scenario: config.name.clone().unwrap_or_else(|| file_stem(&args.config)),
        mode: config.mode,
        reference: config.reference.clone(),
        fuel_split: reference_split(&config)?,
        ..Default::default()
    };
    let base_table = source.with(|s| base_energy(building, s))?;
    report.base = Some(Metrics::of(&base_table, scenario)?);
    report.base_end_uses = Some(base_table);

    let dir = out_dir(args, env_out, &config);
    match kind {
        "evaluate" => {
            let rows = source.with(|s| per_measure_deltas(building, &catalog, s, scenario))?;
            report.rankings = Some(rank_measures(&rows));
            report.rows = rows;
            let package = config.waterfall_package(&catalog)?;
            report.waterfall = Some(source.with(|s| cumulative_waterfall(building, &package, &catalog, s, scenario))?);
            if args.max_size.is_none() && catalog.len() > EXHAUSTIVE_LIMIT {
                report.notes.push(format!(
                    "Pareto front skipped: {} measures exceed the exhaustive limit of {EXHAUSTIVE_LIMIT}; pass --max-size",
                    catalog.len()
                ));
            } else {
                let options = ParetoOptions {
                    max_size: args.max_size,
                };
                report.pareto = Some(source.with(|s| pareto_front(building, &catalog, s, scenario, options))?);
            }
        }
        "waterfall" => {
            let package = config.waterfall_package(&catalog)?;
            report.waterfall = Some(source.with(|s| cumulative_waterfall(building, &package, &catalog, s, scenario))?);
        }
        "pareto" => {
            let options = ParetoOptions {
                max_size: args.max_size,
            };
            report.pareto = Some(source.with(|s| pareto_front(building, &catalog, s, scenario, options))?);
        }
        "calibrate" => {
            let Source::Simulated(weather) = &source else {
                return Err(Error::InvalidInput("calibration needs mode = \"simulate\"".into()));
            };
            let setup = config
                .calibration
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("the config has no [calibration] section".into()))?;
            let result = calibrate_model(building, weather, setup)?;
            let calibrated = calibrated_config(&config, &catalog, &result);
            let tuned = calibrated.building.clone();
            let tuned_table = simulate_tuned(&tuned, weather)?;
            report.notes.push(format!(
                "Calibrated base: {} GJ/yr total; tuned configuration written to {CALIBRATED_CONFIG}",
                crate::io::report::fmt6(tuned_table.total())
            ));
            if !result.feasible {
                report.notes.push(format!(
                    "Targets not reached: residual {} exceeds tolerance {}",
                    crate::io::report::fmt6(result.residual),
                    crate::io::report::fmt6(setup.tolerance)
                ));
            }
            let _ = writeln!(
                out,
                "calibration residual {} ({})",
                crate::io::report::fmt6(result.residual),
                if result.feasible {
                    "within tolerance"
                } else {
                    "infeasible"
                }
            );
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            let path = dir.join(CALIBRATED_CONFIG);
            std::fs::write(&path, calibrated.to_toml()?).map_err(|e| Error::io(&path, e))?;
            report.calibration = Some(result);
        }
        _ => unreachable!("validate handled above"),
    }

    let written = emit_reports(&report, &dir)?;
    for p in written {
        let _ = writeln!(out, "wrote {}", p.display());
    }
    Ok(())
}

fn simulate_tuned(b: &crate::model::BuildingModel, w: &MonthlyWeather) -> Result<EndUseTable> {
    crate::sim::simulate_annual(b, w)
}

/// Config with tuned values written back; a tuned PV ratio also updates the catalog's PV measures.
fn calibrated_config(config: &ScenarioConfig, catalog: &Catalog, result: &CalibrationResult) -> ScenarioConfig {
    let mut out = config.clone();
    out.building = result.apply(&config.building);
    if let Some(pr) = result.pv_performance_ratio {
        if config.building.pv.is_none() {
            for (m, orig) in out.measures.iter_mut().zip(catalog.measures()) {
                if let Transformation::AddPv { performance_ratio, .. } = &mut m.transformation {
                    debug_assert_eq!(m.id, orig.id);
                    *performance_ratio = pr;
                }
            }
        }
        if let Some(c) = out.calibration.as_mut() {
            if let Some(pv) = c.pv_reference.as_mut() {
                pv.performance_ratio = pr;
            }
        }
    }
    out
}

fn file_stem(p: &Path) -> String {
    p.file_stem()
        .map_or_else(|| "scenario".into(), |s| s.to_string_lossy().into_owned())
}
