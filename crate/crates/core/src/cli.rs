//! The `qfa` command line.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0    | success |
//! | 1    | I/O failure while writing output |
//! | 2    | configuration or argument error |
//! | 3    | numeric failure, unstable verdict or failed constraint check |
//! | 4    | a pole lies on the evaluated frequency axis |
//! | 64   | unknown or missing subcommand |

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::analysis::{
    added_noise, gain_profile, loop_gain_bode, noise_csv, sensitivity_bound, stability,
    AmplifierSystem, DEFAULT_STABILITY_MARGIN,
};
use crate::config::{ExperimentKind, OutputFormat, RunConfig};
use crate::error::{Error, Result};
use crate::experiments::{run_noise_experiment, run_robustness_experiment};
use crate::format::{csv_table, g12, write_atomic};
use crate::interconnect::{
    close_ideal_feedback, close_lossy_feedback, ClosedLoopSystem, FeedbackLoopConfig,
};
use crate::models::{check_scattering_constraints, PlantModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_POLE: i32 = 4;
pub const EXIT_USAGE: i32 = 64;

/// Environment variable consulted for the seed when neither the flag nor
/// the config sets one.
pub const SEED_ENV: &str = "QFA_SEED";

const CONSTRAINT_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "qfa", version, about = "Coherent feedback amplifier analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Signal gain over the frequency grid.
    Gain(CommonArgs),
    /// Poles of the plant or closed loop.
    Poles(CommonArgs),
    /// Pole-sign stability verdict.
    Stability(CommonArgs),
    /// Added noise referred to the input.
    Noise(CommonArgs),
    /// Sensitivity bound 1/|1 - K21 G22| over the grid.
    Sensitivity(CommonArgs),
    /// Loop gain K21 G22 magnitude and phase.
    Bode(CommonArgs),
    /// Seeded Monte Carlo robustness or noise experiment.
    Montecarlo(CommonArgs),
    /// Bosonic scattering identities of the plant and closed loop.
    Constraints(CommonArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides grid.omega_min and grid.omega_max.
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], allow_negative_numbers = true)]
    omega_range: Option<Vec<f64>>,
    /// Overrides grid.n_points.
    #[arg(long)]
    points: Option<usize>,
    /// Overrides experiment.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::PoleEvaluation { .. } => EXIT_POLE,
        Error::Config(_) | Error::Parameter(_) | Error::Json(_) => EXIT_CONFIG,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_NUMERIC,
    }
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => EXIT_USAGE,
                _ => EXIT_CONFIG,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let seed_env = std::env::var(SEED_ENV).ok();
    match dispatch(cli.command, seed_env.as_deref()) {
        Ok(outcome) => finish(outcome, out, err),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// What a subcommand produced: the payload, where it goes, and a summary line.
struct Outcome {
    payload: String,
    path: Option<PathBuf>,
    summary: String,
}

fn finish(outcome: Outcome, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let written = match &outcome.path {
        Some(path) => write_atomic(path, outcome.payload.as_bytes()).and_then(|_| {
            writeln!(out, "{}", outcome.summary)?;
            Ok(())
        }),
        None => (|| {
            out.write_all(outcome.payload.as_bytes())?;
            writeln!(err, "{}", outcome.summary)?;
            Ok(())
        })(),
    };
    match written {
        Ok(()) => EXIT_OK,
        // A closed pipe (`qfa gain ... | head`) is not an error.
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

struct Run {
    cfg: RunConfig,
    command: &'static str,
    format: OutputFormat,
    path: Option<PathBuf>,
}

impl Run {
    fn new(args: &CommonArgs, command: &'static str, default_format: OutputFormat) -> Result<Self> {
        let mut cfg = RunConfig::load(&args.config)?;
        if let Some(range) = &args.omega_range {
            cfg.grid.omega_min = range[0];
            cfg.grid.omega_max = range[1];
        }
        if let Some(n) = args.points {
            cfg.grid.n_points = n;
        }
        if let Some(path) = &args.output {
            cfg.output.path = Some(path.clone());
        }
        if let Some(f) = args.format {
            cfg.output.format = Some(match f {
                FormatArg::Csv => OutputFormat::Csv,
                FormatArg::Json => OutputFormat::Json,
            });
        }
        cfg.validate()?;
        Ok(Run {
            format: cfg.output.format.unwrap_or(default_format),
            path: cfg.output.path.clone(),
            cfg,
            command,
        })
    }

    fn plant(&self) -> Result<PlantModel> {
        self.cfg.plant.build()
    }

    /// Closed loop when a controller is configured.
    fn closed_loop(&self, plant: &PlantModel) -> Result<Option<ClosedLoopSystem>> {
        let Some(spec) = &self.cfg.controller else {
            return Ok(None);
        };
        let controller = spec.build()?;
        let ideal = self.cfg.feedback == FeedbackLoopConfig::ideal() && !plant.has_loss_port();
        Ok(Some(if ideal {
            close_ideal_feedback(plant, &controller)?
        } else {
            close_lossy_feedback(plant, &controller, self.cfg.feedback)?
        }))
    }

    fn json<T: Serialize>(&self, result: &T) -> Result<String> {
        self.json_with(&self.cfg, result)
    }

    /// JSON document echoing `cfg` as the effective configuration.
    fn json_with<T: Serialize>(&self, cfg: &RunConfig, result: &T) -> Result<String> {
        // Where the file goes does not affect its contents.
        let mut cfg = cfg.clone();
        cfg.output.path = None;
        let doc = json!({
            "schema_version": crate::experiments::RESULT_SCHEMA_VERSION,
            "artifact": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": &cfg,
            "result": result,
        });
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        Ok(text)
    }

    fn outcome(&self, payload: String, summary: String) -> Outcome {
        Outcome {
            payload,
            path: self.path.clone(),
            summary,
        }
    }
}

fn system_of<'a>(
    plant: &'a PlantModel,
    closed: &'a Option<ClosedLoopSystem>,
) -> &'a dyn AmplifierSystem {
    match closed {
        Some(cl) => cl,
        None => plant,
    }
}

fn dispatch(command: Command, seed_env: Option<&str>) -> Result<Outcome> {
    match command {
        Command::Gain(a) => cmd_gain(&Run::new(&a, "gain", OutputFormat::Csv)?),
        Command::Poles(a) => cmd_poles(&Run::new(&a, "poles", OutputFormat::Csv)?),
        Command::Stability(a) => cmd_stability(&Run::new(&a, "stability", OutputFormat::Json)?),
        Command::Noise(a) => cmd_noise(&Run::new(&a, "noise", OutputFormat::Csv)?),
        Command::Sensitivity(a) => {
            cmd_sensitivity(&Run::new(&a, "sensitivity", OutputFormat::Csv)?)
        }
        Command::Bode(a) => cmd_bode(&Run::new(&a, "bode", OutputFormat::Csv)?),
        Command::Montecarlo(a) => {
            let run = Run::new(&a, "montecarlo", OutputFormat::Json)?;
            cmd_montecarlo(&run, a.seed, seed_env)
        }
        Command::Constraints(a) => {
            cmd_constraints(&Run::new(&a, "constraints", OutputFormat::Json)?)
        }
    }
}

fn grid_curve(run: &Run, system: &dyn AmplifierSystem) -> Result<crate::analysis::GainCurve> {
    let g = run.cfg.grid;
    gain_profile(system, g.omega_min, g.omega_max, g.n_points)
}

fn cmd_gain(run: &Run) -> Result<Outcome> {
    let plant = run.plant()?;
    let closed = run.closed_loop(&plant)?;
    let curve = grid_curve(run, system_of(&plant, &closed))?;
    let db = curve.gain_db();
    let peak = curve.peak_index().expect("grid has at least two points");
    let payload = match run.format {
        OutputFormat::Csv => curve.to_csv(),
        OutputFormat::Json => run.json(&json!({
            "omega": curve.omegas(),
            "re": curve.values().iter().map(|v| v.re).collect::<Vec<_>>(),
            "im": curve.values().iter().map(|v| v.im).collect::<Vec<_>>(),
            "gain_db": db,
            "phase_deg": curve.unwrapped_phase_deg(),
        }))?,
    };
    let summary = format!(
        "gain: {} points, peak {} dB at omega = {}",
        curve.len(),
        g12(db[peak]),
        g12(curve.omegas()[peak])
    );
    Ok(run.outcome(payload, summary))
}

fn cmd_poles(run: &Run) -> Result<Outcome> {
    let plant = run.plant()?;
    let closed = run.closed_loop(&plant)?;
    let poles = system_of(&plant, &closed).poles()?;
    let payload = match run.format {
        OutputFormat::Csv => csv_table(&["re", "im"], poles.iter().map(|p| vec![p.re, p.im])),
        OutputFormat::Json => run.json(&json!({ "poles": poles }))?,
    };
    let max_re = poles.iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(run.outcome(
        payload,
        format!(
            "poles: {} found, max Re(pole) = {}",
            poles.len(),
            g12(max_re)
        ),
    ))
}

fn cmd_stability(run: &Run) -> Result<Outcome> {
    let plant = run.plant()?;
    let closed = run.closed_loop(&plant)?;
    let v = stability(system_of(&plant, &closed), DEFAULT_STABILITY_MARGIN)?;
    if !v.stable {
        let kind = if v.marginal { "marginal" } else { "unstable" };
        return Err(Error::CheckFailed(format!(
            "{kind}, max Re(pole) = {}",
            g12(v.max_real_part)
        )));
    }
    let payload = match run.format {
        OutputFormat::Csv => csv_table(
            &["max_real_part", "margin", "stable"],
            [vec![v.max_real_part, v.margin, 1.0]],
        ),
        OutputFormat::Json => run.json(&v)?,
    };
    Ok(run.outcome(
        payload,
        format!("stable, max Re(pole) = {}", g12(v.max_real_part)),
    ))
}

fn cmd_noise(run: &Run) -> Result<Outcome> {
    let plant = run.plant()?;
    let closed = run.closed_loop(&plant)?;
    let system = system_of(&plant, &closed);
    let flavor = system.native_flavor();
    let reports = run
        .cfg
        .grid
        .points()
        .into_iter()
        .map(|w| added_noise(system, w, flavor))
        .collect::<Result<Vec<_>>>()?;
    let payload = match run.format {
        OutputFormat::Csv => noise_csv(&reports),
        OutputFormat::Json => run.json(&reports)?,
    };
    let mid = &reports[reports.len() / 2];
    let summary = format!(
        "noise: {} points, A = {} at omega = {}",
        reports.len(),
        g12(mid.a_value),
        g12(mid.omega)
    );
    Ok(run.outcome(payload, summary))
}

fn need_controller(run: &Run) -> Result<crate::models::ControllerModel> {
    run.cfg
        .controller
        .as_ref()
        .ok_or_else(|| Error::Config(format!("{} needs a controller", run.command)))?
        .build()
}

fn cmd_sensitivity(run: &Run) -> Result<Outcome> {
    let plant = run.plant()?;
    let controller = need_controller(run)?;
    let omegas = run.cfg.grid.points();
    let bounds = omegas
        .iter()
        .map(|&w| sensitivity_bound(&plant, &controller, w))
        .collect::<Result<Vec<_>>>()?;
    let payload = match run.format {
        OutputFormat::Csv => csv_table(
            &["omega", "sensitivity_bound"],
            omegas.iter().zip(&bounds).map(|(&w, &b)| vec![w, b]),
        ),
        OutputFormat::Json => run.json(&json!({ "omega": omegas, "sensitivity_bound": bounds }))?,
    };
    let worst = bounds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(run.outcome(
        payload,
        format!(
            "sensitivity: {} points, max bound = {}",
            bounds.len(),
            g12(worst)
        ),
    ))
}

fn cmd_bode(run: &Run) -> Result<Outcome> {
    let plant = run.plant()?;
    let controller = need_controller(run)?;
    let curve = loop_gain_bode(&plant, &controller, &run.cfg.grid)?;
    let db = curve.gain_db();
    let payload = match run.format {
        OutputFormat::Csv => curve.to_bode_csv(),
        OutputFormat::Json => run.json(&json!({
            "omega": curve.omegas(),
            "re": curve.values().iter().map(|v| v.re).collect::<Vec<_>>(),
            "im": curve.values().iter().map(|v| v.im).collect::<Vec<_>>(),
            "gain_db": db,
            "phase_deg": curve.unwrapped_phase_deg(),
            "phase_wrapped_deg": curve.phase_deg(),
        }))?,
    };
    let peak = db.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(run.outcome(
        payload,
        format!(
            "bode: {} points, max loop gain {} dB",
            curve.len(),
            g12(peak)
        ),
    ))
}

fn resolve_seed(flag: Option<u64>, file: Option<u64>, env: Option<&str>) -> Result<u64> {
    if let Some(s) = flag.or(file) {
        return Ok(s);
    }
    match env {
        Some(text) => text
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{SEED_ENV} is not an unsigned integer: {text:?}"))),
        None => Ok(0),
    }
}

fn cmd_montecarlo(run: &Run, seed_flag: Option<u64>, seed_env: Option<&str>) -> Result<Outcome> {
    let exp = run.cfg.experiment.clone().unwrap_or_default();
    let seed = resolve_seed(seed_flag, exp.seed, seed_env)?;
    let mc = run.cfg.monte_carlo(seed)?;
    let result = match exp.effective_kind() {
        ExperimentKind::Robustness => run_robustness_experiment(&mc)?,
        ExperimentKind::Noise => run_noise_experiment(&mc)?,
    };
    let mut echoed = run.cfg.clone();
    echoed.experiment.get_or_insert_with(Default::default).seed = Some(seed);
    let payload = match run.format {
        OutputFormat::Csv => result.to_csv(),
        OutputFormat::Json => run.json_with(&echoed, &result)?,
    };
    let first = &result.points[0];
    let summary = match exp.effective_kind() {
        ExperimentKind::Robustness => format!(
            "montecarlo: {} samples (seed {seed}), suppression ratio = {}, bound = {}",
            first.per_sample.len(),
            first.suppression_ratio.map_or("undefined".into(), g12),
            g12(first.sensitivity_bound)
        ),
        ExperimentKind::Noise => format!(
            "montecarlo: {} sweep points x {} samples (seed {seed})",
            result.points.len(),
            first.per_sample.len()
        ),
    };
    Ok(run.outcome(payload, summary))
}

fn cmd_constraints(run: &Run) -> Result<Outcome> {
    let plant = run.plant()?;
    let closed = run.closed_loop(&plant)?;
    let grid: Vec<f64> = run.cfg.grid.points();
    let plant_report = check_scattering_constraints(plant.matrix(), &grid, CONSTRAINT_TOL)?;
    let loop_report = match &closed {
        Some(cl) => Some(check_scattering_constraints(
            &cl.to_matrix(),
            &grid,
            CONSTRAINT_TOL,
        )?),
        None => None,
    };
    let max_residual = plant_report
        .max_residual
        .max(loop_report.as_ref().map_or(0.0, |r| r.max_residual));
    let pass = plant_report.pass && loop_report.as_ref().is_none_or(|r| r.pass);
    if !pass {
        return Err(Error::CheckFailed(format!(
            "constraints violated, max residual = {}",
            g12(max_residual)
        )));
    }
    let payload = match run.format {
        OutputFormat::Csv => {
            let mut rows = vec![vec![0.0, plant_report.max_residual]];
            if let Some(r) = &loop_report {
                rows.push(vec![1.0, r.max_residual]);
            }
            csv_table(&["closed_loop", "max_residual"], rows)
        }
        OutputFormat::Json => {
            run.json(&json!({ "plant": plant_report, "closed_loop": loop_report }))?
        }
    };
    Ok(run.outcome(
        payload,
        format!(
            "constraints: pass over {} frequencies, max residual = {}",
            grid.len(),
            g12(max_residual)
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(1), Some(2), Some("3")).unwrap(), 1);
        assert_eq!(resolve_seed(None, Some(2), Some("3")).unwrap(), 2);
        assert_eq!(resolve_seed(None, None, Some("3")).unwrap(), 3);
        assert_eq!(resolve_seed(None, None, None).unwrap(), 0);
        assert!(resolve_seed(None, None, Some("x")).is_err());
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(
            run_with(["qfa", "frobnicate"], &mut out, &mut err),
            EXIT_USAGE
        );
        assert_eq!(run_with(["qfa"], &mut out, &mut err), EXIT_USAGE);
        assert!(out.is_empty());
    }

    #[test]
    fn missing_config_file() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_with(
            ["qfa", "gain", "--config", "/nonexistent/run.json"],
            &mut out,
            &mut err,
        );
        assert_eq!(code, EXIT_CONFIG);
        assert!(out.is_empty());
    }
}
