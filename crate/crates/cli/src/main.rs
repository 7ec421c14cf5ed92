//! `dnls`: command-line front end of the damped NLS experiment suite.
//!
//! Exit codes: 0 success, 1 tolerance breach, 2 invalid input or failed run.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use dnls_core::cutoff::{positivity_margin, positivity_radii, verify_positivity, Completion, CutoffKind, RadialCutoff};
use dnls_core::diagnostics::{write_csv, Probe};
use dnls_core::experiments::{
    criteria_verdicts, emit_report, load_config, run_scenario, scattering_probe, threshold_bisection, ExperimentError,
    RunConfig, ScenarioReport,
};
use dnls_core::snapshot;

#[derive(Parser)]
#[command(name = "dnls", version, about = "Damped nonlinear Schrödinger experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CompletionArg {
    Hermite,
    Quintic,
}

impl From<CompletionArg> for Completion {
    fn from(c: CompletionArg) -> Self {
        match c {
            CompletionArg::Hermite => Completion::Hermite,
            CompletionArg::Quintic => Completion::Quintic,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario named in the config and write the report files.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` of the config.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Diagnostic CSV (one row per snapshot) for a directory of field snapshots.
    Diagnose {
        #[arg(long)]
        snapshots: PathBuf,
        /// Cutoff radius for the localized functionals.
        #[arg(long)]
        radius: Option<f64>,
        /// Output file; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// JSON verdict of every applicable blow-up criterion for the initial data.
    Criteria {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Bisect the damping threshold between a collapsing and a global run.
    Threshold {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        a_lo: f64,
        #[arg(long)]
        a_hi: f64,
        #[arg(long)]
        width: f64,
    },
    /// Scattering deficit and Cauchy increment of a global run.
    Scatter {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        t1: f64,
        #[arg(long)]
        t2: f64,
    },
    /// Margin table (CSV: r, chi1, chi2, margin) of the cutoff positivity condition.
    VerifyCutoff {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 4001)]
        samples: usize,
        #[arg(long, value_enum, default_value = "hermite")]
        completion: CompletionArg,
    },
}

enum Failure {
    Breach(String),
    Error(String),
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        Failure::Error(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Error(e.to_string())
    }
}

fn load(path: &Path) -> Result<RunConfig, Failure> {
    load_config(path).map_err(|e| Failure::Error(format!("{}: {e}", path.display())))
}

fn finish(cfg: &RunConfig, report: &ScenarioReport, start: Instant) -> Result<(), Failure> {
    let paths = emit_report(cfg, report, start.elapsed().as_secs_f64())?;
    println!("{}", paths.summary.display());
    if let Some(series) = paths.series {
        println!("{}", series.display());
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Breach(format!("tolerance breach, see {}", paths.summary.display())))
    }
}

fn execute(cmd: Command) -> Result<(), Failure> {
    let start = Instant::now();
    match cmd {
        Command::Simulate { config, output } => {
            let mut cfg = load(&config)?;
            if let Some(dir) = output {
                cfg.output_dir = dir;
            }
            let report = run_scenario(&cfg)?;
            finish(&cfg, &report, start)
        }
        Command::Diagnose {
            snapshots,
            radius,
            output,
        } => {
            let fields = snapshot::read_dir(&snapshots).map_err(|e| Failure::Error(e.to_string()))?;
            if fields.is_empty() {
                return Err(Failure::Error(format!("no .{} files in {}", snapshot::EXTENSION, snapshots.display())));
            }
            let cutoff = radius
                .map(RadialCutoff::mass_critical)
                .transpose()
                .map_err(|e| Failure::Error(e.to_string()))?;
            let (first, spec) = &fields[0];
            let mut probe = Probe::new(first.grid(), spec, cutoff.as_ref());
            let samples: Vec<_> = fields.iter().map(|(f, _)| probe.sample(f)).collect();
            match output {
                Some(path) => write_csv(&samples, std::fs::File::create(path)?)?,
                None => write_csv(&samples, std::io::stdout().lock())?,
            }
            Ok(())
        }
        Command::Criteria { config, radius } => {
            let mut cfg = load(&config)?;
            if radius.is_some() {
                cfg.cutoff_radius = radius;
            }
            let u0 = cfg.initial_field()?;
            let cutoff = cfg.cutoff()?;
            let (s, verdicts) = criteria_verdicts(&u0, &cfg.problem, cutoff.as_ref(), cfg.initial.is_radial())?;
            let out = serde_json::json!({
                "energy": s.energy,
                "i_weight": s.i_weight,
                "v_momentum": s.v_momentum,
                "j_local": cutoff.as_ref().map(|_| s.j_local),
                "w_local": cutoff.as_ref().map(|_| s.w_local),
                "verdicts": verdicts,
            });
            println!("{}", serde_json::to_string_pretty(&out).expect("json"));
            Ok(())
        }
        Command::Threshold {
            config,
            a_lo,
            a_hi,
            width,
        } => {
            let cfg = load(&config)?;
            let result = threshold_bisection(&cfg, a_lo, a_hi, width)?;
            println!("{}", serde_json::json!({"a_lo": result.a_lo, "a_hi": result.a_hi, "runs": result.runs.len()}));
            finish(&cfg, &ScenarioReport::Threshold(result), start)
        }
        Command::Scatter { config, t1, t2 } => {
            let cfg = load(&config)?;
            let report = scattering_probe(&cfg, t1, t2)?;
            println!(
                "{}",
                serde_json::json!({
                    "cauchy_increment": report.cauchy_increment,
                    "cauchy_increment_direct": report.cauchy_increment_direct,
                    "strichartz": report.strichartz,
                })
            );
            finish(&cfg, &ScenarioReport::ScatterProbe(report), start)
        }
        Command::VerifyCutoff {
            n,
            eps,
            c,
            radius,
            samples,
            completion,
        } => {
            if n == 0 {
                return Err(Failure::Error("dimension must be positive".into()));
            }
            let cutoff = RadialCutoff::new(radius, CutoffKind::MassCriticalTheta, completion.into())
                .map_err(|e| Failure::Error(e.to_string()))?;
            let mut out = std::io::stdout().lock();
            writeln!(out, "r,chi1,chi2,margin")?;
            for r in positivity_radii(&cutoff, samples) {
                let e = cutoff.evaluate(r, n).map_err(|e| Failure::Error(e.to_string()))?;
                writeln!(out, "{:?},{:?},{:?},{:?}", r, e.chi1, e.chi2, positivity_margin(&e, n, eps, c))?;
            }
            let report = verify_positivity(&cutoff, n, eps, c, samples);
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Breach(format!(
                    "negative margin {:e} at r = {}",
                    report.min_margin, report.argmin
                )))
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Breach(msg)) => {
            eprintln!("dnls: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Error(msg)) => {
            eprintln!("dnls: {msg}");
            ExitCode::from(2)
        }
    }
}
