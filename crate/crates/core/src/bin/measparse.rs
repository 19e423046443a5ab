use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use measurement_parsing::scenario::{
    builtin, fr_experiment_with_env, parse_scenario, run_scenario, serialize, RunError, ScenarioDoc, ScenarioError,
    BUILTIN_NAMES,
};
use measurement_parsing::Tolerances;

#[derive(Parser)]
#[command(
    name = "measparse",
    version,
    about = "Parse measurements in context and run the queries of a scenario"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format on stdout.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    /// Operator tolerance (tol_op); the other thresholds keep their defaults.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Seed for the randomized search layers.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,

    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run { file: PathBuf },
    /// Run a built-in scenario.
    Builtin {
        name: String,
        /// Overlap angle of the environment states (fr_experiment only).
        #[arg(long)]
        env_theta: Option<f64>,
    },
    /// Print a built-in scenario as JSON.
    Show {
        name: String,
        #[arg(long)]
        env_theta: Option<f64>,
    },
    /// List the built-in scenarios.
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn load_builtin(name: &str, env_theta: Option<f64>) -> Result<ScenarioDoc, RunError> {
    match env_theta {
        Some(theta) if name == "fr_experiment" => Ok(fr_experiment_with_env(theta)),
        Some(_) => Err(ScenarioError::Reference {
            path: "--env-theta".into(),
            message: format!("only fr_experiment takes an environment angle, not `{name}`"),
        }
        .into()),
        None => builtin(name).ok_or_else(|| ScenarioError::UnknownBuiltin(name.into()).into()),
    }
}

fn load_file(path: &PathBuf) -> Result<ScenarioDoc, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Reference {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Ok(parse_scenario(&text)?)
}

fn execute(cli: &Cli) -> Result<(), RunError> {
    let doc = match &cli.command {
        Command::List => {
            emit(&format!("{}\n", BUILTIN_NAMES.join("\n")));
            return Ok(());
        }
        Command::Show { name, env_theta } => {
            emit(&format!("{}\n", serialize(&load_builtin(name, *env_theta)?)));
            return Ok(());
        }
        Command::Run { file } => load_file(file)?,
        Command::Builtin { name, env_theta } => load_builtin(name, *env_theta)?,
    };
    let tols = match cli.tol {
        Some(t) if t.is_finite() && t > 0.0 => Tolerances::default().with_tol_op(t),
        Some(t) => {
            return Err(ScenarioError::Reference {
                path: "--tol".into(),
                message: format!("tolerance must be positive, got {t}"),
            }
            .into())
        }
        None => Tolerances::default(),
    };
    let report = run_scenario(&doc, &tols, cli.seed)?;
    if let Some(path) = &cli.report {
        std::fs::write(path, report.to_json()).map_err(|e| ScenarioError::Reference {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
    }
    match cli.format {
        Format::Json => emit(&format!("{}\n", report.to_json())),
        Format::Text => emit(&report.to_text()),
    }
    Ok(())
}

fn main() -> ExitCode {
    // usage errors share exit code 1 with scenario errors; 2 stays reserved for the engine
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                RunError::Scenario(_) => ExitCode::from(1),
                RunError::Engine(_) => ExitCode::from(2),
            }
        }
    }
}
