use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use aniflow::commands::{self, ConvergenceArgs};
use aniflow::CliError;
use aniflow_core::assembly::MassTreatment;
use aniflow_core::diagnostics::DtRule;

/// Anisotropic curve shortening flow of closed curves in R^d.
#[derive(Parser)]
#[command(name = "aniflow", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one evolution described by a JSON config file.
    Run {
        config: PathBuf,
    },
    /// Convergence study against a manufactured exact solution.
    Convergence {
        /// Exact solution: `ellipse3d` (anisotropic, forced) or `circle`
        /// (isotropic, unforced).
        #[arg(long, default_value = "ellipse3d")]
        preset: String,
        /// Ellipse shape parameter.
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        /// Comma-separated element counts, strictly increasing.
        #[arg(long = "J", value_delimiter = ',', default_value = "64,128,256,512")]
        j: Vec<usize>,
        /// Time step rule: `h` or `h2`.
        #[arg(long = "dt-rule", default_value = "h2")]
        dt_rule: String,
        #[arg(long = "T", default_value_t = 0.45)]
        t_end: f64,
        /// Mass treatment: `consistent` or `lumped`.
        #[arg(long, default_value = "consistent")]
        mass: String,
        /// Output CSV path for the table.
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the structural assumptions of an anisotropy description.
    Validate {
        spec: PathBuf,
    },
}

fn dispatch(cli: Cli) -> Result<bool, CliError> {
    match cli.cmd {
        Cmd::Run { config } => {
            commands::cmd_run(&config)?;
            Ok(true)
        }
        Cmd::Convergence { preset, delta, j, dt_rule, t_end, mass, out } => {
            let dt_rule = match dt_rule.as_str() {
                "h" => DtRule::DtEqH,
                "h2" => DtRule::DtEqH2,
                other => {
                    return Err(CliError::Config(format!(
                        "unknown dt rule {other:?} (expected h or h2)"
                    )))
                }
            };
            let mass = match mass.as_str() {
                "consistent" => MassTreatment::Consistent,
                "lumped" => MassTreatment::Lumped,
                other => {
                    return Err(CliError::Config(format!(
                        "unknown mass treatment {other:?} (expected consistent or lumped)"
                    )))
                }
            };
            commands::cmd_convergence(&ConvergenceArgs {
                preset,
                delta,
                j_list: j,
                dt_rule,
                t_end,
                mass,
                out,
            })?;
            Ok(true)
        }
        Cmd::Validate { spec } => commands::cmd_validate(&spec),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!(
                "{}",
                serde_json::json!({"error": "config", "message": e.to_string()})
            );
            return ExitCode::from(1);
        }
    };
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!(
                "{}",
                serde_json::json!({"error": "config", "message": "validation reported failures"})
            );
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({"error": e.kind(), "message": e.to_string()})
            );
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
