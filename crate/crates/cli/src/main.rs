use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fitcheck_cli::{
    exit_status, list_scenarios, resolve_name, run, run_all, CliError, Format, RunConfig,
    EXIT_USAGE,
};
use fitcheck_core::InstanceKind;

#[derive(Parser)]
#[command(name = "fitcheck", version, about = "Fermionic independence checks")]
struct Cli {
    /// Numerical tolerance for every check.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Text)]
    format: OutFormat,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// List registered scenarios.
    List,
    /// Run one scenario.
    Run {
        name: String,
        /// For gpt-tomography and prop2-witness: complex, real or fermi.
        #[arg(long)]
        instance: Option<InstanceKind>,
    },
    /// Run every scenario.
    RunAll,
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.output_path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = RunConfig {
        tolerance: cli.tol,
        seed: cli.seed,
        format: match cli.format {
            OutFormat::Text => Format::Text,
            OutFormat::Json => Format::Json,
        },
        output_path: cli.out,
    };

    let result = match cli.command {
        Command::List => {
            let list = list_scenarios();
            let text = match cfg.format {
                Format::Json => {
                    serde_json::to_string_pretty(&list).expect("descriptors serialize") + "\n"
                }
                Format::Text => list
                    .iter()
                    .map(|d| format!("{:<24} {:<18} {}\n", d.name, d.module, d.description))
                    .collect(),
            };
            emit(&cfg, &text).map(|_| 0)
        }
        Command::Run { name, instance } => run(&resolve_name(&name, instance), &cfg)
            .and_then(|r| emit(&cfg, &cfg.render(&r)).map(|_| exit_status(&r))),
        Command::RunAll => {
            run_all(&cfg).and_then(|r| emit(&cfg, &cfg.render(&r)).map(|_| exit_status(&r)))
        }
    };

    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("fitcheck: {e}");
            ExitCode::from(e.exit_status().clamp(1, EXIT_USAGE) as u8)
        }
    }
}
