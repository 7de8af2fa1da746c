use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use cochain_lab::cli::{
    emit_report, parse_config_with, run_task, ConfigError, ErrorCode, Format, Overrides, Task,
};
use cochain_lab::cochain::Mode;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Table,
}

/// Exact cochain computations and verification suites for finite group actions.
#[derive(Debug, Parser)]
#[command(name = "cochain-lab", version, after_help = tasks_help())]
struct Args {
    /// Task to run.
    task: String,
    /// JSON or TOML task config.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

fn tasks_help() -> String {
    let names: Vec<&str> = Task::ALL.iter().map(|t| t.name()).collect();
    format!(
        "Tasks: {}\nExit codes: 0 pass, 1 fail, 2 config error, 3 budget exhausted",
        names.join(", ")
    )
}

fn config_error(e: &ConfigError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            let err = ConfigError {
                code: ErrorCode::Parse,
                message: format!("cannot read {}: {e}", args.config.display()),
                cap: None,
            };
            return config_error(&err);
        }
    };
    let overrides = Overrides {
        task: Some(args.task.clone()),
        mode: args.mode.map(|m| match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Float => Mode::Float,
        }),
        seed: args.seed,
    };
    let cfg = match parse_config_with(&text, &overrides) {
        Ok(c) => c,
        Err(e) => return config_error(&e),
    };
    let report = match run_task(&cfg) {
        Ok(r) => r,
        Err(e) => return config_error(&e),
    };
    let format = match args.format {
        FormatArg::Json => Format::Json,
        FormatArg::Table => Format::Table,
    };
    let text = emit_report(&report, format);
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    eprintln!(
        "{}: {} in {:.3}s",
        report.task,
        report.status.as_str(),
        report.timing.as_secs_f64()
    );
    ExitCode::from(report.status.exit_code() as u8)
}
