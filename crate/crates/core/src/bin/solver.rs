use clap::Parser;
use fractorus::cli::{parse_config_in, run, CliError, Mode, RunOptions};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Periodic fractional solver: verify, solve, sweep, diagnose.
#[derive(Parser)]
#[command(name = "solver", version)]
struct Args {
    /// Run mode; must match the `mode` key of the config.
    mode: Mode,
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Seed for random starts (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Write solver_trace.csv in solve mode.
    #[arg(long)]
    solver_trace: bool,
    /// Write extension.json in solve mode.
    #[arg(long)]
    dump_extension: bool,
}

fn execute(args: &Args) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::Io {
        path: args.config.display().to_string(),
        message: e.to_string(),
    })?;
    let base = args.config.parent().unwrap_or(Path::new("."));
    let cfg = parse_config_in(&text, base)?;
    if cfg.mode != args.mode {
        return Err(CliError::Validation {
            path: "mode".into(),
            message: format!("config declares {:?} but {:?} was requested", cfg.mode, args.mode),
        });
    }
    let opts = RunOptions {
        output: args.output.clone(),
        seed: args.seed,
        solver_trace: args.solver_trace,
        dump_extension: args.dump_extension,
    };
    let summary = run(&cfg, &opts)?;
    for line in &summary.lines {
        println!("{line}");
    }
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
