use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use semilab::config::Task;
use semilab::{init_thread_cap, parse_config, render_levels, run_pipeline, write_pgm};

/// Numerical laboratory for semiclassical eigenfunctions on the torus.
#[derive(Parser)]
#[command(name = "semilab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured experiment sweep.
    Run {
        /// Path to the JSON experiment config.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated subset of the configured tasks to run.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
    },
    /// Parse and validate a config without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Render a field CSV to a PGM level-set raster.
    Render {
        /// Field CSV (`ix,iy,value` with `#` metadata headers).
        #[arg(long)]
        field: PathBuf,
        /// Number of equispaced contour levels.
        #[arg(long)]
        levels: usize,
        /// Output PGM path.
        #[arg(long)]
        out: PathBuf,
    },
}

const EXIT_CONFIG: u8 = 2;
const EXIT_TASK: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_thread_cap() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    match cli.command {
        Command::Validate { config } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: {}: {e}", config.display());
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            match parse_config(&text) {
                Ok(_) => {
                    println!("ok");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_CONFIG)
                }
            }
        }
        Command::Run { config, out, only } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: {}: {e}", config.display());
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            let mut cfg = match parse_config(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            if let Some(names) = only {
                let mut keep = Vec::new();
                for name in &names {
                    match name.parse::<Task>() {
                        Ok(t) => keep.push(t),
                        Err(e) => {
                            eprintln!("error: --only: {e}");
                            return ExitCode::from(EXIT_CONFIG);
                        }
                    }
                }
                cfg.tasks.retain(|t| keep.contains(t));
                if cfg.tasks.is_empty() {
                    eprintln!("error: --only leaves no configured tasks");
                    return ExitCode::from(EXIT_CONFIG);
                }
            }
            let out_dir = out
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("out"));
            match run_pipeline(&cfg, &text, &out_dir) {
                Ok((_, false)) => ExitCode::SUCCESS,
                Ok((manifest, true)) => {
                    for t in &manifest.tasks {
                        if let Some(e) = &t.error {
                            eprintln!("task {} failed: {e}", t.task);
                        }
                    }
                    ExitCode::from(EXIT_TASK)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_TASK)
                }
            }
        }
        Command::Render { field, levels, out } => {
            if levels < 2 {
                eprintln!("error: need at least 2 levels");
                return ExitCode::from(EXIT_CONFIG);
            }
            let u = match semilab::csvio::read_field_csv(&field) {
                Ok(u) => u,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_TASK);
                }
            };
            let img = match render_levels(&u, levels) {
                Ok(i) => i,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_TASK);
                }
            };
            match write_pgm(&out, &img) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {}: {e}", out.display());
                    ExitCode::from(EXIT_TASK)
                }
            }
        }
    }
}
