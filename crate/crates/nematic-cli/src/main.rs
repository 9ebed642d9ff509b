//! `nematic`: experiment runner for the nematic dynamics laboratory.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 close-approach halt under `--strict-halt`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nematic_cli::config::{load_config, Tier};
use nematic_cli::experiment::{resolve_out_dir, run_simulation, StageError};
use nematic_cli::validate::run_validate;

#[derive(Parser)]
#[command(name = "nematic", version, about = "Dissipative 2D nematic dynamics laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Treat a close-approach halt as a failure (exit 4).
        #[arg(long)]
        strict_halt: bool,
    },
    /// Run the cross-tier validation suite at the scale set by the config.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write the special-function sweep for one concentration.
    SpecfunTable {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the constrained-reduction ladder.
    MaxslopeDemo {
        #[arg(long)]
        out: PathBuf,
    },
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_HALT: u8 = 4;

fn stage_exit(e: &StageError) -> u8 {
    match e {
        StageError::Config(_) => EXIT_CONFIG,
        StageError::Numerical(_) => EXIT_NUMERICAL,
        StageError::Io(_) => 1,
    }
}

fn out_dir_for(config_path: &Path) -> PathBuf {
    let stem = config_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    resolve_out_dir(&stem)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Simulate { config, strict_halt } => simulate(&config, strict_halt),
        Command::Validate { config } => validate(&config),
        Command::SpecfunTable { gamma, out } => {
            match nematic::specfun::make_params(gamma, 0.1)
                .and_then(|_| nematic_cli::tables::write_specfun_table(&out, gamma))
            {
                Ok(()) => {
                    println!("wrote {}", out.display());
                    0
                }
                Err(e) => {
                    eprintln!("specfun-table failed: {e}");
                    EXIT_CONFIG
                }
            }
        }
        Command::MaxslopeDemo { out } => match nematic_cli::tables::write_maxslope_demo(&out) {
            Ok(csv) => {
                print!("{csv}");
                println!("wrote {}", out.display());
                0
            }
            Err(e) => {
                eprintln!("maxslope-demo failed: {e}");
                EXIT_NUMERICAL
            }
        },
    };
    ExitCode::from(code)
}

fn simulate(config_path: &Path, strict_halt: bool) -> u8 {
    let cfg = match load_config(config_path) {
        Ok(cfg) => cfg,
        Err(errors) => {
            eprintln!("configuration errors:");
            for e in &errors {
                eprintln!("  - {e}");
            }
            return EXIT_CONFIG;
        }
    };
    let out_dir = out_dir_for(config_path);
    if cfg.tier == Tier::Validate {
        return validate_resolved(&cfg, &out_dir);
    }
    match run_simulation(&cfg, &out_dir) {
        Ok(outcome) => {
            println!("artifacts in {}", outcome.out_dir.display());
            if let Some(halt) = &outcome.halt {
                println!("halted early: {halt}");
                if strict_halt {
                    return EXIT_HALT;
                }
            }
            0
        }
        Err(e) => {
            eprintln!("{}", e.describe());
            stage_exit(&e)
        }
    }
}

fn validate(config_path: &Path) -> u8 {
    let cfg = match load_config(config_path) {
        Ok(cfg) => cfg,
        Err(errors) => {
            eprintln!("configuration errors:");
            for e in &errors {
                eprintln!("  - {e}");
            }
            return EXIT_CONFIG;
        }
    };
    if cfg.tier != Tier::Validate {
        eprintln!("configuration errors:\n  - tier: the validate subcommand needs tier = validate");
        return EXIT_CONFIG;
    }
    validate_resolved(&cfg, &out_dir_for(config_path))
}

fn validate_resolved(cfg: &nematic_cli::ExperimentConfig, out_dir: &Path) -> u8 {
    match run_validate(cfg, out_dir) {
        Ok((rows, outcome)) => {
            print!("{}", nematic_cli::validate::render_table(&rows));
            println!("report in {}", outcome.out_dir.display());
            if rows.iter().all(|r| r.passed) {
                0
            } else {
                EXIT_NUMERICAL
            }
        }
        Err(e) => {
            eprintln!("{}", e.describe());
            stage_exit(&e)
        }
    }
}
