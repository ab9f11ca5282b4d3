use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use coiso::expr::parse_rational;
use coiso_cli::{cmd_check, cmd_moser, cmd_nijenhuis, cmd_reeb, cmd_thicken, InputError, MoserOptions, Report, Source, EXIT_INPUT};

#[derive(Parser)]
#[command(name = "coiso", version, about = "Exact verification of coisotropic thickenings")]
struct Cli {
    /// Add wall time to the report (breaks byte-identical output).
    #[arg(long, global = true)]
    timing: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a structure: closedness, constant rank, axioms, involutivity.
    Check { file: PathBuf },
    /// Build the thickening and verify it; optionally write it as a problem file.
    Thicken {
        file: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Exact Nijenhuis tensor of the file's projector.
    Nijenhuis { file: PathBuf },
    /// Reeb families, membership of the given Reeb fields and their projector.
    Reeb { file: PathBuf },
    /// Homotopy primitive, Moser flow and Reeb proportionality for two structures.
    MoserVerify {
        file1: PathBuf,
        file2: PathBuf,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Sample box half-width, a rational such as `1/10`.
        #[arg(long = "box", default_value = "1/10")]
        box_size: String,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn read(path: &Path) -> Result<Source, InputError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| InputError::general(format!("cannot read {}: {e}", path.display())))?;
    Ok(Source::new(path.display().to_string(), text))
}

fn configure_threads() -> Result<(), InputError> {
    if let Ok(v) = std::env::var("COISO_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| InputError::general(format!("COISO_THREADS must be a positive integer, found `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| InputError::general(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<Report, InputError> {
    configure_threads()?;
    match &cli.command {
        Command::Check { file } => cmd_check(&read(file)?),
        Command::Thicken { file, out } => {
            let t = cmd_thicken(&read(file)?)?;
            if let Some(out) = out {
                std::fs::write(out, &t.output)
                    .map_err(|e| InputError::general(format!("cannot write {}: {e}", out.display())))?;
            }
            Ok(t.report)
        }
        Command::Nijenhuis { file } => cmd_nijenhuis(&read(file)?),
        Command::Reeb { file } => cmd_reeb(&read(file)?),
        Command::MoserVerify { file1, file2, steps, tol, box_size, samples, seed } => {
            let box_size = parse_rational(box_size)
                .filter(|b| *b > parse_rational("0").expect("literal"))
                .ok_or_else(|| InputError::general(format!("--box must be a positive rational, found `{box_size}`")))?;
            let opts = MoserOptions { steps: *steps, tolerance: *tol, box_size, samples: *samples, seed: *seed };
            cmd_moser(&read(file1)?, &read(file2)?, &opts)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok(mut report) => {
            if cli.timing {
                report.elapsed_ms = Some(start.elapsed().as_millis());
            }
            let text = report.render();
            match &cli.report {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(EXIT_INPUT as u8);
                    }
                }
                None => print!("{text}"),
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}
