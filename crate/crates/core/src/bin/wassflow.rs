use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wassflow::scenario::{run_to_dir, sweep_to_dir, Scenario, EXIT_FAIL, EXIT_SCHEMA};

/// Batch runner for wassflow scenarios.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// Halve every comparison tolerance.
    #[arg(long, global = true)]
    strict: bool,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output root; defaults to $WASSFLOW_OUT, then ./wassflow-out.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run { file: PathBuf },
    /// Run a scenario once per parameter value and tabulate the results.
    Sweep {
        file: PathBuf,
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
    },
}

fn read(path: &Path) -> Result<String, u8> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        EXIT_SCHEMA as u8
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("thread pool: {e}");
        }
    }
    let out = cli
        .out
        .or_else(|| std::env::var_os("WASSFLOW_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("wassflow-out"));
    let code = match cli.command {
        Command::Run { file } => {
            let text = match read(&file) {
                Ok(t) => t,
                Err(c) => return ExitCode::from(c),
            };
            let scenario = match Scenario::from_json(&text) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("{}: {e}", file.display());
                    return ExitCode::from(EXIT_SCHEMA as u8);
                }
            };
            match run_to_dir(&scenario, &text, &out, cli.strict) {
                Ok(a) => {
                    let s = &a.summary;
                    println!(
                        "{}: {} passed, {} failed, {} vacuous, {} not applicable -> {}",
                        scenario.name,
                        s.passed,
                        s.failed,
                        s.vacuous,
                        s.not_applicable,
                        a.dir.display()
                    );
                    for v in a.verdicts.iter().filter(|v| !v.passed()) {
                        println!("  FAIL {}: lhs {} rhs {}", v.name, v.lhs, v.rhs);
                    }
                    if let Some(e) = &a.error {
                        eprintln!("{}: {e}", scenario.name);
                    }
                    a.exit_code
                }
                Err(e) => {
                    eprintln!("{}: {e}", out.display());
                    EXIT_FAIL
                }
            }
        }
        Command::Sweep { file, param, values } => {
            let text = match read(&file) {
                Ok(t) => t,
                Err(c) => return ExitCode::from(c),
            };
            match sweep_to_dir(&text, &param, &values, &out, cli.strict) {
                Ok(a) => {
                    println!("{} runs -> {}", a.runs.len(), a.table.display());
                    a.exit_code
                }
                Err(e) => {
                    eprintln!("{}: {e}", file.display());
                    e.exit_code()
                }
            }
        }
    };
    ExitCode::from(code as u8)
}
