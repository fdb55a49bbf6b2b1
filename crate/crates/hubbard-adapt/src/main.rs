use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hubbard_adapt::{parse_config, run_suite, run_task, RunError, SuiteName, Task};

#[derive(Parser)]
#[command(version, about = "Adaptive variational eigensolver for small Fermi-Hubbard grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Grow an ansatz for the sector ground state.
    Ground(TaskArgs),
    /// Grow one unitary for the lowest K states of the sector.
    Excited(TaskArgs),
    /// Spectral functions from the Lehmann sum.
    Greens(TaskArgs),
    /// Exact diagonalization of the sector.
    Ed(TaskArgs),
    /// List the operator pool.
    Pool(TaskArgs),
    /// Run an experiment suite.
    Suite {
        #[arg(long, value_enum)]
        name: SuiteName,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
}

#[derive(clap::Args)]
struct TaskArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output_dir` from the config.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    quiet: bool,
}

fn run_one(task: Task, args: &TaskArgs) -> Result<(), RunError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| RunError::Config(format!("cannot read `{}`: {e}", args.config.display())))?;
    let config = parse_config(&text)?;
    let task = config.resolve_task(Some(task))?;
    let dest = args
        .output
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(format!("runs/{}", task.as_str())));
    let out = run_task(&config, task)?;
    out.artifacts.commit(&dest)?;
    if !args.quiet {
        if let Some(result) = out.artifacts.get("result.json") {
            print!("{result}");
        }
        eprintln!("wrote {}", dest.display());
    }
    Ok(())
}

fn suite(name: SuiteName, output: Option<PathBuf>, quiet: bool) -> Result<bool, RunError> {
    let out = run_suite(name)?;
    let dest = output.unwrap_or_else(|| PathBuf::from(format!("runs/suite-{}", name.as_str())));
    out.artifacts().commit(&dest)?;
    if !quiet {
        print!("{}", out.report.table());
        eprintln!("wrote {}", dest.display());
    }
    Ok(out.report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Ground(a) => run_one(Task::Ground, a).map(|_| true),
        Command::Excited(a) => run_one(Task::Excited, a).map(|_| true),
        Command::Greens(a) => run_one(Task::Greens, a).map(|_| true),
        Command::Ed(a) => run_one(Task::Ed, a).map(|_| true),
        Command::Pool(a) => run_one(Task::Pool, a).map(|_| true),
        Command::Suite { name, output, quiet } => suite(*name, output.clone(), *quiet),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        // A suite ran but at least one check failed.
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
