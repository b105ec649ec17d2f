use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pstable_cli::output::{write_run, write_solve};
use pstable_cli::pipeline::solve_scenario;
use pstable_cli::report::read_sweep_file;
use pstable_cli::sweep::write_sweep;
use pstable_cli::{run, stability_report, sweep, Axis, CliError, Scenario};

#[derive(Parser)]
#[command(
    name = "pstable",
    version,
    about = "Parabolic p-Laplace solver and sup-bound verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Replaces the seed in the scenario file.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve only; writes field.bin and solve.json.
    Solve(Common),
    /// Solve and run every enabled check.
    Verify(Common),
    /// One verification run per value on an axis; writes sweep.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// p, sigma or grid.
        #[arg(long, default_value = "p")]
        axis: Axis,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Stability verdict for a sweep CSV over p.
    Report { csv: PathBuf },
}

fn load(common: &Common) -> Result<Scenario, CliError> {
    let mut sc = Scenario::load(&common.scenario)?;
    if let Some(seed) = common.seed {
        sc.seed = seed;
    }
    Ok(sc)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(common) => {
            let sc = load(&common)?;
            let (field, summary) = solve_scenario(&sc)?;
            write_solve(&common.out, &sc.name, sc.seed, &field, &summary)?;
            println!("{}: max {:e}, residual {:e}", sc.name, summary.max, summary.residual);
            Ok(())
        }
        Command::Verify(common) => {
            let sc = load(&common)?;
            let out = run(&sc)?;
            write_run(&common.out, &out)?;
            if out.summary.passed {
                println!("{}: all enabled checks pass", sc.name);
                Ok(())
            } else {
                Err(CliError::Verification(out.summary.failures.join("; ")))
            }
        }
        Command::Sweep { common, axis, jobs } => {
            let sc = load(&common)?;
            let rows = sweep(&sc, axis, jobs)?;
            std::fs::create_dir_all(&common.out)?;
            write_sweep(&common.out.join("sweep.csv"), sc.seed, &rows)?;
            let failed: Vec<String> = rows
                .iter()
                .filter(|r| !r.passed)
                .map(|r| format!("p = {}, sigma = {}, nx = {}", r.p, r.sigma, r.nx))
                .collect();
            if failed.is_empty() {
                println!("{}: {} points, all pass", sc.name, rows.len());
                Ok(())
            } else {
                Err(CliError::Verification(format!("checks fail at {}", failed.join("; "))))
            }
        }
        Command::Report { csv } => {
            let verdict = stability_report(&read_sweep_file(&csv)?)?;
            println!("{verdict}");
            if verdict.pass {
                Ok(())
            } else {
                Err(CliError::Verification("stability report FAIL".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
