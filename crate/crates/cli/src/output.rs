//! Files written by `solve` and `verify`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use pstable_core::io::write_binary;
use pstable_core::{SpaceTimeField, TraceRow};
use serde::Serialize;

use crate::error::CliError;
use crate::pipeline::{RunOutput, SolveSummary, GENERATOR};

/// Writes `rows` as CSV after a `# generator=... seed=...` comment line.
pub fn write_csv<T: Serialize>(path: &Path, seed: u64, rows: &[T], header: &[&str]) -> Result<(), CliError> {
    let mut file = BufWriter::new(File::create(path)?);
    writeln!(file, "# generator={GENERATOR} seed={seed}")?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_field(path: &Path, field: &SpaceTimeField) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_binary(field, &mut w)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct TraceCsv {
    i: usize,
    rho_i: f64,
    theta_i: f64,
    k_i: f64,
    y_i: f64,
    predicted: f64,
    ratio: Option<f64>,
}

impl From<&TraceRow> for TraceCsv {
    fn from(r: &TraceRow) -> Self {
        TraceCsv {
            i: r.i,
            rho_i: r.rho,
            theta_i: r.theta,
            k_i: r.k,
            y_i: r.y,
            predicted: r.predicted,
            ratio: r.ratio,
        }
    }
}

const CHAIN_HEADER: [&str; 4] = ["i", "lhs", "rhs", "ratio"];

#[derive(Serialize)]
struct SolveReport<'a> {
    name: &'a str,
    generator: &'a str,
    seed: u64,
    #[serde(flatten)]
    solve: &'a SolveSummary,
}

/// `solve` output: the field and a small JSON report.
pub fn write_solve(
    out: &Path,
    name: &str,
    seed: u64,
    field: &SpaceTimeField,
    solve: &SolveSummary,
) -> Result<(), CliError> {
    fs::create_dir_all(out)?;
    write_field(&out.join("field.bin"), field)?;
    write_json(
        &out.join("solve.json"),
        &SolveReport {
            name,
            generator: GENERATOR,
            seed,
            solve,
        },
    )
}

/// `verify` output: the field, one CSV per diagnostic and `summary.json`.
pub fn write_run(out: &Path, run: &RunOutput) -> Result<(), CliError> {
    fs::create_dir_all(out)?;
    let seed = run.summary.seed;
    write_field(&out.join("field.bin"), &run.field)?;
    write_json(&out.join("summary.json"), &run.summary)?;
    if run.summary.degiorgi.is_some() {
        let trace: Vec<TraceCsv> = run.trace.iter().map(TraceCsv::from).collect();
        let header = ["i", "rho_i", "theta_i", "k_i", "Y_i", "predicted", "ratio"];
        write_csv(&out.join("trace.csv"), seed, &trace, &header)?;
        write_csv(&out.join("chebyshev.csv"), seed, &run.chebyshev, &CHAIN_HEADER)?;
        write_csv(&out.join("holder_p.csv"), seed, &run.holder_p, &CHAIN_HEADER)?;
        write_csv(&out.join("holder_2.csv"), seed, &run.holder_2, &CHAIN_HEADER)?;
    }
    if run.summary.energy.is_some() {
        let header = ["i", "k", "lhs_sup", "lhs_grad", "rhs_space", "rhs_time", "C_fit"];
        write_csv(&out.join("energy.csv"), seed, &run.energy, &header)?;
        write_csv(&out.join("energy_combined.csv"), seed, &run.combined, &CHAIN_HEADER)?;
    }
    if run.summary.thm2.is_some() {
        let rows: Vec<(usize, f64)> = run.second.iter().copied().enumerate().collect();
        write_csv(&out.join("second_iteration.csv"), seed, &rows, &["n", "M_n"])?;
    }
    Ok(())
}
