use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ptolemy::experiments::{self, fmt_sig, CurveFamily, ExperimentError};
use ptolemy::{CurveSpec, OptimizeOptions};

/// Numerical estimates of Ptolemy constants of planar closed curves.
#[derive(Debug, Parser)]
#[command(name = "ptolemy", version, allow_negative_numbers = true)]
struct Cli {
    /// Grid resolution for the exhaustive search.
    #[arg(long, global = true, default_value_t = 48)]
    grid: usize,
    /// Random starting configurations in addition to grid seeds.
    #[arg(long, global = true, default_value_t = 16)]
    starts: usize,
    /// Simplex convergence tolerance on function values.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,
    /// Seed for the random starts.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Ellipse,
    Rectangle,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate the constant of one curve.
    Estimate {
        /// e.g. `ellipse:0.8`, `rectangle:0`, `polygon:6`, `reuleaux`,
        /// `convex:0,0;1,0;0,1`.
        #[arg(long)]
        curve: CurveSpec,
    },
    /// Estimate over a range of eccentricities and compare with closed forms.
    Sweep {
        #[arg(long, value_enum)]
        curve: Family,
        #[arg(long, default_value_t = 0.0)]
        eps_min: f64,
        #[arg(long, default_value_t = 0.95)]
        eps_max: f64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
    },
    /// Closed-form and finite-difference Hessians of the ellipse ratio at
    /// the quarter-turn configuration.
    Hessian {
        #[arg(long)]
        eps: f64,
        /// Finite-difference step in radians.
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
    /// Tabulate the rectangle corner-collapse family.
    Limit {
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0.1)]
        delta_start: f64,
        #[arg(long, default_value_t = 0.5)]
        factor: f64,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Repeat an estimate under several random seeds. With more than one
    /// `--curve` the reports are emitted as a JSON array.
    Open {
        #[arg(long, required = true)]
        curve: Vec<CurveSpec>,
        #[arg(long, default_value_t = 5)]
        seeds: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn options(cli: &Cli) -> OptimizeOptions {
    OptimizeOptions {
        grid_points: cli.grid,
        starts: cli.starts,
        value_tolerance: cli.tol,
        rng_seed: cli.seed,
        ..OptimizeOptions::default()
    }
}

fn output(cli: &Cli) -> Result<Box<dyn Write>, ExperimentError> {
    Ok(match &cli.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(cli: &Cli, value: &T) -> Result<(), ExperimentError> {
    let mut out = output(cli)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(io::Error::from)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn json_only(cli: &Cli, command: &str) -> Result<(), ExperimentError> {
    if cli.format == Some(Format::Csv) {
        return Err(ExperimentError::InvalidArgument(format!("`{command}` only produces JSON")));
    }
    Ok(())
}

/// Summary lines go to stdout when the data went to a file, stderr otherwise.
fn summary(cli: &Cli, line: &str) {
    if cli.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn run(cli: &Cli) -> Result<(), ExperimentError> {
    let opts = options(cli);
    opts.validate()?;
    match &cli.command {
        Command::Estimate { curve } => {
            let report = experiments::estimate(curve, &opts)?;
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => write_json(cli, &report),
                Format::Csv => experiments::write_sweep_csv(&[report.record(curve)], output(cli)?),
            }
        }
        Command::Sweep { curve, eps_min, eps_max, steps } => {
            let family = match curve {
                Family::Ellipse => CurveFamily::Ellipse,
                Family::Rectangle => CurveFamily::Rectangle,
            };
            let result = experiments::sweep(family, *eps_min, *eps_max, *steps, &opts)?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => experiments::write_sweep_csv(&result.rows, output(cli)?)?,
                Format::Json => write_json(cli, &result.rows)?,
            }
            let max = result.max_abs_error.map(fmt_sig).unwrap_or_else(|| "n/a".into());
            summary(cli, &format!("rows={} max_abs_error={max}", result.rows.len()));
            for note in &result.notes {
                summary(cli, note);
            }
            Ok(())
        }
        Command::Hessian { eps, step } => {
            json_only(cli, "hessian")?;
            write_json(cli, &experiments::hessian_report(*eps, *step)?)
        }
        Command::Limit { eps, delta_start, factor, count } => {
            let table = experiments::limit_table(*eps, *delta_start, *factor, *count)?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Json => write_json(cli, &table),
                Format::Csv => {
                    let mut writer = csv::Writer::from_writer(output(cli)?);
                    writer.write_record(["delta", "ratio", "gap"])?;
                    for row in &table.rows {
                        writer.write_record([fmt_sig(row.delta), fmt_sig(row.ratio), fmt_sig(row.gap)])?;
                    }
                    writer.flush()?;
                    let order = table.fitted_order.map(fmt_sig).unwrap_or_else(|| "n/a".into());
                    summary(cli, &format!("target={} monotone={} fitted_order={order}", fmt_sig(table.target), table.monotone));
                    Ok(())
                }
            }
        }
        Command::Open { curve, seeds } => {
            json_only(cli, "open")?;
            let reports = curve
                .iter()
                .map(|c| experiments::open_report(c, *seeds, &opts))
                .collect::<Result<Vec<_>, _>>()?;
            match reports.as_slice() {
                [single] => write_json(cli, single)?,
                _ => write_json(cli, &reports)?,
            }
            for report in reports.iter().filter(|r| r.unstable) {
                summary(cli, &format!("{}: unstable, spread {} across seeds", report.curve, fmt_sig(report.spread)));
            }
            Ok(())
        }
    }
}
