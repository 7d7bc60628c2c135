//! Command-line front end: config loading, subcommand dispatch and reports.

mod commands;
mod config;
mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::{error, info, Level, LevelFilter, Log, Metadata, Record};

pub use commands::{
    free_convergence_pair, run_stage, span_check, Lab, BCH_ORDER8_TOL, CONVERGENCE_BAND, CURVE_TOL, DILATION_TOL,
    GOLDEN_RULE_TOL, MASS_TOL, MIXTURE_TOL, MOMENT_RATIO_TOL, MOMENT_TOL, MONOTONE_SLACK, ODE_TOL, SPAN_N_TOL,
    SPEEDUP_TOL,
};
pub use config::{load_config, BoostConfig, GridConfig, RunConfig, TimeGridConfig};
pub use report::{
    to_json_text, write_report, write_series_csv, CheckOutcome, ExperimentReport, FitRow, SignConvention, Table,
};

use crate::error::Result;
use crate::forge::SparseOperator;

#[derive(Debug, Parser)]
#[command(name = "speedup-lab", version, about = "Boosted decay on a momentum lattice: speed-up versus dilation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Poincare algebra residuals and the free-theory convergence pair.
    CheckAlgebra(RunArgs),
    /// Exact boost conjugation against the closed forms over a rapidity sweep.
    BoostIdentity(RunArgs),
    /// V(v, t) by both routes and the check V(v, t) = V(0, gamma t).
    Speedup(RunArgs),
    /// Survival fits of momentum eigenstates and the dilation ratios.
    Dilation(RunArgs),
    /// Boosted energy and momentum averages.
    Moments(RunArgs),
    /// Superposition of a boosted packet and a momentum eigenstate.
    Mixture(RunArgs),
    /// Coefficient ODE, adjoint series and span decomposition.
    Appendix(RunArgs),
    /// Cartesian sweep over velocities and momenta.
    Scan(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output_dir` from the config.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Refine the boost generator by least squares before running.
    #[arg(long)]
    refine_boost: bool,
    /// Only warnings and errors on the error stream.
    #[arg(long)]
    quiet: bool,
    /// Also write H, P and N as `(row, col, re, im)` CSVs under `operators/`.
    #[arg(long)]
    dump_operators: bool,
}

impl Command {
    fn parts(&self) -> (&'static str, &RunArgs) {
        match self {
            Command::CheckAlgebra(a) => ("check-algebra", a),
            Command::BoostIdentity(a) => ("boost-identity", a),
            Command::Speedup(a) => ("speedup", a),
            Command::Dilation(a) => ("dilation", a),
            Command::Moments(a) => ("moments", a),
            Command::Mixture(a) => ("mixture", a),
            Command::Appendix(a) => ("appendix", a),
            Command::Scan(a) => ("scan", a),
        }
    }
}

struct StageLogger;

impl Log for StageLogger {
    fn enabled(&self, metadata: &Metadata) -> bool {
        metadata.level() <= log::max_level()
    }

    fn log(&self, record: &Record) {
        if self.enabled(record.metadata()) {
            let stage = record.target().rsplit("::").next().unwrap_or("run");
            if record.level() <= Level::Warn {
                eprintln!("[{stage}] {}: {}", record.level().as_str().to_lowercase(), record.args());
            } else {
                eprintln!("[{stage}] {}", record.args());
            }
        }
    }

    fn flush(&self) {}
}

static LOGGER: StageLogger = StageLogger;

fn init_logging(quiet: bool) {
    let _ = log::set_logger(&LOGGER);
    log::set_max_level(if quiet { LevelFilter::Warn } else { LevelFilter::Info });
}

/// Nonzero entries above `1e-14` as `row,col,re,im`.
pub fn dump_operator(op: &SparseOperator, path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    w.write_record(["row", "col", "re", "im"])?;
    for (i, j, v) in op.iter() {
        if v.norm() > 1e-14 {
            w.serialize((i, j, v.re, v.im))?;
        }
    }
    w.flush()?;
    Ok(())
}

fn execute(name: &str, args: &RunArgs) -> Result<bool> {
    let start = Instant::now();
    let config = load_config(&args.config)?;
    let out_dir = args.out_dir.clone().unwrap_or_else(|| config.output_dir.clone());
    let refine = args.refine_boost || config.boost.use_refined;
    info!(target: "setup", "{} states, refine = {refine}", config.grid.n_modes * (config.grid.n_modes + 1));
    let lab = Lab::new(&config, refine)?;
    let setup = start.elapsed().as_secs_f64();
    let mut report = run_stage(&lab, name)?;
    report.timing.insert("setup".into(), setup);
    let write = Instant::now();
    let files = write_report(&report, &out_dir)?;
    if args.dump_operators {
        let dir = out_dir.join("operators");
        std::fs::create_dir_all(&dir)?;
        dump_operator(&lab.h, &dir.join("H.csv"))?;
        dump_operator(&lab.p, &dir.join("P.csv"))?;
        dump_operator(lab.generator.sparse(), &dir.join("N.csv"))?;
    }
    info!(target: "write", "{} files in {} ({:.3} s)", files.len(), out_dir.display(), write.elapsed().as_secs_f64());
    for c in &report.checks {
        if c.passed {
            info!(target: "check", "pass {}: {:.3e} (tolerance {:.3e})", c.name, c.value, c.tolerance);
        } else {
            error!(target: "check", "FAIL {}: {:.3e} (tolerance {:.3e}) {}", c.name, c.value, c.tolerance, c.detail);
        }
    }
    Ok(report.passed())
}

/// Parses `argv` (program name first) and runs; returns the process exit code.
///
/// 0 on success, 1 on a numeric failure or a failed check, 2 on usage or
/// configuration errors.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (name, args) = cli.command.parts();
    init_logging(args.quiet);
    match execute(name, args) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            error!(target: "run", "{e}");
            e.exit_code()
        }
    }
}
