//! Command-line front end: `steady`, `dynamics` and `sweep`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::dynamics::{detect_steady_state, evolve, SteadyStateDetection, TrajectoryDiagnostics};
use crate::error::{Error, Result};
use crate::steadystate::{assemble_report, SteadyStateReport};

#[derive(Debug, Parser)]
#[command(name = "sbm-tcl", version, about = "Spin-boson steady states and dynamics from TCL generators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Second-order steady state by both routes, written as JSON.
    Steady(RunArgs),
    /// Second-order time evolution, written as CSV plus a diagnostics JSON.
    Dynamics(RunArgs),
    /// Steady state over a grid of one parameter, written as CSV.
    Sweep(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML config, or a JSON report from a previous run.
    #[arg(long)]
    config: PathBuf,
    /// Output file; defaults to `output.path` or a per-command name.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Relative tolerance of the frequency integrals.
    #[arg(long)]
    rel_tol: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Provenance {
    library: &'static str,
    version: &'static str,
    command: &'static str,
    rel_tol: f64,
    abs_tol: f64,
    ode_rel_tol: f64,
    wall_time_s: f64,
}

impl Provenance {
    fn new(command: &'static str, cfg: &RunConfig, started: Instant) -> Self {
        Self {
            library: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            rel_tol: cfg.numerics.rel_tol,
            abs_tol: cfg.numerics.abs_tol,
            ode_rel_tol: cfg.numerics.ode_rel_tol,
            wall_time_s: started.elapsed().as_secs_f64(),
        }
    }
}

#[derive(Serialize)]
struct SteadyOutput<'a> {
    provenance: Provenance,
    config: &'a RunConfig,
    report: &'a SteadyStateReport,
}

#[derive(Serialize)]
struct DynamicsOutput<'a> {
    provenance: Provenance,
    config: &'a RunConfig,
    rows: usize,
    diagnostics: &'a TrajectoryDiagnostics,
    steady_state: SteadyStateDetection,
}

/// Parse arguments, run the command and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(msg) => {
            println!("{msg}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<String> {
    match command {
        Command::Steady(a) => cmd_steady(&a),
        Command::Dynamics(a) => cmd_dynamics(&a),
        Command::Sweep(a) => cmd_sweep(&a),
    }
}

fn load(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(t) = args.rel_tol {
        cfg.numerics.rel_tol = t;
    }
    Ok(cfg)
}

fn output_path(args: &RunArgs, cfg: &RunConfig, fallback: &str) -> PathBuf {
    args.out.clone().or_else(|| cfg.output.path.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from(fallback))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Numerical(format!("cannot serialise output: {e}")))
}

fn num(x: f64) -> String {
    format!("{x:.11e}")
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cmd_steady(args: &RunArgs) -> Result<String> {
    let started = Instant::now();
    let cfg = load(args)?;
    let p = cfg.system_params()?;
    let sd = cfg.spectral_density()?;
    let qc = cfg.quad_config()?;
    let report = assemble_report(&p, sd.as_ref(), &qc)?;
    let out = output_path(args, &cfg, "steady_report.json");
    let doc = SteadyOutput { provenance: Provenance::new("steady", &cfg, started), config: &cfg, report: &report };
    write_file(&out, &to_json(&doc)?)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(format!(
        "v1 = {:.9e}, v3 = {:.9e} (route discrepancy {:.2e}, {:.2e}); wrote {}",
        report.assembled.v1,
        report.assembled.v3,
        report.route_discrepancy.v1,
        report.route_discrepancy.v3,
        out.display()
    ))
}

/// `traj.csv` → `traj.diagnostics.json`
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("diagnostics.json")
}

fn cmd_dynamics(args: &RunArgs) -> Result<String> {
    let started = Instant::now();
    let cfg = load(args)?;
    let p = cfg.system_params()?;
    let sd = cfg.spectral_density()?;
    let (v_init, opts) = cfg.evolve_options()?;
    let traj = evolve(&p, sd.as_ref(), &v_init, &opts)?;
    let mut csv = String::with_capacity(64 * traj.len());
    csv.push_str("t,v1,v2,v3\n");
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let _ = writeln!(csv, "{},{},{},{}", num(*t), num(s[1]), num(s[2]), num(s[3]));
    }
    let out = output_path(args, &cfg, "trajectory.csv");
    write_file(&out, &csv)?;
    let detection = detect_steady_state(&traj, 0.1 * opts.t_max, 1e-6);
    let doc = DynamicsOutput {
        provenance: Provenance::new("dynamics", &cfg, started),
        config: &cfg,
        rows: traj.len(),
        diagnostics: &traj.diagnostics,
        steady_state: detection,
    };
    let side = sidecar_path(&out);
    write_file(&side, &to_json(&doc)?)?;
    for w in &traj.diagnostics.warnings {
        eprintln!("warning: {w}");
    }
    Ok(format!("{} rows; wrote {} and {}", traj.len(), out.display(), side.display()))
}

const SWEEP_COLUMNS: &str =
    "v1_tcl,v1_mfgs,v1_discrepancy,v2_tcl,v3_tcl,v3_mfgs,v3_discrepancy,assembled_v1,assembled_v3,warning,error";

fn sweep_row(index: usize, value: f64, result: &Result<SteadyStateReport>) -> String {
    let mut row = format!("{index},{}", num(value));
    match result {
        Ok(r) => {
            for x in [
                r.tcl_correction.v1,
                r.mfgs_correction.v1,
                r.route_discrepancy.v1,
                r.tcl_correction.v2,
                r.tcl_correction.v3,
                r.mfgs_correction.v3,
                r.route_discrepancy.v3,
                r.assembled.v1,
                r.assembled.v3,
            ] {
                row.push(',');
                row.push_str(&num(x));
            }
            let _ = write!(row, ",{},", csv_text(&r.warnings.join("; ")));
        }
        Err(e) => {
            row.push_str(&",".repeat(9));
            let _ = write!(row, ",,{}", csv_text(&e.to_string()));
        }
    }
    row
}

fn cmd_sweep(args: &RunArgs) -> Result<String> {
    let cfg = load(args)?;
    let sweep = cfg.sweep.clone().ok_or_else(|| Error::validation("sweep", "missing section"))?;
    if sweep.values.is_empty() {
        return Err(Error::validation("sweep.values", "grid is empty"));
    }
    // an unknown path is a configuration error, not a per-point failure
    cfg.with_override(&sweep.parameter, sweep.values[0])?;
    let qc = cfg.quad_config()?;
    let results: Vec<Result<SteadyStateReport>> = sweep
        .values
        .par_iter()
        .map(|&v| {
            let c = cfg.with_override(&sweep.parameter, v)?;
            let p = c.system_params()?;
            let sd = c.spectral_density()?;
            assemble_report(&p, sd.as_ref(), &qc)
        })
        .collect();
    let mut csv = format!("index,{},{SWEEP_COLUMNS}\n", csv_text(&sweep.parameter));
    for (i, (v, r)) in sweep.values.iter().zip(&results).enumerate() {
        csv.push_str(&sweep_row(i, *v, r));
        csv.push('\n');
    }
    let out = output_path(args, &cfg, "sweep.csv");
    write_file(&out, &csv)?;
    let failed: Vec<&Error> = results.iter().filter_map(|r| r.as_ref().err()).collect();
    if failed.len() == results.len() {
        let first = results.into_iter().find_map(|r| r.err()).expect("all points failed");
        return Err(first.context("every sweep point failed"));
    }
    Ok(format!("{} points ({} failed); wrote {}", results.len(), failed.len(), out.display()))
}
