//! Command-line surface.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::driver::{self, Experiment};
use crate::error::{Error, Result};
use crate::exponents;

#[derive(Parser)]
#[command(
    name = "bihartree",
    version,
    about = "Pseudospectral simulator and diagnostics for a fourth-order inhomogeneous Hartree equation",
    subcommand_required = true,
    arg_required_else_help = true
)]
pub struct Cli {
    /// Path to a key = value configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Override a configuration key (repeatable), e.g. --set N=5.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,

    /// Upper bound on internal numerical parallelism. This build computes
    /// serially, so any value is accepted and results are identical.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    /// Dump the operator cache arrays as checkpoint files into a directory.
    #[arg(long = "dump-cache", global = true, value_name = "DIR")]
    pub dump_cache: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Print the derived critical indices as a key=value report.
    Exponents,
    /// Verdict of the parameter admissibility condition.
    CheckC,
    /// Compute the ground state; writes profile checkpoint and JSON summary.
    Groundstate,
    /// Run the split-step evolution with diagnostics and persistence.
    Evolve,
    /// Short run comparing centered differences of the momentum functional
    /// with the assembled identity right-hand side.
    MorawetzVerify,
    /// Pullback Cauchy analysis over the checkpoints in the output dir.
    ScatterScan,
    /// Local-mass minima and decay trend of the stored time series.
    EvacScan,
}

fn resolve_threads(cli: &Cli) -> Result<usize> {
    let n = match cli.threads {
        Some(n) => n,
        None => match std::env::var("BIHARTREE_THREADS") {
            Ok(v) => v.parse().map_err(|_| {
                Error::ConfigValidation(format!("BIHARTREE_THREADS = `{}` is not an integer", v))
            })?,
            Err(_) => 1,
        },
    };
    if n == 0 {
        return Err(Error::ConfigValidation("--threads must be >= 1".into()));
    }
    Ok(n)
}

pub fn run(cli: Cli) -> Result<()> {
    let _threads = resolve_threads(&cli)?;
    let cfg = RunConfig::load(cli.config.as_deref(), &cli.set)?;
    match cli.command {
        Command::Exponents => {
            let exp = Experiment::build(cfg)?;
            maybe_dump(&cli, &exp)?;
            if cli.json {
                println!(
                    "{}",
                    serde_json::to_string(&driver::exponent_json(&exp)).expect("serializable")
                );
            } else {
                for (k, v) in driver::exponent_report(&exp) {
                    println!("{}={}", k, v);
                }
            }
        }
        Command::CheckC => {
            // the verdict only needs the parameters, not a grid
            let report = exponents::check_condition_c(&cfg.params);
            if cli.json {
                println!("{}", serde_json::to_string(&report).expect("serializable"));
            } else if report.valid {
                println!("condition (C): valid");
            } else {
                println!("condition (C): invalid");
                for v in &report.violated {
                    println!("  violated: {} ({})", v.clause, v.detail);
                }
            }
        }
        Command::Groundstate => {
            let exp = Experiment::build(cfg)?;
            maybe_dump(&cli, &exp)?;
            let (_, summary) = driver::run_groundstate(&exp)?;
            if cli.json {
                println!("{}", serde_json::to_string(&summary).expect("serializable"));
            } else {
                println!("mass={}", summary.mass);
                println!("deltaSq={}", summary.delta_sq);
                println!("energy={}", summary.energy);
                println!("residual={:e}", summary.residual);
                println!("iterations={}", summary.iterations);
                println!("S_final={}", summary.s_final);
                if summary.analytic_dimension_mismatch {
                    println!(
                        "note=profile computed on the d={} grid while N={}; thresholds mix scales",
                        exp.grid.d, exp.cfg.params.n
                    );
                }
            }
        }
        Command::Evolve => {
            let exp = Experiment::build(cfg)?;
            maybe_dump(&cli, &exp)?;
            let out = driver::run_evolve(&exp)?;
            let last = out.samples.last().expect("at least the initial sample");
            if cli.json {
                println!(
                    "{}",
                    serde_json::to_string(&serde_json::json!({
                        "t_final": out.final_time,
                        "mass": last.mass,
                        "energy": last.energy,
                        "samples": out.samples.len(),
                        "timeseries": out.csv_path,
                        "checkpoints": out.checkpoint_paths,
                    }))
                    .expect("serializable")
                );
            } else {
                println!("evolved to t={}", out.final_time);
                println!("mass={}", last.mass);
                println!("energy={}", last.energy);
                println!("timeseries={}", out.csv_path.display());
                println!("checkpoints={}", out.checkpoint_paths.len());
            }
        }
        Command::MorawetzVerify => {
            let exp = Experiment::build(cfg)?;
            maybe_dump(&cli, &exp)?;
            let report = driver::run_morawetz_verify(&exp, 20)?;
            if cli.json {
                println!("{}", serde_json::to_string(&report).expect("serializable"));
            } else {
                println!("{:>10} {:>18} {:>18} {:>12}", "t", "dM/dt (FD)", "rhs", "rel_err");
                for row in &report.rows {
                    println!(
                        "{:>10.5} {:>18.10e} {:>18.10e} {:>12.3e}",
                        row.t, row.fd, row.rhs, row.rel_error
                    );
                }
                println!("max_rel_error={:e}", report.max_rel_error);
                println!("median_rel_error={:e}", report.median_rel_error);
                println!("term_assembly_gap={:e}", report.term_assembly_gap);
            }
        }
        Command::ScatterScan => {
            let exp = Experiment::build(cfg)?;
            maybe_dump(&cli, &exp)?;
            let (report, _) = driver::run_scatter_scan(&exp)?;
            if cli.json {
                println!("{}", serde_json::to_string(&report).expect("serializable"));
            } else {
                println!("samples={}", report.sample_times.len());
                println!(
                    "consecutive_cauchy={}",
                    report
                        .consecutive
                        .iter()
                        .map(|v| format!("{:.6e}", v))
                        .collect::<Vec<_>>()
                        .join(",")
                );
                println!("final_residual={:e}", report.final_residual);
                println!("verdict={:?}", report.verdict);
            }
        }
        Command::EvacScan => {
            let exp = Experiment::build(cfg)?;
            maybe_dump(&cli, &exp)?;
            let scan = driver::run_evac_scan(&exp)?;
            if cli.json {
                println!("{}", serde_json::to_string(&scan).expect("serializable"));
            } else {
                println!("minima={}", scan.minima.len());
                for (t, v) in &scan.minima {
                    println!("  t={} local_mass={:e}", t, v);
                }
                println!("log_slope={}", scan.slope);
            }
        }
    }
    Ok(())
}

fn maybe_dump(cli: &Cli, exp: &Experiment) -> Result<()> {
    if let Some(dir) = &cli.dump_cache {
        driver::dump_cache(exp, dir)?;
    }
    Ok(())
}
