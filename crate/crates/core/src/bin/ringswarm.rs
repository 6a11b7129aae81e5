use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ringswarm::error::Error;
use ringswarm::output;
use ringswarm::sim::{self, SimConfig};
use ringswarm::swarm::SwarmParams;
use ringswarm::sweep::{self, SweepSpec};
use ringswarm::Strategy;

/// Deterministic ring-swarm simulator and cautiousness-sweep harness.
#[derive(Parser)]
#[command(name = "ringswarm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and export metrics.
    Run(RunArgs),
    /// Run a parameter-grid sweep from a spec file.
    Sweep(SweepArgs),
    /// Reduce a results file over c_r, keeping the best lambda per (r, l_r).
    Flatten(FlattenArgs),
    /// Emit every applicable report table from a results file.
    Report(ReportArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Avoidance strategy: none|potential|gyro|cbc|orca.
    #[arg(long, default_value = "none")]
    strategy: String,
    /// Number of agents.
    #[arg(long, default_value_t = 20)]
    n: usize,
    /// Attraction gain (1/s^2).
    #[arg(long, default_value_t = 0.001)]
    alpha: f64,
    /// Speed regulation gain (s/m^2).
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Set-point speed (m/s).
    #[arg(long, default_value_t = 0.12)]
    v0: f64,
    /// Attraction sensing delay (s).
    #[arg(long, default_value_t = 2.5)]
    t_d: f64,
    /// Agent radius (m).
    #[arg(long, default_value_t = 0.15)]
    r: f64,
    /// Local sensing radius (m).
    #[arg(long, default_value_t = 1.0)]
    l_r: f64,
    /// Cautiousness parameter.
    #[arg(long, default_value_t = 1.0)]
    c_r: f64,
    /// Acceleration cap (m/s^2).
    #[arg(long, default_value_t = 0.6)]
    a_max: f64,
    /// Random seed for initial headings.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Total simulated time (s); defaults to 12000, or 32000 for the slower
    /// settling potential/gyro strategies.
    #[arg(long)]
    t_total: Option<f64>,
    /// Metric window at the end of the run (s).
    #[arg(long, default_value_t = 2000.0)]
    t_measure: f64,
    /// Timestep upper bound (s).
    #[arg(long, default_value_t = 0.015)]
    dt_cap: f64,
    /// Steps between metric samples.
    #[arg(long, default_value_t = 10)]
    record_stride: u32,
    /// Disable collision detection and respawns.
    #[arg(long)]
    no_collisions: bool,
    /// Comma-separated times (s) at which to export state snapshots.
    #[arg(long, value_delimiter = ',')]
    snapshot_times: Vec<f64>,
    /// Metric series output path (CSV).
    #[arg(long, default_value = "metrics.csv")]
    metrics_out: PathBuf,
    /// Run summary output path (JSON).
    #[arg(long, default_value = "summary.json")]
    summary_out: PathBuf,
    /// Trajectory snapshot output path (CSV); requires --snapshot-times.
    #[arg(long)]
    trajectory_out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep spec file (TOML).
    #[arg(long)]
    spec: PathBuf,
    /// Output directory for results.csv, summary.json and the checkpoint.
    #[arg(long)]
    out_dir: PathBuf,
    /// Parallel simulation workers.
    #[arg(long, default_value_t = 8)]
    workers: usize,
    /// Reuse an existing checkpoint instead of starting fresh.
    #[arg(long)]
    resume: bool,
    /// Suppress progress lines on stderr.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct FlattenArgs {
    /// Sweep results file (results.csv).
    #[arg(long)]
    results: PathBuf,
    /// Output table path.
    #[arg(long, default_value = "flat.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Sweep results file (results.csv).
    #[arg(long)]
    results: PathBuf,
    /// Directory for the report tables.
    #[arg(long, default_value = "reports")]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Flatten(args) => cmd_flatten(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::NonFiniteState { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<(), Error> {
    let strategy: Strategy = args.strategy.parse()?;
    let params = SwarmParams {
        n: args.n,
        alpha: args.alpha,
        beta: args.beta,
        v0: args.v0,
        t_d: args.t_d,
        r: args.r,
        l_r: args.l_r,
        c_r: args.c_r,
        a_max: args.a_max,
    };
    let config = SimConfig {
        params,
        strategy,
        seed: args.seed,
        t_total: args.t_total.unwrap_or_else(|| sim::default_t_total(strategy)),
        t_measure: args.t_measure,
        dt_cap: args.dt_cap,
        record_stride: args.record_stride,
        snapshot_times: args.snapshot_times.clone(),
        collisions_enabled: !args.no_collisions,
    };
    let out = sim::run(&config)?;
    output::write_atomic(&args.metrics_out, &output::metrics_csv(&out))?;
    output::write_atomic(&args.summary_out, &output::summary_json(&config, &out))?;
    if let Some(path) = &args.trajectory_out {
        output::write_atomic(path, &output::trajectory_csv(&out))?;
    }
    println!(
        "lambda {} (fatness {}, tangentness {}), {} collisions, dt {}, {} steps",
        out.lambda,
        out.mean_fatness,
        out.mean_tangentness,
        out.collisions(),
        out.dt,
        out.steps
    );
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.spec)?;
    let spec = SweepSpec::from_toml(&text)?;
    std::fs::create_dir_all(&args.out_dir)?;
    let checkpoint = args.out_dir.join("checkpoint.jsonl");
    if !args.resume && checkpoint.exists() {
        std::fs::remove_file(&checkpoint)?;
    }
    let result = sweep::run_sweep(&spec, args.workers, Some(&checkpoint), !args.quiet)?;
    output::write_atomic(&args.out_dir.join("results.csv"), &sweep::results_csv(&result))?;

    let missing = result.records.iter().filter(|r| r.lambda.is_none()).count();
    let summary = serde_json::json!({
        "cells": result.grid.cell_count(),
        "seeds": result.grid.seeds.len(),
        "records": result.records.len(),
        "missing": missing,
        "strategy": spec.base.strategy,
        "r_values": result.grid.r_values,
        "l_r_values": result.grid.l_r_values,
        "c_r_values": result.grid.c_r_values,
        "n_values": result.grid.n_values,
    });
    output::write_atomic(
        &args.out_dir.join("summary.json"),
        &format!("{}\n", serde_json::to_string_pretty(&summary).expect("summary")),
    )?;
    println!(
        "{} records ({} missing) -> {}",
        result.records.len(),
        missing,
        args.out_dir.join("results.csv").display()
    );
    Ok(())
}

fn cmd_flatten(args: FlattenArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.results)?;
    let result = sweep::parse_results_csv(&text)?;
    let flat = sweep::flatten_best_cr(&result);
    output::write_atomic(&args.out, &sweep::flat_csv(&flat))?;
    println!("{} rows -> {}", flat.len(), args.out.display());
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.results)?;
    let result = sweep::parse_results_csv(&text)?;
    std::fs::create_dir_all(&args.out_dir)?;

    let flat = sweep::flatten_best_cr(&result);
    output::write_atomic(&args.out_dir.join("flat.csv"), &sweep::flat_csv(&flat))?;

    let lines = sweep::average_over_lr(&flat);
    output::write_atomic(&args.out_dir.join("lambda_vs_r.csv"), &sweep::lines_csv(&lines))?;

    if result.grid.n_values.len() > 1 {
        let scaling = sweep::scaling_table(&result);
        output::write_atomic(&args.out_dir.join("scaling.csv"), &sweep::scaling_csv(&scaling))?;
        println!(
            "wrote flat.csv, lambda_vs_r.csv, scaling.csv to {}",
            args.out_dir.display()
        );
    } else {
        println!(
            "wrote flat.csv, lambda_vs_r.csv to {}",
            args.out_dir.display()
        );
    }
    Ok(())
}
