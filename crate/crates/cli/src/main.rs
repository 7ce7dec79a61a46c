//! Command-line driver: single runs, table reproduction, radius surfaces,
//! matrix export and configuration checks.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dabsor_cli::config::{self, ExperimentConfig, Overrides};
use dabsor_cli::experiment::{export_matrices, prepare, run_experiment};
use dabsor_cli::surface::emit_surface;
use dabsor_cli::tables::{reproduce_table, Scale, TableId};
use dabsor_core::spectral::SpectralReport;

#[derive(Parser)]
#[command(
    name = "dabsor",
    about = "Waveform relaxation solver for time-dependent Stokes DAEs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Flat key-value config file (TOML); flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Interior grid points per dimension.
    #[arg(long)]
    grid: Option<usize>,
    /// BDF order (1..=6).
    #[arg(long)]
    order: Option<usize>,
    /// Time step.
    #[arg(long)]
    dt: Option<f64>,
    /// Number of windows.
    #[arg(long)]
    windows: Option<usize>,
    /// Preconditioner choice: q1 | q2.
    #[arg(long)]
    precond: Option<String>,
    /// Explicit velocity relaxation parameter.
    #[arg(long)]
    omega: Option<f64>,
    /// Explicit pressure relaxation parameter.
    #[arg(long)]
    tau: Option<f64>,
    /// Use the closed-form optimal parameters (the default when no
    /// explicit omega/tau are given).
    #[arg(long)]
    optimal: bool,
    /// Sweep cap per window.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Stopping tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed recorded in reports.
    #[arg(long)]
    seed: Option<u64>,
    /// Per-axis resolution for sweeps.
    #[arg(long)]
    resolution: Option<usize>,
}

impl CommonArgs {
    fn resolve(&self) -> Result<ExperimentConfig, config::ConfigError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        cfg.apply(&Overrides {
            grid: self.grid,
            order: self.order,
            dt: self.dt,
            windows: self.windows,
            precond: self.precond.clone(),
            omega: self.omega,
            tau: self.tau,
            optimal: self.optimal,
            max_iters: self.max_iters,
            tol: self.tol,
            out: self.out.clone(),
            seed: self.seed,
            resolution: self.resolution,
        });
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the windowed iteration and write report.json + history.csv.
    Run(CommonArgs),
    /// Reproduce one of the experiment tables (T3..T10) as CSV.
    Table {
        /// Table identifier: T3..T10.
        id: String,
        /// desk (12x12, orders 1..3) or full.
        #[arg(long, default_value = "desk")]
        scale: String,
        #[command(flatten)]
        args: CommonArgs,
    },
    /// Sweep the (omega, tau) plane and write surface.csv.
    Surface(CommonArgs),
    /// Write A, B and Q in MatrixMarket coordinate format.
    ExportMatrices(CommonArgs),
    /// Validate the configuration and print the spectral report.
    Check(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.resolve().map_err(|e| e.to_string())?;
            let artifacts = run_experiment(&cfg).map_err(|e| e.to_string())?;
            println!("report: {}", artifacts.report_path.display());
            println!("history: {}", artifacts.history_path.display());
            if artifacts.converged {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("solver did not converge: {}", artifacts.report.status);
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Table { id, scale, args } => {
            let cfg = args.resolve().map_err(|e| e.to_string())?;
            let table = TableId::parse(&id).ok_or_else(|| format!("UnknownTable: {id}"))?;
            let scale = Scale::parse(&scale)
                .ok_or_else(|| format!("unknown scale `{scale}` (desk|full)"))?;
            let result = reproduce_table(table, scale, &cfg).map_err(|e| e.to_string())?;
            println!("table: {}", result.path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Surface(args) => {
            let cfg = args.resolve().map_err(|e| e.to_string())?;
            let result = emit_surface(&cfg).map_err(|e| e.to_string())?;
            println!("surface: {}", result.path.display());
            if let Some(min) = result.min_rho {
                println!("min rho over sweep: {min}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ExportMatrices(args) => {
            let cfg = args.resolve().map_err(|e| e.to_string())?;
            let written = export_matrices(&cfg).map_err(|e| e.to_string())?;
            for path in written {
                println!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Check(args) => {
            let cfg = args.resolve().map_err(|e| e.to_string())?;
            let prep = prepare(&cfg).map_err(|e| e.to_string())?;
            let report =
                SpectralReport::compute(&prep.sys, &prep.scheme, cfg.dt, prep.omega, prep.tau)
                    .map_err(|e| e.to_string())?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("serializable report")
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}
