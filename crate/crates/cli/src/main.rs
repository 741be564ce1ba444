use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

use sdpcut_cli::{cmd_diagnose, cmd_emit_plotdata, cmd_pipeline, ExperimentConfig, Mode};

/// Sparsest-cut relaxation toolkit: diagnostics, solve/cover/round
/// pipelines, and plot-data emission. Log level comes from RUST_LOG.
#[derive(Parser)]
#[command(name = "sdpcut", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Graph file: header `n r m`, then m lines `u v` (0-based ids).
    #[arg(long)]
    graph: PathBuf,
    /// Number of cover sets is 2k.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Allowed uncovered fraction.
    #[arg(long, default_value_t = 1.0 / 128.0)]
    eps: f64,
    /// Cover diameter bound under squared distances.
    #[arg(long, default_value_t = 1.0 / 16.0)]
    delta: f64,
    /// Seed for all randomized stages.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Solver residual tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Extraction shortcut threshold: accept sweep cuts <= kappa * sdp.
    #[arg(long, default_value_t = 16.0)]
    kappa: f64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn config(&self, mode: Option<Mode>) -> ExperimentConfig {
        ExperimentConfig {
            graph: self.graph.clone(),
            mode,
            k: self.k,
            eps: self.eps,
            delta: self.delta,
            seed: self.seed,
            tol: self.tol,
            kappa: self.kappa,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Spectrum prefix and brute-force expansion quantities.
    Diagnose {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Solve the relaxation, build a cover or certificate, and round.
    Pipeline {
        /// Structure pipeline and rounding scheme.
        #[arg(long, value_enum)]
        mode: Mode,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Aggregate report JSONs into a CSV for plotting.
    PlotData {
        /// Directory containing *.json reports.
        #[arg(long)]
        reports: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn emit(report_json: String, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, report_json)?,
        None => print!("{report_json}"),
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::init();
    let cli = Cli::parse();
    match cli.command {
        Command::Diagnose { common } => {
            let report = cmd_diagnose(&common.config(None))?;
            emit(report.to_json()?, common.out.as_ref())
        }
        Command::Pipeline { mode, common } => {
            let report = cmd_pipeline(&common.config(Some(mode)))?;
            emit(report.to_json()?, common.out.as_ref())
        }
        Command::PlotData { reports, out } => {
            let rows = cmd_emit_plotdata(&reports, &out)?;
            log::info!("wrote {rows} rows to {}", out.display());
            Ok(())
        }
    }
}
