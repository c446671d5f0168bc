//! Command-line front end: one subcommand per experiment, flags layered
//! over an optional config file, artifacts written to the output
//! directory. Exit codes: 0 success, 2 configuration error, 3 numerical
//! or I/O failure.

use clap::{Args, Parser, Subcommand};
use spectral_clt::error::{Error, Result};
use spectral_clt::experiments::{
    self, config::parse_usize_list, Experiment, ExperimentConfig, Overrides,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "spectral-clt",
    about = "Samples random dot product graphs, embeds them spectrally, and \
             checks the embedding residuals against their limiting laws",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Residual covariance table across a grid of vertex counts
    TableCov(RunArgs),
    /// Embedded scatter plots with limiting-normal level curves
    EllipsePlot(RunArgs),
    /// K-means and EM clustering error against the Bayes rate
    ClusterBench(RunArgs),
    /// Scalar residual law on the single-probability edge model
    ErClt(RunArgs),
    /// Concentration bounds against observed deviations
    BoundsAudit(RunArgs),
    /// Write sampled graphs to disk
    Sample(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file; flags below override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Vertex counts, comma separated (overrides n_grid)
    #[arg(long)]
    n: Option<String>,
    /// Replicates per vertex count
    #[arg(long)]
    replicates: Option<usize>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Confidence parameter for the concentration bounds
    #[arg(long)]
    eta: Option<f64>,
    /// Probability mass enclosed by plotted level curves
    #[arg(long)]
    level: Option<f64>,
    /// Output directory for artifacts
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: one per core)
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match &cli.command {
        Command::TableCov(a) => (Experiment::TableCov, a),
        Command::EllipsePlot(a) => (Experiment::EllipsePlot, a),
        Command::ClusterBench(a) => (Experiment::ClusterBench, a),
        Command::ErClt(a) => (Experiment::ErClt, a),
        Command::BoundsAudit(a) => (Experiment::BoundsAudit, a),
        Command::Sample(a) => (Experiment::Sample, a),
    };
    match run(experiment, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(experiment: Experiment, args: &RunArgs) -> Result<()> {
    let file = match &args.config {
        Some(path) => Some(
            std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
        ),
        None => None,
    };
    let overrides = Overrides {
        n_grid: args.n.as_deref().map(parse_usize_list).transpose()?,
        replicates: args.replicates,
        seed: args.seed,
        eta: args.eta,
        level: args.level,
        out_dir: args.out.clone(),
        threads: args.threads,
    };
    let cfg = ExperimentConfig::build(experiment, file.as_deref(), &overrides)?;
    println!(
        "{} config_hash={:016x} seed={}",
        experiment.name(),
        cfg.hash(),
        cfg.seed
    );

    match experiment {
        Experiment::TableCov => {
            let run = experiments::run_table_cov(&cfg)?;
            for cell in &run.cells {
                println!(
                    "n={} block={} mean=[{:.4}, {:.4}; {:.4}] theory=[{:.4}, {:.4}; {:.4}]",
                    cell.n,
                    cell.block,
                    cell.mean[(0, 0)],
                    cell.mean[(0, 1)],
                    cell.mean[(1, 1)],
                    cell.theory[(0, 0)],
                    cell.theory[(0, 1)],
                    cell.theory[(1, 1)],
                );
            }
            println!("wrote {}", run.csv_path.display());
        }
        Experiment::EllipsePlot => {
            let run = experiments::run_ellipse_plot(&cfg)?;
            for s in &run.per_n {
                let cov: Vec<String> = s.coverage.iter().map(|c| format!("{c:.3}")).collect();
                println!(
                    "n={} level={} coverage=[{}]",
                    s.n,
                    cfg.level,
                    cov.join(", ")
                );
            }
            println!("wrote {}", run.csv_path.display());
            for p in &run.svg_paths {
                println!("wrote {}", p.display());
            }
        }
        Experiment::ClusterBench => {
            let run = experiments::run_cluster_bench(&cfg)?;
            for p in &run.per_n {
                println!(
                    "n={} kmeans={:.4} gmm={:.4} bayes={:.4} (se {:.4})",
                    p.n, p.kmeans_mean, p.gmm_mean, p.bayes, p.bayes_se
                );
            }
            println!("wrote {}", run.csv_path.display());
            println!("wrote {}", run.svg_path.display());
        }
        Experiment::ErClt => {
            let run = experiments::run_er_clt(&cfg)?;
            for p in &run.per_n {
                println!(
                    "n={} pooled_variance={:.4} pooled_ks={:.4}",
                    p.n, p.pooled_variance, p.pooled_ks
                );
            }
            println!("wrote {}", run.csv_path.display());
        }
        Experiment::BoundsAudit => {
            let run = experiments::run_bounds_audit(&cfg)?;
            for s in &run.summary {
                println!(
                    "n={} violations: xhat {}/{} v {}/{} spectral {}/{} | medians: s {:.3} vtv {:.4} lambda1 {:.3}",
                    s.n,
                    s.xhat_violations,
                    s.replicates,
                    s.v_violations,
                    s.replicates,
                    s.spectral_violations,
                    s.replicates,
                    s.median_s_diff,
                    s.median_vtv_diff,
                    s.median_lambda1_diff,
                );
            }
            println!("wrote {}", run.csv_path.display());
            println!("wrote {}", run.summary_path.display());
        }
        Experiment::Sample => {
            let run = experiments::run_sample(&cfg)?;
            for p in &run.paths {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}
