//! Scalar residual check on the single-probability edge model: pooled
//! residuals against the centered normal with variance 1 - p.

use super::config::{ExperimentConfig, ModelSpec};
use super::io::{fnum, write_artifact, Csv};
use super::runner::run_cells;
use crate::clt::{ks_normal_1d, residual_report};
use crate::embed::ase;
use crate::error::{Error, Result};
use crate::model::sample_graph;
use std::path::PathBuf;

#[derive(Clone, Debug)]
pub struct ErPoint {
    pub n: usize,
    pub pooled_variance: f64,
    pub pooled_ks: f64,
    /// (variance, ks) per replicate, in replicate order.
    pub per_replicate: Vec<(f64, f64)>,
}

#[derive(Debug)]
pub struct ErRun {
    pub per_n: Vec<ErPoint>,
    pub csv_path: PathBuf,
}

pub fn run_er_clt(cfg: &ExperimentConfig) -> Result<ErRun> {
    let ModelSpec::Er { p } = cfg.model else {
        return Err(Error::Config(
            "er-clt needs the single-probability edge model".into(),
        ));
    };
    let dist = cfg.latent()?;
    let limit_var = 1.0 - p;

    let results = run_cells(&cfg.n_grid, cfg.replicates, cfg.seed, cfg.threads, |cell| {
        let g = sample_graph(&dist, cell.n, cell.seed)?;
        let e = ase(&g, 1)?;
        let rep = residual_report(&g, &e, &dist)?;
        Ok(rep.residuals.col(0))
    })?;

    let mut csv = Csv::new(
        cfg.hash(),
        cfg.seed,
        &["n", "scope", "replicate", "variance", "ks"],
    );
    let mut per_n = Vec::new();
    for chunk in results.chunks(cfg.replicates) {
        let n = chunk[0].0.n;
        let mut pooled = Vec::with_capacity(n * cfg.replicates);
        let mut per_replicate = Vec::with_capacity(cfg.replicates);
        for (cell, residuals) in chunk {
            let var = sample_variance(residuals);
            let ks = ks_normal_1d(residuals, limit_var)?;
            csv.row(&[
                n.to_string(),
                "replicate".to_string(),
                cell.replicate.to_string(),
                fnum(var),
                fnum(ks),
            ]);
            per_replicate.push((var, ks));
            pooled.extend_from_slice(residuals);
        }
        let pooled_variance = sample_variance(&pooled);
        let pooled_ks = ks_normal_1d(&pooled, limit_var)?;
        csv.row(&[
            n.to_string(),
            "pooled".to_string(),
            String::new(),
            fnum(pooled_variance),
            fnum(pooled_ks),
        ]);
        per_n.push(ErPoint {
            n,
            pooled_variance,
            pooled_ks,
            per_replicate,
        });
    }

    let csv_path = write_artifact(&cfg.out_dir, "er_clt.csv", &csv.finish())?;
    Ok(ErRun { per_n, csv_path })
}

fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
}
