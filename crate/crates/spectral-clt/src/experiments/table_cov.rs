//! Residual covariance table: per (n, block), the sample covariance of the
//! scaled residuals replicate by replicate, their mean, and the limiting
//! covariance they approach.

use super::config::{ExperimentConfig, ModelSpec};
use super::io::{fnum, write_artifact, Csv};
use super::runner::run_cells;
use crate::clt::{covariance_matrix, residual_report};
use crate::embed::ase;
use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::model::sample_graph;
use std::path::PathBuf;

/// All covariance estimates for one (n, block) pair.
#[derive(Clone, Debug)]
pub struct CovCell {
    pub n: usize,
    pub block: usize,
    pub replicates: Vec<Mat>,
    pub mean: Mat,
    pub theory: Mat,
}

#[derive(Debug)]
pub struct TableCovRun {
    pub cells: Vec<CovCell>,
    pub csv_path: PathBuf,
}

pub fn run_table_cov(cfg: &ExperimentConfig) -> Result<TableCovRun> {
    if !matches!(cfg.model, ModelSpec::Sbm { .. }) || cfg.d != 2 {
        return Err(Error::Config(
            "table-cov runs on a two-dimensional blockmodel".into(),
        ));
    }
    let dist = cfg.latent()?;
    let blocks = dist.num_blocks();
    let theory: Vec<Mat> = (0..blocks)
        .map(|k| covariance_matrix(dist.atom(k), &dist))
        .collect::<Result<_>>()?;

    let results = run_cells(&cfg.n_grid, cfg.replicates, cfg.seed, cfg.threads, |cell| {
        let g = sample_graph(&dist, cell.n, cell.seed)?;
        let e = ase(&g, cfg.d)?;
        Ok(residual_report(&g, &e, &dist)?.empirical_cov)
    })?;

    let mut cells = Vec::with_capacity(cfg.n_grid.len() * blocks);
    for chunk in results.chunks(cfg.replicates) {
        let n = chunk[0].0.n;
        for block in 0..blocks {
            let replicates: Vec<Mat> = chunk.iter().map(|(_, covs)| covs[block].clone()).collect();
            let mut mean = Mat::zeros(2, 2);
            for cov in &replicates {
                mean = mean.add(cov);
            }
            cells.push(CovCell {
                n,
                block,
                mean: mean.scale(1.0 / replicates.len() as f64),
                replicates,
                theory: theory[block].clone(),
            });
        }
    }

    let mut csv = Csv::new(
        cfg.hash(),
        cfg.seed,
        &["n", "block", "kind", "replicate", "c11", "c12", "c22"],
    );
    for cell in &cells {
        for (r, cov) in cell.replicates.iter().enumerate() {
            push_cov(&mut csv, cell, "replicate", &r.to_string(), cov);
        }
        push_cov(&mut csv, cell, "mean", "", &cell.mean);
        push_cov(&mut csv, cell, "theory", "", &cell.theory);
    }
    let csv_path = write_artifact(&cfg.out_dir, "table_cov.csv", &csv.finish())?;
    Ok(TableCovRun { cells, csv_path })
}

fn push_cov(csv: &mut Csv, cell: &CovCell, kind: &str, replicate: &str, cov: &Mat) {
    csv.row(&[
        cell.n.to_string(),
        cell.block.to_string(),
        kind.to_string(),
        replicate.to_string(),
        fnum(cov[(0, 0)]),
        fnum(cov[(0, 1)]),
        fnum(cov[(1, 1)]),
    ]);
}
