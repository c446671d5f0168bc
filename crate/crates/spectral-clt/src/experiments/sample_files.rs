//! Graph sampling to disk: one text file per (n, replicate) cell in the
//! latent-and-edge-list format the model layer reads back.

use super::config::ExperimentConfig;
use super::io::pathed;
use super::runner::run_cells;
use crate::error::Result;
use crate::model::sample_graph;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;

#[derive(Debug)]
pub struct SampleRun {
    pub paths: Vec<PathBuf>,
}

pub fn run_sample(cfg: &ExperimentConfig) -> Result<SampleRun> {
    let dist = cfg.latent()?;
    fs::create_dir_all(&cfg.out_dir).map_err(|e| pathed(&cfg.out_dir, e))?;
    let results = run_cells(&cfg.n_grid, cfg.replicates, cfg.seed, cfg.threads, |cell| {
        let g = sample_graph(&dist, cell.n, cell.seed)?;
        let path = cfg
            .out_dir
            .join(format!("sample_n{}_r{}.txt", cell.n, cell.replicate));
        let file = File::create(&path).map_err(|e| pathed(&path, e))?;
        let mut w = BufWriter::new(file);
        g.write_text(&mut w)?;
        Ok(path)
    })?;
    Ok(SampleRun {
        paths: results.into_iter().map(|(_, p)| p).collect(),
    })
}
