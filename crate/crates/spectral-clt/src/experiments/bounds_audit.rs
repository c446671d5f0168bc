//! Concentration bound audit: observed deviations next to their
//! high-probability envelopes, replicate by replicate, with violation
//! frequencies and growth medians per vertex count.

use super::config::ExperimentConfig;
use super::io::{fnum, write_artifact, Csv};
use super::runner::run_cells;
use crate::embed::{ase, concentration_report, upca, ConcentrationReport};
use crate::error::Result;
use crate::model::sample_graph;
use std::path::PathBuf;

#[derive(Clone, Debug)]
pub struct AuditSummary {
    pub n: usize,
    pub replicates: usize,
    pub xhat_violations: usize,
    pub v_violations: usize,
    pub spectral_violations: usize,
    pub median_s_diff: f64,
    pub median_vtv_diff: f64,
    pub median_lambda1_diff: f64,
}

#[derive(Debug)]
pub struct BoundsRun {
    /// (n, replicate, report) in cell order.
    pub rows: Vec<(usize, usize, ConcentrationReport)>,
    pub summary: Vec<AuditSummary>,
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
}

pub fn run_bounds_audit(cfg: &ExperimentConfig) -> Result<BoundsRun> {
    let dist = cfg.latent()?;
    let results = run_cells(&cfg.n_grid, cfg.replicates, cfg.seed, cfg.threads, |cell| {
        let g = sample_graph(&dist, cell.n, cell.seed)?;
        let e = ase(&g, cfg.d)?;
        let frame = upca(&g.latent)?;
        concentration_report(&g, &e, &frame, &dist, cfg.eta)
    })?;

    let mut csv = Csv::new(
        cfg.hash(),
        cfg.seed,
        &[
            "n",
            "replicate",
            "xhat_diff",
            "xhat_bound",
            "v_diff",
            "v_bound",
            "spectral_diff",
            "spectral_bound",
            "s_diff",
            "vtv_diff",
            "lambda1_diff",
        ],
    );
    let mut rows = Vec::with_capacity(results.len());
    let mut summary = Vec::new();
    for chunk in results.chunks(cfg.replicates) {
        let n = chunk[0].0.n;
        let mut viol = [0usize; 3];
        for (cell, rep) in chunk {
            if rep.xhat_diff > rep.xhat_bound {
                viol[0] += 1;
            }
            if rep.v_diff > rep.v_bound {
                viol[1] += 1;
            }
            if rep.spectral_diff > rep.spectral_bound {
                viol[2] += 1;
            }
            csv.row(&[
                n.to_string(),
                cell.replicate.to_string(),
                fnum(rep.xhat_diff),
                fnum(rep.xhat_bound),
                fnum(rep.v_diff),
                fnum(rep.v_bound),
                fnum(rep.spectral_diff),
                fnum(rep.spectral_bound),
                fnum(rep.s_diff),
                fnum(rep.vtv_diff),
                fnum(rep.lambda1_diff),
            ]);
            rows.push((n, cell.replicate, rep.clone()));
        }
        summary.push(AuditSummary {
            n,
            replicates: chunk.len(),
            xhat_violations: viol[0],
            v_violations: viol[1],
            spectral_violations: viol[2],
            median_s_diff: median(chunk.iter().map(|(_, r)| r.s_diff)),
            median_vtv_diff: median(chunk.iter().map(|(_, r)| r.vtv_diff)),
            median_lambda1_diff: median(chunk.iter().map(|(_, r)| r.lambda1_diff)),
        });
    }

    let mut sum_csv = Csv::new(
        cfg.hash(),
        cfg.seed,
        &[
            "n",
            "replicates",
            "xhat_violations",
            "v_violations",
            "spectral_violations",
            "median_s_diff",
            "median_vtv_diff",
            "median_lambda1_diff",
        ],
    );
    for s in &summary {
        sum_csv.row(&[
            s.n.to_string(),
            s.replicates.to_string(),
            s.xhat_violations.to_string(),
            s.v_violations.to_string(),
            s.spectral_violations.to_string(),
            fnum(s.median_s_diff),
            fnum(s.median_vtv_diff),
            fnum(s.median_lambda1_diff),
        ]);
    }

    let csv_path = write_artifact(&cfg.out_dir, "bounds_audit.csv", &csv.finish())?;
    let summary_path = write_artifact(&cfg.out_dir, "bounds_summary.csv", &sum_csv.finish())?;
    Ok(BoundsRun {
        rows,
        summary,
        csv_path,
        summary_path,
    })
}

/// Median of an iterator's values; the even case averages the middle pair.
pub fn median(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    assert!(!v.is_empty());
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}
