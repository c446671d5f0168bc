//! Clustering benchmark: k-means and EM error rates on the embedded
//! points across a grid of vertex counts, against the Bayes-optimal rate
//! of the limiting mixture.

use super::config::ExperimentConfig;
use super::io::{fnum, write_artifact, Csv};
use super::runner::run_cells;
use super::svg::{axes, tick_label, Frame, Svg, PALETTE};
use crate::clt::covariance_matrix;
use crate::cluster::{bayes_error, gmm_em, kmeans, misclassification, GaussianMixture};
use crate::embed::ase;
use crate::error::{Error, Result};
use crate::model::sample_graph;
use crate::rng;
use std::path::PathBuf;

const KMEANS_TAG: u64 = 0x4B4D;
const GMM_TAG: u64 = 0x474D;
const BAYES_TAG: u64 = 0xBAE5;

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub n: usize,
    pub replicate: usize,
    pub method: &'static str,
    pub error: f64,
}

/// Per-n aggregates: replicate means plus the Monte Carlo baseline.
#[derive(Clone, Debug)]
pub struct BenchPoint {
    pub n: usize,
    pub kmeans_mean: f64,
    pub gmm_mean: f64,
    pub bayes: f64,
    pub bayes_se: f64,
}

#[derive(Debug)]
pub struct ClusterBenchRun {
    pub rows: Vec<BenchRow>,
    pub per_n: Vec<BenchPoint>,
    pub csv_path: PathBuf,
    pub svg_path: PathBuf,
}

pub fn run_cluster_bench(cfg: &ExperimentConfig) -> Result<ClusterBenchRun> {
    let dist = cfg.latent()?;
    if cfg.d != 2 || dist.num_blocks() != 2 {
        return Err(Error::Config(
            "cluster-bench runs on two-block two-dimensional models".into(),
        ));
    }

    let results = run_cells(&cfg.n_grid, cfg.replicates, cfg.seed, cfg.threads, |cell| {
        let g = sample_graph(&dist, cell.n, cell.seed)?;
        let e = ase(&g, 2)?;
        let km = kmeans(&e.xhat, 2, rng::derive(cell.seed, KMEANS_TAG))?;
        let gm = gmm_em(&e.xhat, 2, rng::derive(cell.seed, GMM_TAG))?;
        Ok((
            misclassification(&km.labels, &g.labels)?,
            misclassification(&gm.labels, &g.labels)?,
        ))
    })?;

    // The Bayes rate depends on n only through the 1/n covariance shrink.
    let theory: Vec<_> = (0..2)
        .map(|k| covariance_matrix(dist.atom(k), &dist))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut per_n = Vec::new();
    let mut csv = Csv::new(cfg.hash(), cfg.seed, &["n", "replicate", "method", "error"]);
    for chunk in results.chunks(cfg.replicates) {
        let n = chunk[0].0.n;
        let mut sums = (0.0, 0.0);
        for (cell, (km, gm)) in chunk {
            rows.push(BenchRow {
                n,
                replicate: cell.replicate,
                method: "kmeans",
                error: *km,
            });
            rows.push(BenchRow {
                n,
                replicate: cell.replicate,
                method: "gmm",
                error: *gm,
            });
            csv.row(&[
                n.to_string(),
                cell.replicate.to_string(),
                "kmeans".into(),
                fnum(*km),
            ]);
            csv.row(&[
                n.to_string(),
                cell.replicate.to_string(),
                "gmm".into(),
                fnum(*gm),
            ]);
            sums.0 += km;
            sums.1 += gm;
        }
        let mixture = GaussianMixture::new(
            dist.weights().to_vec(),
            dist.atoms().clone(),
            theory.iter().map(|s| s.scale(1.0 / n as f64)).collect(),
        )?;
        let (bayes, bayes_se) = bayes_error(
            &mixture,
            cfg.n_mc,
            rng::derive(rng::derive(cfg.seed, n as u64), BAYES_TAG),
        )?;
        rows.push(BenchRow {
            n,
            replicate: 0,
            method: "bayes",
            error: bayes,
        });
        csv.row(&[n.to_string(), String::new(), "bayes".into(), fnum(bayes)]);
        per_n.push(BenchPoint {
            n,
            kmeans_mean: sums.0 / cfg.replicates as f64,
            gmm_mean: sums.1 / cfg.replicates as f64,
            bayes,
            bayes_se,
        });
    }

    let csv_path = write_artifact(&cfg.out_dir, "cluster_bench.csv", &csv.finish())?;
    let svg_path = write_artifact(&cfg.out_dir, "cluster_bench.svg", &draw_curves(&per_n))?;
    Ok(ClusterBenchRun {
        rows,
        per_n,
        csv_path,
        svg_path,
    })
}

/// Error curves on a log10 vertical axis, with the (C log n)/n reference
/// normalized to pass through the EM curve at the first grid point.
fn draw_curves(per_n: &[BenchPoint]) -> String {
    // Zero error rates (possible in small smoke runs) clamp to the floor.
    const FLOOR: f64 = 1e-5;
    let log = |v: f64| v.max(FLOOR).log10();
    let n0 = per_n[0].n as f64;
    let c = per_n[0].gmm_mean.max(FLOOR) * n0 / n0.ln();
    let reference: Vec<(f64, f64)> = per_n
        .iter()
        .map(|p| (p.n as f64, log(c * (p.n as f64).ln() / p.n as f64)))
        .collect();

    let series: [(&str, &str, Option<&str>, Vec<(f64, f64)>); 4] = [
        (
            "k-means",
            PALETTE[0],
            None,
            per_n
                .iter()
                .map(|p| (p.n as f64, log(p.kmeans_mean)))
                .collect(),
        ),
        (
            "EM mixture",
            PALETTE[1],
            None,
            per_n
                .iter()
                .map(|p| (p.n as f64, log(p.gmm_mean)))
                .collect(),
        ),
        (
            "Bayes",
            "black",
            Some("6 3"),
            per_n.iter().map(|p| (p.n as f64, log(p.bayes))).collect(),
        ),
        ("(C log n)/n", "#888888", Some("2 3"), reference),
    ];

    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for (_, _, _, pts) in &series {
        for &(_, y) in pts {
            y_lo = y_lo.min(y);
            y_hi = y_hi.max(y);
        }
    }
    let x_lo = per_n[0].n as f64;
    let x_hi = per_n.last().unwrap().n as f64;
    let frame = Frame::new(
        (x_lo, (x_hi).max(x_lo + 1.0)),
        (y_lo - 0.15, y_hi + 0.15),
        640.0,
        480.0,
    );
    let mut svg = Svg::new(640.0, 480.0);
    axes(
        &mut svg,
        &frame,
        "vertices",
        "classification error",
        &tick_label,
        &|v| format!("1e{v:.1}"),
    );
    svg.text(
        (320.0, 24.0),
        14.0,
        "middle",
        "clustering error against the Bayes rate",
    );
    for (i, (name, color, dash, pts)) in series.iter().enumerate() {
        let mapped: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| frame.map(x, y)).collect();
        svg.polyline(&mapped, color, 1.8, *dash);
        for &at in &mapped {
            svg.circle(at, 2.4, color, 1.0);
        }
        svg.text((560.0, 60.0 + 18.0 * i as f64), 12.0, "end", name);
        svg.line(
            (566.0, 56.0 + 18.0 * i as f64),
            (590.0, 56.0 + 18.0 * i as f64),
            color,
            2.0,
        );
    }
    svg.finish()
}
