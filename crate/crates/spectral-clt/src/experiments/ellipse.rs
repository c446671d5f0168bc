//! Embedded scatter plots with the level curves of the limiting normals
//! drawn around each atom, one figure per vertex count.

use super::config::ExperimentConfig;
use super::io::{fnum, write_artifact, Csv};
use super::runner::run_cells;
use super::svg::{axes, tick_label, Frame, Svg, PALETTE};
use crate::clt::{level_curve, residual_report};
use crate::embed::{ase, ase_op, GramOp};
use crate::error::{Error, Result};
use crate::mat::{cholesky_solve, dot, Mat};
use crate::model::sample_graph;
use crate::rng;
use std::path::PathBuf;

/// Scatter plus per-block ellipse coverage for one vertex count.
#[derive(Clone, Debug)]
pub struct EllipseSummary {
    pub n: usize,
    /// Fraction of block-k points inside block k's level curve.
    pub coverage: Vec<f64>,
}

#[derive(Debug)]
pub struct EllipseRun {
    pub per_n: Vec<EllipseSummary>,
    pub csv_path: PathBuf,
    pub svg_paths: Vec<PathBuf>,
}

pub fn run_ellipse_plot(cfg: &ExperimentConfig) -> Result<EllipseRun> {
    if cfg.d != 2 {
        return Err(Error::Config(
            "ellipse-plot draws two-dimensional embeddings".into(),
        ));
    }
    let dist = cfg.latent()?;
    let blocks = dist.num_blocks();

    // One scatter per n; extra replicates would only overdraw the figure.
    let results = run_cells(&cfg.n_grid, 1, cfg.seed, cfg.threads, |cell| {
        let g = sample_graph(&dist, cell.n, cell.seed)?;
        let e = if cfg.noiseless {
            ase_op(&GramOp::new(&g.latent), 2, rng::derive(cell.seed, 0x4E4F))?
        } else {
            ase(&g, 2)?
        };
        let rep = residual_report(&g, &e, &dist)?;
        let root_n = (cell.n as f64).sqrt();
        let aligned = Mat::from_fn(cell.n, 2, |i, j| {
            g.latent[(i, j)] + rep.residuals[(i, j)] / root_n
        });
        Ok((aligned, g.labels, rep.theoretical_cov))
    })?;

    let q_level = -2.0 * (1.0 - cfg.level).ln();
    let mut csv = Csv::new(cfg.hash(), cfg.seed, &["n", "block", "x", "y"]);
    let mut per_n = Vec::new();
    let mut svg_paths = Vec::new();

    for (cell, (aligned, labels, sigmas)) in &results {
        let n = cell.n;
        let curves: Vec<Vec<(f64, f64)>> = (0..blocks)
            .map(|k| level_curve(&sigmas[k], cfg.level, dist.atom(k), n))
            .collect::<Result<_>>()?;

        // Coverage: Mahalanobis distance of each point from its own atom.
        let factors: Vec<Mat> = sigmas
            .iter()
            .map(|s| {
                s.cholesky().ok_or_else(|| {
                    Error::SingularSigma("limiting covariance not positive definite".into())
                })
            })
            .collect::<Result<_>>()?;
        let mut inside = vec![0usize; blocks];
        let mut count = vec![0usize; blocks];
        let root_n = (n as f64).sqrt();
        for (i, &l) in labels.iter().enumerate() {
            let diff: Vec<f64> = (0..2)
                .map(|j| root_n * (aligned[(i, j)] - dist.atom(l)[j]))
                .collect();
            let quad = dot(&diff, &cholesky_solve(&factors[l], &diff));
            count[l] += 1;
            if quad <= q_level {
                inside[l] += 1;
            }
        }
        per_n.push(EllipseSummary {
            n,
            coverage: (0..blocks)
                .map(|k| inside[k] as f64 / count[k].max(1) as f64)
                .collect(),
        });

        for (i, &l) in labels.iter().enumerate() {
            csv.row(&[
                n.to_string(),
                l.to_string(),
                fnum(aligned[(i, 0)]),
                fnum(aligned[(i, 1)]),
            ]);
        }

        svg_paths.push(write_artifact(
            &cfg.out_dir,
            &format!("ellipse_n{n}.svg"),
            &draw_scatter(n, aligned, labels, dist.atoms(), &curves),
        )?);
    }

    let csv_path = write_artifact(&cfg.out_dir, "ellipse.csv", &csv.finish())?;
    Ok(EllipseRun {
        per_n,
        csv_path,
        svg_paths,
    })
}

fn draw_scatter(
    n: usize,
    points: &Mat,
    labels: &[usize],
    atoms: &Mat,
    curves: &[Vec<(f64, f64)>],
) -> String {
    let mut x = (f64::INFINITY, f64::NEG_INFINITY);
    let mut y = (f64::INFINITY, f64::NEG_INFINITY);
    let mut grow = |px: f64, py: f64| {
        x = (x.0.min(px), x.1.max(px));
        y = (y.0.min(py), y.1.max(py));
    };
    for i in 0..points.rows() {
        grow(points[(i, 0)], points[(i, 1)]);
    }
    for curve in curves {
        for &(px, py) in curve {
            grow(px, py);
        }
    }
    let pad_x = 0.05 * (x.1 - x.0).max(1e-6);
    let pad_y = 0.05 * (y.1 - y.0).max(1e-6);
    let frame = Frame::new(
        (x.0 - pad_x, x.1 + pad_x),
        (y.0 - pad_y, y.1 + pad_y),
        640.0,
        520.0,
    );

    let mut svg = Svg::new(640.0, 520.0);
    axes(
        &mut svg,
        &frame,
        "first coordinate",
        "second coordinate",
        &tick_label,
        &tick_label,
    );
    svg.text(
        (320.0, 24.0),
        14.0,
        "middle",
        &format!("embedded positions, n = {n}"),
    );
    for (i, &l) in labels.iter().enumerate() {
        let at = frame.map(points[(i, 0)], points[(i, 1)]);
        svg.circle(at, 1.6, PALETTE[l % PALETTE.len()], 0.45);
    }
    for (k, curve) in curves.iter().enumerate() {
        let mut pts: Vec<(f64, f64)> = curve.iter().map(|&(px, py)| frame.map(px, py)).collect();
        if let Some(&first) = pts.first() {
            pts.push(first);
        }
        svg.polyline(&pts, PALETTE[k % PALETTE.len()], 1.6, Some("6 3"));
        let center = frame.map(atoms[(k, 0)], atoms[(k, 1)]);
        svg.circle(center, 3.0, "black", 1.0);
    }
    svg.finish()
}
