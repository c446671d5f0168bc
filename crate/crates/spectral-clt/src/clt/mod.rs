//! Limiting covariances for the embedding residuals and the diagnostics
//! that compare sampled residuals against them.
//!
//! The scaled residuals sqrt(n) (X̂W − X) of an embedded graph converge to a
//! mixture of centered normals, one component per latent atom. This module
//! computes the limiting covariance at any point, forms the residuals with
//! the best orthogonal alignment, and measures the distributional distance
//! with Kolmogorov-Smirnov statistics in several conditionings.

pub mod special;

use crate::error::{Error, Result};
use crate::linalg::{dense_symmetric_eigen, procrustes};
use crate::mat::Mat;
use crate::model::{moments, GraphSample, LatentDistribution, MomentSet};
use special::{chisq_cdf, normal_cdf};
use std::collections::BTreeMap;

/// Scaled residuals of one embedded graph plus their per-block summaries.
#[derive(Clone, Debug)]
pub struct ResidualReport {
    /// Rows r_i = sqrt(n) (X̂W − X)_i.
    pub residuals: Mat,
    /// Generating block of each row.
    pub labels: Vec<usize>,
    /// Mixture weights of the generating distribution.
    pub pi: Vec<f64>,
    /// Vertices per block.
    pub counts: Vec<usize>,
    /// Sample covariance of the residual rows in each block, divisor n_k − 1.
    pub empirical_cov: Vec<Mat>,
    /// Limiting covariance at each block's atom.
    pub theoretical_cov: Vec<Mat>,
    /// Orthogonal alignment applied to the embedding.
    pub w: Mat,
    /// Named scalar statistics; construction records the alignment's
    /// distance from the identity, callers may add more.
    pub diagnostics: BTreeMap<String, f64>,
}

/// Restriction of a report to a subset of blocks.
#[derive(Clone, Debug)]
pub struct ConditionalReport {
    /// Selected blocks, ascending.
    pub blocks: Vec<usize>,
    /// Rows falling in the selection.
    pub rows: usize,
    /// KS distance of the selected Mahalanobis statistics from chi-square d.
    pub mahalanobis_ks: f64,
    /// Per-coordinate KS distance of the selected residuals from the
    /// weight-renormalized mixture of centered normals over the selection.
    pub coordinate_mixture_ks: Vec<f64>,
}

/// One-dimensional limiting variance at x: the raw moment form
/// x E[X³] − x² E[X⁴] and its δ⁻²-scaled version, which is the variance
/// appearing in the residual limit.
pub fn sigma2_one_dim(x: f64, m: &MomentSet) -> Result<(f64, f64)> {
    let (m3, m4) = match (m.m3, m.m4) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::Domain(
                "scalar variance needs one-dimensional moments".into(),
            ))
        }
    };
    let delta = m.delta[(0, 0)];
    let raw = x * m3 - x * x * m4;
    let scaled = raw / (delta * delta);
    if !(scaled > 0.0) {
        return Err(Error::NonPositiveVariance(format!(
            "sigma2({x}) scaled to {scaled}; x lies outside the support geometry"
        )));
    }
    Ok((raw, scaled))
}

/// Limiting covariance Σ(x) = Δ⁻¹ E[X Xᵀ (xᵀX − (xᵀX)²)] Δ⁻¹, with the
/// expectation an exact finite sum over the mixture atoms.
pub fn covariance_matrix(x: &[f64], dist: &LatentDistribution) -> Result<Mat> {
    let d = dist.dim();
    if x.len() != d {
        return Err(Error::Domain(format!(
            "evaluation point has dimension {}, distribution has {d}",
            x.len()
        )));
    }
    let mset = moments(dist);
    let delta_inv = try_inverse_spd(&mset.delta).ok_or_else(|| {
        Error::SingularDelta(format!(
            "second-moment eigenvalues {:?} are not invertible at condition 1e12",
            mset.delta_eigs
        ))
    })?;
    let mut mid = Mat::zeros(d, d);
    for k in 0..dist.num_blocks() {
        let atom = dist.atom(k);
        let ip: f64 = x.iter().zip(atom).map(|(a, b)| a * b).sum();
        let scale = dist.weights()[k] * (ip - ip * ip);
        for i in 0..d {
            for j in 0..d {
                mid[(i, j)] += scale * atom[i] * atom[j];
            }
        }
    }
    let sigma = delta_inv.matmul(&mid).matmul(&delta_inv);
    // Exact symmetry for downstream eigendecompositions.
    Ok(Mat::from_fn(d, d, |i, j| {
        0.5 * (sigma[(i, j)] + sigma[(j, i)])
    }))
}

/// Aligns the embedding onto the latent matrix and packages the scaled
/// residuals with per-block covariance summaries.
pub fn residual_report(
    sample: &GraphSample,
    embedding: &crate::embed::Embedding,
    dist: &LatentDistribution,
) -> Result<ResidualReport> {
    let n = sample.n;
    let d = dist.dim();
    if embedding.d() != d || sample.latent.cols() != d {
        return Err(Error::Domain(format!(
            "embedding dimension {} against latent dimension {d}",
            embedding.d()
        )));
    }
    let blocks = dist.num_blocks();
    let w = procrustes(&embedding.xhat, &sample.latent)?;
    let aligned = embedding.xhat.matmul(&w);
    let root_n = (n as f64).sqrt();
    let residuals = Mat::from_fn(n, d, |i, j| {
        root_n * (aligned[(i, j)] - sample.latent[(i, j)])
    });

    let mut counts = vec![0usize; blocks];
    for &l in &sample.labels {
        counts[l] += 1;
    }
    let mut empirical_cov = Vec::with_capacity(blocks);
    for k in 0..blocks {
        if counts[k] < 2 {
            return Err(Error::EmptyBlock(format!(
                "block {k} holds {} vertices; a covariance needs at least 2",
                counts[k]
            )));
        }
        let mut mean = vec![0.0f64; d];
        for (i, &l) in sample.labels.iter().enumerate() {
            if l == k {
                for (mj, rj) in mean.iter_mut().zip(residuals.row(i)) {
                    *mj += rj;
                }
            }
        }
        for mj in &mut mean {
            *mj /= counts[k] as f64;
        }
        let mut cov = Mat::zeros(d, d);
        for (i, &l) in sample.labels.iter().enumerate() {
            if l == k {
                let row = residuals.row(i);
                for a in 0..d {
                    for b in 0..d {
                        cov[(a, b)] += (row[a] - mean[a]) * (row[b] - mean[b]);
                    }
                }
            }
        }
        empirical_cov.push(cov.scale(1.0 / (counts[k] as f64 - 1.0)));
    }
    let theoretical_cov = (0..blocks)
        .map(|k| covariance_matrix(dist.atom(k), dist))
        .collect::<Result<Vec<_>>>()?;

    let mut diagnostics = BTreeMap::new();
    diagnostics.insert(
        "w_identity_gap".to_string(),
        w.sub(&Mat::identity(d)).frob_norm(),
    );
    Ok(ResidualReport {
        residuals,
        labels: sample.labels.clone(),
        pi: dist.weights().to_vec(),
        counts,
        empirical_cov,
        theoretical_cov,
        w,
        diagnostics,
    })
}

/// KS distance between the Mahalanobis statistics
/// q_i = r_iᵀ Σ(x_{label(i)})⁻¹ r_i and the chi-square law with d degrees
/// of freedom they converge to.
pub fn mahalanobis_chisq_ks(report: &ResidualReport) -> Result<f64> {
    let d = report.residuals.cols();
    let inverses = invert_block_covariances(&report.theoretical_cov)?;
    let q = mahalanobis_values(report, &inverses, None);
    Ok(ks_statistic(q, &|x| chisq_cdf(x, d)))
}

/// KS distance between the samples and a centered normal of the given
/// variance.
pub fn ks_normal_1d(samples: &[f64], variance: f64) -> Result<f64> {
    if !(variance > 0.0) {
        return Err(Error::Domain(format!(
            "variance {variance} must be positive"
        )));
    }
    if samples.is_empty() {
        return Err(Error::Domain("KS statistic of an empty sample".into()));
    }
    Ok(ks_statistic(samples.to_vec(), &|x| normal_cdf(x, variance)))
}

/// Restricts the diagnostics to rows whose block lies in `blocks`. The
/// Mahalanobis comparison uses each row's own block covariance; the
/// per-coordinate comparison uses the mixture CDF with weights renormalized
/// over the selection.
pub fn conditional_report(report: &ResidualReport, blocks: &[usize]) -> Result<ConditionalReport> {
    let total = report.counts.len();
    let mut selected = blocks.to_vec();
    selected.sort_unstable();
    selected.dedup();
    if selected.is_empty() {
        return Err(Error::EmptyBlock("no blocks selected".into()));
    }
    if *selected.last().unwrap() >= total {
        return Err(Error::Domain(format!(
            "block {} out of range for {total} blocks",
            selected.last().unwrap()
        )));
    }
    let in_selection = |l: usize| selected.binary_search(&l).is_ok();
    let rows = report.labels.iter().filter(|&&l| in_selection(l)).count();
    if rows == 0 {
        return Err(Error::EmptyBlock(format!(
            "blocks {selected:?} hold no vertices"
        )));
    }

    let d = report.residuals.cols();
    let inverses = invert_block_covariances(&report.theoretical_cov)?;
    let q = mahalanobis_values(report, &inverses, Some(&selected));
    let mahalanobis_ks = ks_statistic(q, &|x| chisq_cdf(x, d));

    let pi_total: f64 = selected.iter().map(|&k| report.pi[k]).sum();
    let mut coordinate_mixture_ks = Vec::with_capacity(d);
    for j in 0..d {
        for &k in &selected {
            if !(report.theoretical_cov[k][(j, j)] > 0.0) {
                return Err(Error::SingularSigma(format!(
                    "block {k} has non-positive variance in coordinate {j}"
                )));
            }
        }
        let coord: Vec<f64> = report
            .labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| in_selection(l))
            .map(|(i, _)| report.residuals[(i, j)])
            .collect();
        let cdf = |z: f64| {
            selected
                .iter()
                .map(|&k| {
                    report.pi[k] / pi_total * normal_cdf(z, report.theoretical_cov[k][(j, j)])
                })
                .sum::<f64>()
        };
        coordinate_mixture_ks.push(ks_statistic(coord, &cdf));
    }
    Ok(ConditionalReport {
        blocks: selected,
        rows,
        mahalanobis_ks,
        coordinate_mixture_ks,
    })
}

/// Largest absolute cross-correlation between residual coordinates of
/// distinct pinned vertices, measured across replicates. Each matrix holds
/// one replicate: row a is the residual of pinned vertex a.
pub fn pairwise_independence(replicates: &[Mat]) -> Result<f64> {
    const NEED: usize = 100;
    if replicates.len() < NEED {
        return Err(Error::TooFewReplicates {
            got: replicates.len(),
            need: NEED,
        });
    }
    let k = replicates[0].rows();
    let d = replicates[0].cols();
    if replicates.iter().any(|m| m.rows() != k || m.cols() != d) {
        return Err(Error::Domain("replicate residual shapes disagree".into()));
    }
    if k <= 1 {
        return Ok(0.0);
    }
    let r = replicates.len() as f64;
    let series = |vertex: usize, coord: usize| -> Vec<f64> {
        replicates.iter().map(|m| m[(vertex, coord)]).collect()
    };
    let mut max_corr = 0.0f64;
    for a in 0..k {
        for b in (a + 1)..k {
            for p in 0..d {
                let xs = series(a, p);
                let mx = xs.iter().sum::<f64>() / r;
                let vx = xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
                if vx <= 0.0 {
                    continue;
                }
                for q in 0..d {
                    let ys = series(b, q);
                    let my = ys.iter().sum::<f64>() / r;
                    let vy = ys.iter().map(|y| (y - my) * (y - my)).sum::<f64>();
                    if vy <= 0.0 {
                        continue;
                    }
                    let cov = xs
                        .iter()
                        .zip(&ys)
                        .map(|(x, y)| (x - mx) * (y - my))
                        .sum::<f64>();
                    max_corr = max_corr.max((cov / (vx * vy).sqrt()).abs());
                }
            }
        }
    }
    Ok(max_corr)
}

/// Points of the ellipse enclosing `level` probability mass of a centered
/// bivariate normal with covariance Σ/n, translated to `center`. The radius
/// uses the closed-form chi-square(2) quantile q = −2 ln(1 − level).
pub fn level_curve(sigma: &Mat, level: f64, center: &[f64], n: usize) -> Result<Vec<(f64, f64)>> {
    if sigma.rows() != 2 || sigma.cols() != 2 || center.len() != 2 {
        return Err(Error::Domain(
            "level curves are defined for 2x2 covariances and 2-vectors".into(),
        ));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("level {level} outside (0, 1)")));
    }
    if n == 0 {
        return Err(Error::Domain("level curve needs n >= 1".into()));
    }
    let eig = dense_symmetric_eigen(sigma)?;
    let scale = eig.values[0].abs().max(1.0);
    if eig.values.iter().any(|&v| v < -1e-10 * scale) {
        return Err(Error::SingularSigma(format!(
            "covariance eigenvalues {:?} are not PSD",
            eig.values
        )));
    }
    // Σ^{1/2} = Q Λ^{1/2} Qᵀ with negative rounding clamped away.
    let q_mat = &eig.vectors;
    let mut root = Mat::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            for (l, value) in eig.values.iter().enumerate() {
                root[(i, j)] += q_mat[(i, l)] * value.max(0.0).sqrt() * q_mat[(j, l)];
            }
        }
    }
    let radius = (-2.0 * (1.0 - level).ln()).sqrt();
    let shrink = 1.0 / (n as f64).sqrt();
    let count = 256usize;
    let mut points = Vec::with_capacity(count);
    for i in 0..count {
        let t = 2.0 * std::f64::consts::PI * i as f64 / count as f64;
        let u = [radius * t.cos(), radius * t.sin()];
        let x = center[0] + shrink * (root[(0, 0)] * u[0] + root[(0, 1)] * u[1]);
        let y = center[1] + shrink * (root[(1, 0)] * u[0] + root[(1, 1)] * u[1]);
        points.push((x, y));
    }
    Ok(points)
}

/// Inverse of a symmetric positive definite matrix through its
/// eigendecomposition; `None` when the condition number reaches 1e12 or a
/// non-positive eigenvalue appears.
fn try_inverse_spd(m: &Mat) -> Option<Mat> {
    let eig = dense_symmetric_eigen(m).ok()?;
    let max = eig.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    if eig.values.iter().any(|&v| !(v > 0.0) || max / v >= 1e12) {
        return None;
    }
    let d = m.rows();
    let mut inv = Mat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            for (l, value) in eig.values.iter().enumerate() {
                inv[(i, j)] += eig.vectors[(i, l)] * eig.vectors[(j, l)] / value;
            }
        }
    }
    Some(inv)
}

fn invert_block_covariances(covs: &[Mat]) -> Result<Vec<Mat>> {
    covs.iter()
        .enumerate()
        .map(|(k, c)| {
            try_inverse_spd(c).ok_or_else(|| {
                Error::SingularSigma(format!("limiting covariance of block {k} is singular"))
            })
        })
        .collect()
}

/// Mahalanobis statistics r_iᵀ Σ_{label(i)}⁻¹ r_i, optionally restricted to
/// rows whose label lies in the sorted selection.
fn mahalanobis_values(
    report: &ResidualReport,
    inverses: &[Mat],
    selection: Option<&[usize]>,
) -> Vec<f64> {
    let d = report.residuals.cols();
    report
        .labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| selection.is_none_or(|s| s.binary_search(&l).is_ok()))
        .map(|(i, &l)| {
            let row = report.residuals.row(i);
            let inv = &inverses[l];
            let mut q = 0.0;
            for a in 0..d {
                for b in 0..d {
                    q += row[a] * inv[(a, b)] * row[b];
                }
            }
            q
        })
        .collect()
}

/// Two-sided KS distance between the empirical CDF of the samples and the
/// reference CDF.
fn ks_statistic(mut samples: Vec<f64>, cdf: &dyn Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut dist = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        dist = dist.max(f - i as f64 / n).max((i as f64 + 1.0) / n - f);
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{ase, ase_op, GramOp};
    use crate::linalg::random_orthogonal;
    use crate::model::{erdos_renyi_distribution, sample_graph, sbm_to_latent};
    use crate::rng;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn two_block_model() -> LatentDistribution {
        let b = Mat::from_rows(&[vec![0.42, 0.42], vec![0.42, 0.5]]);
        sbm_to_latent(&b, &[0.6, 0.4]).unwrap()
    }

    fn inverse_2x2(m: &Mat) -> Mat {
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        Mat::from_rows(&[
            vec![m[(1, 1)] / det, -m[(0, 1)] / det],
            vec![-m[(1, 0)] / det, m[(0, 0)] / det],
        ])
    }

    #[test]
    fn scalar_variance_matches_the_bernoulli_limit() {
        // Single atom sqrt(p): the scaled variance collapses to 1 - p.
        for p in [0.25, 0.5, 0.81] {
            let m = moments(&erdos_renyi_distribution(p).unwrap());
            let (raw, scaled) = sigma2_one_dim(p.sqrt(), &m).unwrap();
            assert!((scaled - (1.0 - p)).abs() < 1e-12, "p = {p}");
            assert!((raw - (p * p - p * p * p)).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_variance_matches_direct_moment_sums() {
        let atoms = Mat::from_rows(&[vec![0.3], vec![0.6]]);
        let dist = LatentDistribution::new(atoms, vec![0.5, 0.5]).unwrap();
        let m = moments(&dist);
        let m3 = (0.3f64.powi(3) + 0.6f64.powi(3)) / 2.0;
        let m4 = (0.3f64.powi(4) + 0.6f64.powi(4)) / 2.0;
        let delta = (0.09 + 0.36) / 2.0;
        let x = 0.3;
        let want_raw = x * m3 - x * x * m4;
        let (raw, scaled) = sigma2_one_dim(x, &m).unwrap();
        assert!((raw - want_raw).abs() < 1e-15);
        assert!((scaled - want_raw / (delta * delta)).abs() < 1e-12);
    }

    #[test]
    fn scalar_variance_rejects_bad_inputs() {
        let m = moments(&erdos_renyi_distribution(0.25).unwrap());
        assert!(matches!(
            sigma2_one_dim(10.0, &m),
            Err(Error::NonPositiveVariance(_))
        ));
        let m2 = moments(&two_block_model());
        assert!(sigma2_one_dim(0.5, &m2).is_err());
    }

    #[test]
    fn block_one_covariance_collapses_to_a_scaled_inverse() {
        // Both inner products against the first atom equal 0.42, so the
        // middle expectation is 0.42(1 - 0.42) Δ and Σ(x₁) is that multiple
        // of Δ⁻¹. This gives a closed form independent of the implementation.
        let dist = two_block_model();
        let sigma = covariance_matrix(dist.atom(0), &dist).unwrap();
        let want = inverse_2x2(&moments(&dist).delta).scale(0.42 * 0.58);
        assert!(sigma.sub(&want).max_abs() < 1e-10);
        // Published two-decimal values for the same matrix.
        let published = Mat::from_rows(&[vec![0.59, 0.55], vec![0.55, 13.07]]);
        assert!(sigma.sub(&published).max_abs() < 0.01);
        assert!((sigma[(0, 1)] - sigma[(1, 0)]).abs() < 1e-12);
    }

    #[test]
    fn block_two_covariance_matches_explicit_arithmetic() {
        let dist = two_block_model();
        let sigma = covariance_matrix(dist.atom(1), &dist).unwrap();
        let (x1, x2) = (dist.atom(0).to_vec(), dist.atom(1).to_vec());
        // Inner products against x₂ are 0.42 and 0.5, so the middle sum is
        // 0.6·0.42·0.58 x₁x₁ᵀ + 0.4·0.5·0.5 x₂x₂ᵀ.
        let mut mid = Mat::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                mid[(i, j)] = 0.6 * (0.42 * 0.58) * x1[i] * x1[j] + 0.4 * 0.25 * x2[i] * x2[j];
            }
        }
        let dinv = inverse_2x2(&moments(&dist).delta);
        let want = dinv.matmul(&mid).matmul(&dinv);
        assert!(sigma.sub(&want).max_abs() < 1e-10);
        let published = Mat::from_rows(&[vec![0.60, 0.59], vec![0.59, 13.26]]);
        assert!(sigma.sub(&published).max_abs() < 0.01);
        let eig = dense_symmetric_eigen(&sigma).unwrap();
        assert!(eig.values.iter().all(|&v| v > -1e-10));
    }

    #[test]
    fn one_dimensional_covariance_agrees_with_the_scalar_path() {
        let atoms = Mat::from_rows(&[vec![0.3], vec![0.6]]);
        let dist = LatentDistribution::new(atoms, vec![0.5, 0.5]).unwrap();
        let m = moments(&dist);
        for x in [0.3, 0.45, 0.6] {
            let sigma = covariance_matrix(&[x], &dist).unwrap();
            let (_, scaled) = sigma2_one_dim(x, &m).unwrap();
            assert!((sigma[(0, 0)] - scaled).abs() < 1e-12);
        }
        let er = erdos_renyi_distribution(0.25).unwrap();
        let sigma = covariance_matrix(&[0.5], &er).unwrap();
        assert!((sigma[(0, 0)] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn collinear_atoms_make_delta_singular() {
        let atoms = Mat::from_rows(&[vec![0.5, 0.0], vec![0.7, 0.0]]);
        let dist = LatentDistribution::new(atoms, vec![0.6, 0.4]).unwrap();
        assert!(matches!(
            covariance_matrix(&[0.5, 0.0], &dist),
            Err(Error::SingularDelta(_))
        ));
    }

    #[test]
    fn noiseless_embedding_leaves_no_residual() {
        let dist = two_block_model();
        let g = sample_graph(&dist, 200, 5).unwrap();
        let e = ase_op(&GramOp::new(&g.latent), 2, 9).unwrap();
        let rep = residual_report(&g, &e, &dist).unwrap();
        let bound = 1e-6 * (200.0f64).sqrt();
        for i in 0..200 {
            let norm: f64 = rep
                .residuals
                .row(i)
                .iter()
                .map(|x| x * x)
                .sum::<f64>()
                .sqrt();
            assert!(norm <= bound, "row {i}: {norm}");
        }
        assert!(rep.diagnostics.contains_key("w_identity_gap"));
    }

    #[test]
    fn sampled_covariance_lands_near_the_published_band() {
        let dist = two_block_model();
        let g = sample_graph(&dist, 2000, 1203).unwrap();
        let e = ase(&g, 2).unwrap();
        let rep = residual_report(&g, &e, &dist).unwrap();
        let s1 = &rep.empirical_cov[0];
        let eig = dense_symmetric_eigen(s1).unwrap();
        assert!(eig.values.iter().all(|&v| v > -1e-10));
        assert!(
            s1[(1, 1)] > 10.0 && s1[(1, 1)] < 20.0,
            "corner entry {}",
            s1[(1, 1)]
        );
        assert_eq!(rep.counts.iter().sum::<usize>(), 2000);
    }

    #[test]
    fn report_statistics_ignore_column_signs_and_rotations() {
        let dist = two_block_model();
        let g = sample_graph(&dist, 400, 21).unwrap();
        let e = ase(&g, 2).unwrap();
        let base = residual_report(&g, &e, &dist).unwrap();
        let base_ks = mahalanobis_chisq_ks(&base).unwrap();

        // Forced sign flip of both embedding columns.
        let mut flipped = e.clone();
        flipped.vectors = flipped.vectors.scale(-1.0);
        flipped.xhat = flipped.xhat.scale(-1.0);
        let rep_f = residual_report(&g, &flipped, &dist).unwrap();
        for k in 0..2 {
            assert!(rep_f.empirical_cov[k].sub(&base.empirical_cov[k]).max_abs() < 1e-8);
        }
        assert!((mahalanobis_chisq_ks(&rep_f).unwrap() - base_ks).abs() < 1e-10);

        // Rotating the latent frame transports the covariances and leaves
        // the rotation-invariant statistics alone.
        let mut r = rng::stream(77);
        let q = random_orthogonal(2, &mut r);
        let rotated =
            LatentDistribution::new(dist.atoms().matmul(&q), dist.weights().to_vec()).unwrap();
        let g_rot = GraphSample {
            n: g.n,
            latent: g.latent.matmul(&q),
            labels: g.labels.clone(),
            adjacency: g.adjacency.clone(),
            seed: g.seed,
        };
        let rep_r = residual_report(&g_rot, &e, &rotated).unwrap();
        for k in 0..2 {
            let transported = q.t_matmul(&base.empirical_cov[k]).matmul(&q);
            assert!(rep_r.empirical_cov[k].sub(&transported).max_abs() < 1e-8);
        }
        assert!((mahalanobis_chisq_ks(&rep_r).unwrap() - base_ks).abs() < 1e-9);
    }

    #[test]
    fn mahalanobis_ks_vanishes_on_exact_quantiles() {
        // Residuals manufactured so q_i hits the chi-square(2) quantile grid.
        let n = 100_000usize;
        let residuals = Mat::from_fn(n, 2, |i, j| {
            if j == 0 {
                let u = (i as f64 + 0.5) / n as f64;
                (-2.0 * (1.0 - u).ln()).sqrt()
            } else {
                0.0
            }
        });
        let report = ResidualReport {
            residuals,
            labels: vec![0; n],
            pi: vec![1.0],
            counts: vec![n],
            empirical_cov: vec![Mat::identity(2)],
            theoretical_cov: vec![Mat::identity(2)],
            w: Mat::identity(2),
            diagnostics: BTreeMap::new(),
        };
        let ks = mahalanobis_chisq_ks(&report).unwrap();
        assert!(ks <= 0.5 / n as f64 + 1e-12, "ks = {ks}");
    }

    #[test]
    fn degenerate_residuals_have_maximal_ks() {
        let report = ResidualReport {
            residuals: Mat::zeros(50, 2),
            labels: vec![0; 50],
            pi: vec![1.0],
            counts: vec![50],
            empirical_cov: vec![Mat::identity(2)],
            theoretical_cov: vec![Mat::identity(2)],
            w: Mat::identity(2),
            diagnostics: BTreeMap::new(),
        };
        assert_eq!(mahalanobis_chisq_ks(&report).unwrap(), 1.0);
    }

    #[test]
    fn normal_ks_vanishes_on_exact_quantiles() {
        // Invert the normal CDF by bisection to land samples on the
        // quantile grid; the KS statistic is then 1/(2n) by construction.
        let n = 1000usize;
        let variance = 0.75;
        let quantile = |u: f64| {
            let (mut lo, mut hi) = (-40.0f64, 40.0f64);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if normal_cdf(mid, variance) < u {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let samples: Vec<f64> = (0..n)
            .map(|i| quantile((i as f64 + 0.5) / n as f64))
            .collect();
        let ks = ks_normal_1d(&samples, variance).unwrap();
        assert!(ks <= 0.5 / n as f64 + 1e-9, "ks = {ks}");
        assert!(ks_normal_1d(&samples, 0.0).is_err());
    }

    #[test]
    fn conditional_view_restricts_consistently() {
        let dist = two_block_model();
        let g = sample_graph(&dist, 600, 33).unwrap();
        let e = ase(&g, 2).unwrap();
        let rep = residual_report(&g, &e, &dist).unwrap();

        let all = conditional_report(&rep, &[0, 1]).unwrap();
        let unconditional = mahalanobis_chisq_ks(&rep).unwrap();
        assert!((all.mahalanobis_ks - unconditional).abs() < 1e-15);
        assert_eq!(all.rows, 600);

        // A single block's mixture CDF is just that block's normal.
        let one = conditional_report(&rep, &[1]).unwrap();
        for j in 0..2 {
            let coord: Vec<f64> = rep
                .labels
                .iter()
                .enumerate()
                .filter(|(_, &l)| l == 1)
                .map(|(i, _)| rep.residuals[(i, j)])
                .collect();
            let want = ks_normal_1d(&coord, rep.theoretical_cov[1][(j, j)]).unwrap();
            assert!((one.coordinate_mixture_ks[j] - want).abs() < 1e-15);
        }
        assert_eq!(one.rows, rep.counts[1]);

        assert!(conditional_report(&rep, &[]).is_err());
        assert!(conditional_report(&rep, &[5]).is_err());
    }

    #[test]
    fn independent_replicates_show_no_cross_correlation() {
        let mut r = rng::stream(4242);
        let reps: Vec<Mat> = (0..200)
            .map(|_| Mat::from_fn(3, 2, |_, _| r.sample(StandardNormal)))
            .collect();
        let max_corr = pairwise_independence(&reps).unwrap();
        assert!(max_corr < 0.2, "max corr {max_corr}");
        assert!(max_corr > 0.0);

        let singles: Vec<Mat> = (0..150).map(|_| Mat::zeros(1, 2)).collect();
        assert_eq!(pairwise_independence(&singles).unwrap(), 0.0);

        let few: Vec<Mat> = (0..99).map(|_| Mat::zeros(2, 2)).collect();
        assert!(matches!(
            pairwise_independence(&few),
            Err(Error::TooFewReplicates { got: 99, need: 100 })
        ));
    }

    #[test]
    fn level_curves_have_closed_form_radii() {
        let eye = Mat::identity(2);
        let pts = level_curve(&eye, 0.95, &[0.0, 0.0], 1).unwrap();
        assert_eq!(pts.len(), 256);
        let want = (-2.0f64 * 0.05f64.ln()).sqrt();
        for (x, y) in &pts {
            assert!(((x * x + y * y).sqrt() - want).abs() < 1e-12);
        }
        let quarter = level_curve(&eye, 0.95, &[0.0, 0.0], 4).unwrap();
        for ((x, y), (qx, qy)) in pts.iter().zip(&quarter) {
            assert!((qx - x / 2.0).abs() < 1e-12 && (qy - y / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lower_levels_nest_strictly_inside() {
        let sigma = Mat::from_rows(&[vec![2.0, 0.7], vec![0.7, 1.0]]);
        let outer = level_curve(&sigma, 0.95, &[1.0, -2.0], 3).unwrap();
        let inner = level_curve(&sigma, 0.5, &[1.0, -2.0], 3).unwrap();
        for (o, i) in outer.iter().zip(&inner) {
            let ro = ((o.0 - 1.0).powi(2) + (o.1 + 2.0).powi(2)).sqrt();
            let ri = ((i.0 - 1.0).powi(2) + (i.1 + 2.0).powi(2)).sqrt();
            assert!(ri < ro);
        }
        assert!(level_curve(&Mat::identity(3), 0.95, &[0.0, 0.0], 1).is_err());
        assert!(level_curve(&Mat::identity(2), 1.0, &[0.0, 0.0], 1).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn level_curve_points_satisfy_the_quadratic_form(
            a in 0.2f64..3.0,
            b in -1.0f64..1.0,
            c in 0.2f64..3.0,
            level in 0.05f64..0.95,
            n in 1usize..100,
            cx in -5.0f64..5.0,
            cy in -5.0f64..5.0,
        ) {
            // Symmetric positive definite by construction.
            let sigma = Mat::from_rows(&[
                vec![a * a + b * b + 0.1, b * (a + c)],
                vec![b * (a + c), c * c + b * b + 0.1],
            ]);
            let pts = level_curve(&sigma, level, &[cx, cy], n).unwrap();
            let inv = inverse_2x2(&sigma);
            let q = -2.0 * (1.0 - level).ln();
            for (x, y) in pts {
                let u = [(x - cx) * (n as f64).sqrt(), (y - cy) * (n as f64).sqrt()];
                let form = u[0] * inv[(0, 0)] * u[0]
                    + 2.0 * u[0] * inv[(0, 1)] * u[1]
                    + u[1] * inv[(1, 1)] * u[1];
                prop_assert!((form - q).abs() < 1e-6 * q.max(1.0));
            }
        }
    }
}
