//! Clustering of embedded points and the error rates that score it.
//!
//! The benchmark pits k-means and a full-covariance Gaussian mixture fit
//! against each other on the same embedded coordinates, with a Monte Carlo
//! estimate of the Bayes-optimal rate under the limiting mixture as the
//! floor neither can beat.

use crate::error::{Error, Result};
use crate::mat::{cholesky_solve, dot, Mat};
use crate::rng;
use rand::Rng;
use rand_distr::StandardNormal;

/// K-means solution: centers row per cluster, a label per point, and the
/// within-cluster sum of squared distances.
#[derive(Clone, Debug)]
pub struct KMeans {
    pub centers: Mat,
    pub labels: Vec<usize>,
    pub objective: f64,
}

/// Weighted Gaussian mixture: component k has weight `weights[k]`, mean
/// row k of `means`, and covariance `covariances[k]`.
#[derive(Clone, Debug)]
pub struct GaussianMixture {
    pub weights: Vec<f64>,
    pub means: Mat,
    pub covariances: Vec<Mat>,
}

/// Result of an EM fit: the mixture, posterior argmax labels, and the
/// log-likelihood trace across iterations.
#[derive(Clone, Debug)]
pub struct GmmFit {
    pub mixture: GaussianMixture,
    pub labels: Vec<usize>,
    pub log_likelihood: f64,
    pub ll_trace: Vec<f64>,
    pub converged: bool,
}

impl GaussianMixture {
    /// Validating constructor for hand-built reference mixtures.
    pub fn new(weights: Vec<f64>, means: Mat, covariances: Vec<Mat>) -> Result<GaussianMixture> {
        let k = weights.len();
        let d = means.cols();
        if k == 0 || means.rows() != k || covariances.len() != k {
            return Err(Error::Domain("mixture component counts disagree".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::Domain("mixture weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("mixture weights sum to {total}")));
        }
        for (i, c) in covariances.iter().enumerate() {
            if c.rows() != d || c.cols() != d {
                return Err(Error::Domain(format!("component {i} covariance shape")));
            }
            let asym = c.sub(&c.transpose()).max_abs();
            if asym > 1e-10 * c.max_abs().max(1.0) {
                return Err(Error::Domain(format!(
                    "component {i} covariance asymmetric by {asym:.3e}"
                )));
            }
            if c.cholesky().is_none() {
                return Err(Error::Domain(format!(
                    "component {i} covariance is not positive definite"
                )));
            }
        }
        Ok(GaussianMixture {
            weights,
            means,
            covariances,
        })
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn d(&self) -> usize {
        self.means.cols()
    }
}

/// Lloyd's algorithm with k-means++ seeding, best of 10 restarts by
/// objective. Each restart runs to an assignment fixpoint or 300 rounds.
pub fn kmeans(points: &Mat, k: usize, seed: u64) -> Result<KMeans> {
    let n = points.rows();
    if k == 0 || k > n {
        return Err(Error::Domain(format!("k = {k} clusters for {n} points")));
    }
    if distinct_rows(points) < k {
        return Err(Error::DegeneratePoints(format!(
            "fewer than {k} distinct points"
        )));
    }
    let mut best: Option<KMeans> = None;
    for restart in 0..10 {
        let run = lloyd(points, k, rng::derive(seed, restart));
        if best.as_ref().is_none_or(|b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    Ok(best.unwrap())
}

/// Full-covariance EM initialized from k-means. Stops when the
/// log-likelihood gain drops below 1e-8 or after 500 iterations; hitting
/// the cap returns the fit with `converged` unset rather than an error.
pub fn gmm_em(points: &Mat, k: usize, seed: u64) -> Result<GmmFit> {
    let n = points.rows();
    let d = points.cols();
    if n < 10 * k {
        return Err(Error::Domain(format!(
            "{n} points cannot support {k} mixture components; need 10 per component"
        )));
    }
    let init = kmeans(points, k, seed)?;
    let mut weights = vec![0.0f64; k];
    let mut means = init.centers.clone();
    let mut covariances = Vec::with_capacity(k);
    for c in 0..k {
        let members: Vec<usize> = (0..n).filter(|&i| init.labels[i] == c).collect();
        weights[c] = members.len() as f64 / n as f64;
        let mut cov = Mat::zeros(d, d);
        for &i in &members {
            let row = points.row(i);
            for a in 0..d {
                for b in 0..d {
                    cov[(a, b)] += (row[a] - means[(c, a)]) * (row[b] - means[(c, b)]);
                }
            }
        }
        covariances.push(ridged(cov.scale(1.0 / members.len().max(1) as f64), c)?);
    }

    let mut resp = Mat::zeros(n, k);
    let mut ll_trace: Vec<f64> = Vec::new();
    let mut converged = false;
    for _ in 0..500 {
        let ll = e_step(points, &weights, &means, &covariances, &mut resp)?;
        if let Some(&prev) = ll_trace.last() {
            // EM cannot lower the observed likelihood; a drop means a bug.
            assert!(
                ll >= prev - 1e-9 * prev.abs().max(1.0),
                "log-likelihood fell from {prev} to {ll}"
            );
            if ll - prev < 1e-8 {
                ll_trace.push(ll);
                converged = true;
                break;
            }
        }
        ll_trace.push(ll);

        for c in 0..k {
            let nk: f64 = (0..n).map(|i| resp[(i, c)]).sum();
            if nk < 1e-10 {
                return Err(Error::DegeneratePoints(format!(
                    "component {c} lost all responsibility"
                )));
            }
            weights[c] = nk / n as f64;
            for j in 0..d {
                means[(c, j)] = (0..n).map(|i| resp[(i, c)] * points[(i, j)]).sum::<f64>() / nk;
            }
            let mut cov = Mat::zeros(d, d);
            for i in 0..n {
                let row = points.row(i);
                let r = resp[(i, c)];
                for a in 0..d {
                    for b in 0..d {
                        cov[(a, b)] += r * (row[a] - means[(c, a)]) * (row[b] - means[(c, b)]);
                    }
                }
            }
            covariances[c] = ridged(cov.scale(1.0 / nk), c)?;
        }
    }

    let labels = (0..n)
        .map(|i| {
            (0..k)
                .max_by(|&a, &b| resp[(i, a)].partial_cmp(&resp[(i, b)]).unwrap())
                .unwrap()
        })
        .collect();
    let log_likelihood = *ll_trace.last().unwrap();
    Ok(GmmFit {
        mixture: GaussianMixture {
            weights,
            means,
            covariances,
        },
        labels,
        log_likelihood,
        ll_trace,
        converged,
    })
}

/// Fraction of disagreeing labels, minimized over every relabeling of the
/// predicted side. Class count is inferred from the largest label seen.
pub fn misclassification(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(Error::Domain(format!(
            "label vectors of lengths {} and {}",
            pred.len(),
            truth.len()
        )));
    }
    let k = 1 + pred.iter().chain(truth).copied().max().unwrap();
    const MAX: usize = 8;
    if k > MAX {
        return Err(Error::TooManyClasses { k, max: MAX });
    }
    let mut confusion = vec![vec![0usize; k]; k];
    for (&p, &t) in pred.iter().zip(truth) {
        confusion[p][t] += 1;
    }
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best_hits = 0usize;
    permute(&mut perm, 0, &mut |p| {
        let hits: usize = (0..k).map(|c| confusion[c][p[c]]).sum();
        best_hits = best_hits.max(hits);
    });
    Ok(1.0 - best_hits as f64 / pred.len() as f64)
}

/// Monte Carlo estimate of the Bayes-optimal misclassification rate of the
/// mixture, with its binomial standard error. Draws a labeled point,
/// classifies it by largest weighted component density, and counts misses.
pub fn bayes_error(mixture: &GaussianMixture, n_mc: usize, seed: u64) -> Result<(f64, f64)> {
    if n_mc < 100_000 {
        return Err(Error::Domain(format!(
            "{n_mc} Monte Carlo draws; need at least 100000"
        )));
    }
    let k = mixture.k();
    let d = mixture.d();
    let factors: Vec<Mat> = mixture
        .covariances
        .iter()
        .enumerate()
        .map(|(c, cov)| {
            cov.cholesky().ok_or_else(|| {
                Error::Domain(format!("component {c} covariance is not positive definite"))
            })
        })
        .collect::<Result<_>>()?;
    // ln w_k − Σ ln L_ii; the shared −(d/2)ln 2π cancels in the argmax.
    let offsets: Vec<f64> = (0..k)
        .map(|c| mixture.weights[c].ln() - (0..d).map(|i| factors[c][(i, i)].ln()).sum::<f64>())
        .collect();
    let mut r = rng::stream(seed);
    let mut misses = 0usize;
    let mut diff = vec![0.0f64; d];
    for _ in 0..n_mc {
        let u: f64 = r.random();
        let mut acc = 0.0;
        let mut label = k - 1;
        for (c, &w) in mixture.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                label = c;
                break;
            }
        }
        let z: Vec<f64> = (0..d).map(|_| r.sample(StandardNormal)).collect();
        let l = &factors[label];
        let x: Vec<f64> = (0..d)
            .map(|i| mixture.means[(label, i)] + (0..=i).map(|j| l[(i, j)] * z[j]).sum::<f64>())
            .collect();
        let mut best = f64::NEG_INFINITY;
        let mut guess = 0;
        for c in 0..k {
            for (j, v) in diff.iter_mut().enumerate() {
                *v = x[j] - mixture.means[(c, j)];
            }
            let quad = dot(&diff, &cholesky_solve(&factors[c], &diff));
            let score = offsets[c] - 0.5 * quad;
            if score > best {
                best = score;
                guess = c;
            }
        }
        if guess != label {
            misses += 1;
        }
    }
    let p = misses as f64 / n_mc as f64;
    Ok((p, (p * (1.0 - p) / n_mc as f64).sqrt()))
}

/// One seeded Lloyd run to fixpoint.
fn lloyd(points: &Mat, k: usize, seed: u64) -> KMeans {
    let n = points.rows();
    let d = points.cols();
    let mut r = rng::stream(seed);
    let mut centers = plus_plus_seeding(points, k, &mut r);
    let mut labels = vec![0usize; n];
    let mut objective = f64::INFINITY;
    for _ in 0..300 {
        let mut changed = false;
        let mut new_objective = 0.0;
        for i in 0..n {
            let (c, dist) = nearest(points.row(i), &centers);
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
            new_objective += dist;
        }
        // Lloyd steps cannot raise the objective.
        assert!(new_objective <= objective * (1.0 + 1e-12) + 1e-12);
        objective = new_objective;
        if !changed && objective.is_finite() {
            break;
        }

        let mut counts = vec![0usize; k];
        let mut sums = Mat::zeros(k, d);
        for i in 0..n {
            counts[labels[i]] += 1;
            for j in 0..d {
                sums[(labels[i], j)] += points[(i, j)];
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // Revive an empty cluster at the point farthest from its
                // current center; that strictly lowers the objective.
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = sq_dist(points.row(a), centers.row(labels[a]));
                        let db = sq_dist(points.row(b), centers.row(labels[b]));
                        da.partial_cmp(&db).unwrap()
                    })
                    .unwrap();
                for j in 0..d {
                    centers[(c, j)] = points[(far, j)];
                }
            } else {
                for j in 0..d {
                    centers[(c, j)] = sums[(c, j)] / counts[c] as f64;
                }
            }
        }
    }
    // Final assignment against the last centers keeps labels and objective
    // consistent when the loop exits on the iteration cap.
    let mut final_objective = 0.0;
    for i in 0..n {
        let (c, dist) = nearest(points.row(i), &centers);
        labels[i] = c;
        final_objective += dist;
    }
    KMeans {
        centers,
        labels,
        objective: final_objective,
    }
}

fn plus_plus_seeding(points: &Mat, k: usize, r: &mut impl Rng) -> Mat {
    let n = points.rows();
    let d = points.cols();
    let mut centers = Mat::zeros(k, d);
    let first = r.random_range(0..n);
    for j in 0..d {
        centers[(0, j)] = points[(first, j)];
    }
    let mut dist: Vec<f64> = (0..n)
        .map(|i| sq_dist(points.row(i), centers.row(0)))
        .collect();
    for c in 1..k {
        let total: f64 = dist.iter().sum();
        let next = if total > 0.0 {
            let mut target = r.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in dist.iter().enumerate() {
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            r.random_range(0..n)
        };
        for j in 0..d {
            centers[(c, j)] = points[(next, j)];
        }
        for (i, slot) in dist.iter_mut().enumerate() {
            *slot = slot.min(sq_dist(points.row(i), centers.row(c)));
        }
    }
    centers
}

fn nearest(point: &[f64], centers: &Mat) -> (usize, f64) {
    let mut best = (0usize, f64::INFINITY);
    for c in 0..centers.rows() {
        let dist = sq_dist(point, centers.row(c));
        if dist < best.1 {
            best = (c, dist);
        }
    }
    best
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn distinct_rows(points: &Mat) -> usize {
    let n = points.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| points.row(a).partial_cmp(points.row(b)).unwrap());
    let mut count = n.min(1);
    for w in order.windows(2) {
        if points.row(w[0]) != points.row(w[1]) {
            count += 1;
        }
    }
    count
}

/// Adds the scaled-trace ridge that keeps covariances invertible through EM.
fn ridged(mut cov: Mat, component: usize) -> Result<Mat> {
    let d = cov.rows();
    let ridge = 1e-9 * cov.trace() / d as f64;
    for i in 0..d {
        cov[(i, i)] += ridge;
    }
    if cov.cholesky().is_none() {
        return Err(Error::DegeneratePoints(format!(
            "component {component} covariance is singular"
        )));
    }
    Ok(cov)
}

/// Fills responsibilities and returns the observed log-likelihood.
fn e_step(
    points: &Mat,
    weights: &[f64],
    means: &Mat,
    covariances: &[Mat],
    resp: &mut Mat,
) -> Result<f64> {
    let n = points.rows();
    let d = points.cols();
    let k = weights.len();
    let factors: Vec<Mat> = covariances
        .iter()
        .enumerate()
        .map(|(c, cov)| {
            cov.cholesky().ok_or_else(|| {
                Error::DegeneratePoints(format!("component {c} covariance is singular"))
            })
        })
        .collect::<Result<_>>()?;
    let half_log_2pi = 0.5 * d as f64 * (2.0 * std::f64::consts::PI).ln();
    let offsets: Vec<f64> = (0..k)
        .map(|c| {
            weights[c].ln() - (0..d).map(|i| factors[c][(i, i)].ln()).sum::<f64>() - half_log_2pi
        })
        .collect();
    let mut ll = 0.0;
    let mut diff = vec![0.0f64; d];
    let mut scores = vec![0.0f64; k];
    for i in 0..n {
        for c in 0..k {
            for (j, v) in diff.iter_mut().enumerate() {
                *v = points[(i, j)] - means[(c, j)];
            }
            let quad = dot(&diff, &cholesky_solve(&factors[c], &diff));
            scores[c] = offsets[c] - 0.5 * quad;
        }
        let top = scores.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let total: f64 = scores.iter().map(|s| (s - top).exp()).sum();
        for c in 0..k {
            resp[(i, c)] = (scores[c] - top).exp() / total;
        }
        ll += top + total.ln();
    }
    Ok(ll)
}

fn permute(perm: &mut Vec<usize>, depth: usize, visit: &mut impl FnMut(&[usize])) {
    if depth == perm.len() {
        visit(perm);
        return;
    }
    for i in depth..perm.len() {
        perm.swap(depth, i);
        permute(perm, depth + 1, visit);
        perm.swap(depth, i);
    }
}
