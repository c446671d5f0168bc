//! Lanczos for the leading eigenpairs of a symmetric operator, selected
//! either by magnitude or by algebraic value.
//!
//! Full reorthogonalization (two Gram-Schmidt passes against the whole
//! basis) keeps the projected matrix trustworthy, so we store it densely and
//! eigendecompose it with the Jacobi solver whenever a convergence check is
//! due. When the basis hits its cap the iteration thick-restarts: the best
//! Ritz vectors plus the current residual direction seed the next basis.

use super::{dense_symmetric_eigen, fix_column_signs, EigenPairs, SymOp};
use crate::error::{Error, Result};
use crate::mat::{dot, norm2, Mat};
use crate::rng;
use rand::Rng;
use rand_distr::StandardNormal;

/// Requesting more pairs than this is a sign the dense solver is the right
/// tool; the basis cap 4k+20 also stops making sense beyond it.
pub const MAX_K: usize = 64;

/// Top-k eigenpairs by magnitude. `tol` bounds the accepted Ritz residual
/// relative to max(1, |theta|); `max_restarts` caps the number of basis
/// builds (5 is ample for the large-gap operators this crate produces).
/// The start vector is drawn from `seed`; a start that lands in an invariant
/// subspace too small to hold k pairs is retried with fresh seeds three
/// times before giving up with `DegenerateStart`.
pub fn top_eigenpairs(
    op: &dyn SymOp,
    k: usize,
    tol: f64,
    max_restarts: usize,
    seed: u64,
) -> Result<EigenPairs> {
    solve(op, k, tol, max_restarts, seed, Sel::Magnitude)
}

/// Top-k eigenpairs by algebraic value, largest first. The spectral
/// embedding wants the leading positive eigenvalues, and at moderate n the
/// most negative eigenvalue of a sampled adjacency can out-magnitude the
/// smallest of them; value ordering sidesteps that race. Same contract as
/// `top_eigenpairs` otherwise.
pub fn top_algebraic_eigenpairs(
    op: &dyn SymOp,
    k: usize,
    tol: f64,
    max_restarts: usize,
    seed: u64,
) -> Result<EigenPairs> {
    solve(op, k, tol, max_restarts, seed, Sel::Algebraic)
}

fn solve(
    op: &dyn SymOp,
    k: usize,
    tol: f64,
    max_restarts: usize,
    seed: u64,
    sel: Sel,
) -> Result<EigenPairs> {
    let n = op.dim();
    if k == 0 || k > n.min(MAX_K) {
        return Err(Error::Domain(format!(
            "k = {k} outside 1..=min(n, {MAX_K}) for n = {n}"
        )));
    }
    if !(tol > 0.0) || max_restarts == 0 {
        return Err(Error::Domain(
            "tol must be positive and max_restarts >= 1".into(),
        ));
    }

    for attempt in 0..4u64 {
        match run(
            op,
            k,
            tol,
            max_restarts,
            rng::derive(seed, 0x4C61_6E63 ^ attempt),
            sel,
        ) {
            Outcome::Done(pairs) => return Ok(pairs),
            Outcome::EarlyBreakdown => continue,
            Outcome::NoConvergence(residuals) => {
                return Err(Error::NoConvergence {
                    what: "lanczos".into(),
                    residuals,
                })
            }
        }
    }
    Err(Error::DegenerateStart)
}

#[derive(Clone, Copy)]
enum Sel {
    Magnitude,
    Algebraic,
}

impl Sel {
    /// Indices of the `count` best values under this ordering, best first.
    /// Magnitude ties break toward the algebraically larger value.
    fn pick(self, values: &[f64], count: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..values.len()).collect();
        match self {
            Sel::Magnitude => idx.sort_by(|&a, &b| {
                values[b]
                    .abs()
                    .partial_cmp(&values[a].abs())
                    .unwrap()
                    .then(values[b].partial_cmp(&values[a]).unwrap())
            }),
            Sel::Algebraic => idx.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap()),
        }
        idx.truncate(count);
        idx
    }
}

enum Outcome {
    Done(EigenPairs),
    /// The Krylov space closed before holding k directions.
    EarlyBreakdown,
    NoConvergence(Vec<f64>),
}

fn run(op: &dyn SymOp, k: usize, tol: f64, max_restarts: usize, seed: u64, sel: Sel) -> Outcome {
    let n = op.dim();
    let m = (4 * k + 20).min(n);
    // Checking convergence means an O(b^3) small eigensolve; do it every
    // step for small bases, sparsely for big ones.
    let check_every = if m <= 64 { 1 } else { 8 };

    let mut r = rng::stream(seed);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut h = Mat::zeros(m, m);
    let mut start: Vec<f64> = (0..n).map(|_| r.sample(StandardNormal)).collect();
    let s = norm2(&start);
    if s == 0.0 {
        return Outcome::EarlyBreakdown;
    }
    for x in &mut start {
        *x /= s;
    }
    basis.push(start);

    let mut builds = 1usize;
    let mut w = vec![0.0f64; n];
    loop {
        let b = basis.len();
        op.apply(basis.last().unwrap(), &mut w);
        let w_scale = norm2(&w);
        for _pass in 0..2 {
            for (i, vi) in basis.iter().enumerate() {
                let c = dot(vi, &w);
                if c != 0.0 {
                    for (x, y) in w.iter_mut().zip(vi) {
                        *x -= c * y;
                    }
                    h[(i, b - 1)] += c;
                }
            }
        }
        for i in 0..b.saturating_sub(1) {
            h[(b - 1, i)] = h[(i, b - 1)];
        }
        let beta = norm2(&w);
        let breakdown = beta <= 1e-12 * w_scale.max(1.0);

        let check_due = breakdown || b == m || (b >= k && b % check_every == 0);
        if check_due && b >= k {
            let hb = Mat::from_fn(b, b, |i, j| h[(i, j)]);
            let eig = dense_symmetric_eigen(&hb).expect("projected block is symmetric");
            let best = sel.pick(&eig.values, k);
            let converged = best.iter().all(|&i| {
                let theta = eig.values[i];
                (beta * eig.vectors[(b - 1, i)]).abs() <= tol * theta.abs().max(1.0)
            });
            if converged || breakdown {
                if let Some(pairs) = finalize(op, &basis, &eig, &best, tol) {
                    return Outcome::Done(pairs);
                }
                if breakdown {
                    return Outcome::EarlyBreakdown;
                }
                // Estimates lied; fall through and keep iterating.
            }
            if b == m && !breakdown {
                if builds >= max_restarts {
                    let residuals = best
                        .iter()
                        .map(|&i| (beta * eig.vectors[(b - 1, i)]).abs())
                        .collect();
                    return Outcome::NoConvergence(residuals);
                }
                builds += 1;
                restart(&mut basis, &mut h, &eig, &w, beta, k, m, sel);
                continue;
            }
        }
        if breakdown {
            // Invariant subspace smaller than k.
            return Outcome::EarlyBreakdown;
        }
        let mut next = w.clone();
        for x in &mut next {
            *x /= beta;
        }
        basis.push(next);
    }
}

/// Keep the best Ritz vectors plus the residual direction; the projected
/// matrix restarts as diag(theta) and the couplings to the residual column
/// refill themselves on the next extension.
#[allow(clippy::too_many_arguments)]
fn restart(
    basis: &mut Vec<Vec<f64>>,
    h: &mut Mat,
    eig: &EigenPairs,
    w: &[f64],
    beta: f64,
    k: usize,
    m: usize,
    sel: Sel,
) {
    let keep = sel.pick(&eig.values, (k + 8).min(m - 2).max(k));
    let mut new_basis: Vec<Vec<f64>> = keep
        .iter()
        .map(|&i| combine(basis, &eig.vectors, i))
        .collect();
    let mut res = w.to_vec();
    for x in &mut res {
        *x /= beta;
    }
    new_basis.push(res);
    *basis = new_basis;
    *h = Mat::zeros(m, m);
    for (pos, &i) in keep.iter().enumerate() {
        h[(pos, pos)] = eig.values[i];
    }
}

fn combine(basis: &[Vec<f64>], y: &Mat, col: usize) -> Vec<f64> {
    let n = basis[0].len();
    let mut z = vec![0.0f64; n];
    for (j, vj) in basis.iter().enumerate() {
        let c = y[(j, col)];
        if c != 0.0 {
            for (zi, vi) in z.iter_mut().zip(vj) {
                *zi += c * vi;
            }
        }
    }
    let s = norm2(&z);
    if s > 0.0 {
        for x in &mut z {
            *x /= s;
        }
    }
    z
}

/// Assembles the selected Ritz vectors and accepts them only if the explicit
/// residual of every pair meets the documented bound.
fn finalize(
    op: &dyn SymOp,
    basis: &[Vec<f64>],
    eig: &EigenPairs,
    sel: &[usize],
    tol: f64,
) -> Option<EigenPairs> {
    let n = basis[0].len();
    let values: Vec<f64> = sel.iter().map(|&i| eig.values[i]).collect();
    let theta_max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let bound = tol * theta_max.max(1.0);
    let mut vectors = Mat::zeros(n, sel.len());
    let mut av = vec![0.0f64; n];
    for (c, &i) in sel.iter().enumerate() {
        let z = combine(basis, &eig.vectors, i);
        op.apply(&z, &mut av);
        let mut res = 0.0f64;
        for (a, zi) in av.iter().zip(&z) {
            let d = a - eig.values[i] * zi;
            res += d * d;
        }
        // Tenfold slack over the estimate-based stop; the estimate tracks
        // the true residual to a few ulps under full reorthogonalization.
        if res.sqrt() > 10.0 * bound {
            return None;
        }
        for (row, zi) in z.iter().enumerate() {
            vectors[(row, c)] = *zi;
        }
    }
    fix_column_signs(&mut vectors);
    Some(EigenPairs { values, vectors })
}
