//! Symmetric eigensolvers and alignment tools.
//!
//! Two routes to eigenpairs are kept deliberately independent: a dense cyclic
//! Jacobi solver ([`dense_symmetric_eigen`]) that serves as the slow reference,
//! and a Lanczos iteration ([`top_eigenpairs`]) for large operators that is
//! tested against it. Don't merge them; the disagreement check is the point.

mod jacobi;
mod lanczos;
mod power;
mod procrustes;

pub use jacobi::dense_symmetric_eigen;
pub use lanczos::{top_algebraic_eigenpairs, top_eigenpairs};
pub use power::spectral_norm;
pub use procrustes::procrustes;

use crate::mat::Mat;
use rand::Rng;
use rand_distr::StandardNormal;

/// Eigenvalues with their eigenvectors as matrix columns. Ordering is
/// documented by the producing routine: descending by value from the dense
/// solver, descending by magnitude from the iterative one. Each eigenvector
/// is sign-fixed so its largest-magnitude entry is positive.
#[derive(Clone, Debug)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// One column per value, same order.
    pub vectors: Mat,
}

/// Symmetric linear operator given by its matrix-vector product. Shared
/// read-only across worker threads, hence `Sync`.
pub trait SymOp: Sync {
    fn dim(&self) -> usize;
    /// y = M x. The implementation must be symmetric as a linear map.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl SymOp for Mat {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y);
    }
}

/// Flips each column so its largest-magnitude entry (first such index on
/// ties) is positive. Normalizes nothing.
pub(crate) fn fix_column_signs(m: &mut Mat) {
    for j in 0..m.cols() {
        let mut best = 0usize;
        let mut best_abs = 0.0f64;
        for i in 0..m.rows() {
            let a = m[(i, j)].abs();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if m[(best, j)] < 0.0 {
            for i in 0..m.rows() {
                m[(i, j)] = -m[(i, j)];
            }
        }
    }
}

/// Haar-ish random orthogonal matrix: Gram-Schmidt on a Gaussian square
/// matrix. Covers reflections as well as rotations.
pub fn random_orthogonal(d: usize, rng: &mut impl Rng) -> Mat {
    assert!(d >= 1);
    loop {
        let g = Mat::from_fn(d, d, |_, _| rng.sample(StandardNormal));
        if let Some(q) = gram_schmidt_columns(&g) {
            return q;
        }
        // Degenerate draw; try again. Probability zero in theory.
    }
}

fn gram_schmidt_columns(g: &Mat) -> Option<Mat> {
    let d = g.rows();
    let mut cols: Vec<Vec<f64>> = (0..d).map(|j| g.col(j)).collect();
    for j in 0..d {
        for _ in 0..2 {
            for i in 0..j {
                let (head, tail) = cols.split_at_mut(j);
                let (prev, cur) = (&head[i], &mut tail[0]);
                let c = crate::mat::dot(cur, prev);
                for (x, y) in cur.iter_mut().zip(prev) {
                    *x -= c * y;
                }
            }
        }
        let nrm = crate::mat::norm2(&cols[j]);
        if nrm < 1e-12 {
            return None;
        }
        for x in &mut cols[j] {
            *x /= nrm;
        }
    }
    Some(Mat::from_fn(d, d, |i, j| cols[j][i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn random_orthogonal_is_orthogonal() {
        let mut r = rng::stream(11);
        for d in [1, 2, 3, 5] {
            let q = random_orthogonal(d, &mut r);
            let dev = q.t_matmul(&q).sub(&Mat::identity(d)).max_abs();
            assert!(dev < 1e-12, "d={d} dev={dev}");
        }
    }

    #[test]
    fn sign_fix_makes_largest_entry_positive() {
        let mut m = Mat::from_rows(&[vec![0.1, -0.9], vec![-0.8, 0.2]]);
        fix_column_signs(&mut m);
        assert_eq!(m.row(0), &[-0.1, 0.9]);
        assert_eq!(m.row(1), &[0.8, -0.2]);
    }
}
