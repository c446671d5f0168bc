//! Orthogonal Procrustes: the rotation (possibly improper) that best maps
//! one point cloud onto another in Frobenius norm.

use super::{dense_symmetric_eigen, EigenPairs};
use crate::error::{Error, Result};
use crate::mat::Mat;

/// Returns the orthogonal W minimizing ‖Xhat·W − X‖_F.
///
/// W is the polar factor of XhatᵀX, extracted from the eigendecomposition of
/// the symmetric Jordan-Wielandt embedding [[0, C], [Cᵀ, 0]]: its positive
/// eigenvalues are the singular values of C and the halves of the matching
/// eigenvectors are the singular vector pairs.
pub fn procrustes(xhat: &Mat, x: &Mat) -> Result<Mat> {
    if xhat.rows() != x.rows() || xhat.cols() != x.cols() {
        return Err(Error::Domain(format!(
            "procrustes shape mismatch: {}x{} vs {}x{}",
            xhat.rows(),
            xhat.cols(),
            x.rows(),
            x.cols()
        )));
    }
    let d = x.cols();
    if d == 0 {
        return Err(Error::Domain("procrustes needs at least one column".into()));
    }
    let c = xhat.t_matmul(x);
    let mut jw = Mat::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            jw[(i, d + j)] = c[(i, j)];
            jw[(d + j, i)] = c[(i, j)];
        }
    }
    let eig = dense_symmetric_eigen(&jw)?;
    let sigma_max = eig.values[0];
    let sigma_min = eig.values[d - 1];
    if sigma_min <= 1e-12 * sigma_max.max(0.0) || sigma_max <= 0.0 {
        return Err(Error::RankDeficientCross);
    }
    let w = polar_from_pairs(&eig, d);
    // Orthogonality is a structural property of the construction; if it is
    // off, the eigensolve went wrong and the result cannot be trusted.
    let dev = w.t_matmul(&w).sub(&Mat::identity(d)).max_abs();
    if dev > 1e-10 {
        return Err(Error::NoConvergence {
            what: "procrustes orthogonality".into(),
            residuals: vec![dev],
        });
    }
    Ok(w)
}

fn polar_from_pairs(eig: &EigenPairs, d: usize) -> Mat {
    let mut w = Mat::zeros(d, d);
    for k in 0..d {
        // Unit eigenvector (u, v)/sqrt(2) for eigenvalue sigma_k; the factor
        // two restores u vᵀ from the halves.
        for i in 0..d {
            for j in 0..d {
                w[(i, j)] += 2.0 * eig.vectors[(i, k)] * eig.vectors[(d + j, k)];
            }
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_orthogonal;
    use crate::rng;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn random_mat(n: usize, d: usize, seed: u64) -> Mat {
        let mut r = rng::stream(seed);
        Mat::from_fn(n, d, |_, _| r.sample(StandardNormal))
    }

    #[test]
    fn recovers_a_planted_rotation_exactly() {
        for seed in 0..4u64 {
            let x = random_mat(40, 3, 10 + seed);
            let mut r = rng::stream(900 + seed);
            let q = random_orthogonal(3, &mut r);
            // xhat = x Qᵀ, so xhat Q = x and the minimizer is Q itself.
            let xhat = x.matmul_t(&q);
            let w = procrustes(&xhat, &x).unwrap();
            assert!(w.sub(&q).max_abs() < 1e-10, "seed {seed}");
            assert!(xhat.matmul(&w).sub(&x).frob_norm() < 1e-10);
        }
    }

    #[test]
    fn beats_random_orthogonal_candidates() {
        // Independent check of optimality: no sampled orthogonal matrix may
        // do better than the closed-form alignment.
        let x = random_mat(30, 2, 77);
        let xhat = random_mat(30, 2, 78);
        let w = procrustes(&xhat, &x).unwrap();
        let best = xhat.matmul(&w).sub(&x).frob_norm();
        let mut r = rng::stream(79);
        for _ in 0..1000 {
            let q = random_orthogonal(2, &mut r);
            let obj = xhat.matmul(&q).sub(&x).frob_norm();
            assert!(best <= obj + 1e-10, "random candidate beat procrustes");
        }
    }

    #[test]
    fn result_is_orthogonal() {
        let x = random_mat(25, 4, 5);
        let xhat = random_mat(25, 4, 6);
        let w = procrustes(&xhat, &x).unwrap();
        let dev = w.t_matmul(&w).sub(&Mat::identity(4)).max_abs();
        assert!(dev < 1e-10);
    }

    #[test]
    fn detects_rank_deficient_cross_product() {
        // Second column identically zero makes XhatᵀX singular.
        let x = random_mat(20, 2, 1);
        let mut xhat = random_mat(20, 2, 2);
        for i in 0..20 {
            xhat[(i, 1)] = 0.0;
        }
        assert!(matches!(
            procrustes(&xhat, &x),
            Err(Error::RankDeficientCross)
        ));
    }

    #[test]
    fn handles_reflections() {
        let x = random_mat(15, 2, 21);
        let refl = Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]);
        let xhat = x.matmul_t(&refl);
        let w = procrustes(&xhat, &x).unwrap();
        assert!(xhat.matmul(&w).sub(&x).frob_norm() < 1e-10);
    }
}
