//! Dense symmetric eigensolver: cyclic Jacobi rotations until the
//! off-diagonal Frobenius mass is negligible. Quadratically convergent,
//! simple to audit, and the reference the Lanczos path is tested against.

use super::{fix_column_signs, EigenPairs};
use crate::error::{Error, Result};
use crate::mat::Mat;

/// Size guard: Jacobi is O(n^3) per sweep and this solver exists for
/// moderate matrices (projected blocks, oracle tests), not graph adjacency.
pub const MAX_DENSE_N: usize = 2000;

const MAX_SWEEPS: usize = 64;

/// Full eigendecomposition of a symmetric matrix. Eigenvalues descending;
/// eigenvectors are the matching columns, sign-fixed so each column's
/// largest-magnitude entry is positive.
pub fn dense_symmetric_eigen(m: &Mat) -> Result<EigenPairs> {
    if !m.is_square() {
        return Err(Error::Domain(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n > MAX_DENSE_N {
        return Err(Error::TooLarge {
            n,
            max: MAX_DENSE_N,
        });
    }
    let scale = m.frob_norm();
    let sym_tol = 1e-12 * scale.max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > sym_tol {
                return Err(Error::NotSymmetric(format!(
                    "entries ({i},{j}) and ({j},{i}) differ by {:e}",
                    (m[(i, j)] - m[(j, i)]).abs()
                )));
            }
        }
    }

    let mut a = m.clone();
    // Work on the exactly symmetric average so tiny input asymmetry cannot
    // drift through the rotations.
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let mut v = Mat::identity(n);
    let off_tol = 1e-12 * scale;
    // Rotations below this threshold are deferred to a later sweep.
    let skip = if n > 1 { off_tol / n as f64 } else { 0.0 };

    let mut converged = scale == 0.0 || n == 1;
    for _sweep in 0..MAX_SWEEPS {
        if off_norm(&a) <= off_tol {
            converged = true;
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= skip {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s, t);
            }
        }
    }
    if !converged && off_norm(&a) > off_tol {
        return Err(Error::NoConvergence {
            what: "jacobi sweep limit".into(),
            residuals: vec![off_norm(&a)],
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Mat::from_fn(n, n, |i, j| v[(i, order[j])]);
    fix_column_signs(&mut vectors);
    Ok(EigenPairs { values, vectors })
}

fn off_norm(a: &Mat) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += 2.0 * a[(i, j)] * a[(i, j)];
        }
    }
    s.sqrt()
}

/// One Jacobi rotation zeroing a[(p,q)], applied symmetrically, with the
/// eigenvector accumulator updated in step.
fn rotate(a: &mut Mat, v: &mut Mat, p: usize, q: usize, c: f64, s: f64, t: f64) {
    let n = a.rows();
    let apq = a[(p, q)];
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    a[(p, p)] = app - t * apq;
    a[(q, q)] = aqq + t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for i in 0..n {
        if i != p && i != q {
            let aip = a[(i, p)];
            let aiq = a[(i, q)];
            a[(i, p)] = c * aip - s * aiq;
            a[(p, i)] = a[(i, p)];
            a[(i, q)] = s * aip + c * aiq;
            a[(q, i)] = a[(i, q)];
        }
    }
    for i in 0..n {
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = c * vip - s * viq;
        v[(i, q)] = s * vip + c * viq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn random_symmetric(n: usize, seed: u64) -> Mat {
        let mut r = rng::stream(seed);
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let x: f64 = r.sample(StandardNormal);
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
        m
    }

    fn reassembly_error(m: &Mat, e: &EigenPairs) -> f64 {
        let n = m.rows();
        let mut rebuilt = Mat::zeros(n, n);
        for k in 0..e.values.len() {
            let lam = e.values[k];
            for i in 0..n {
                for j in 0..n {
                    rebuilt[(i, j)] += lam * e.vectors[(i, k)] * e.vectors[(j, k)];
                }
            }
        }
        rebuilt.sub(m).frob_norm()
    }

    #[test]
    fn diagonal_matrix_is_exact() {
        let m = Mat::from_rows(&[
            vec![3.0, 0.0, 0.0],
            vec![0.0, -1.0, 0.0],
            vec![0.0, 0.0, 7.0],
        ]);
        let e = dense_symmetric_eigen(&m).unwrap();
        assert_eq!(e.values, vec![7.0, 3.0, -1.0]);
        // Eigenvectors are signed unit basis vectors.
        assert_eq!(e.vectors[(2, 0)], 1.0);
        assert_eq!(e.vectors[(0, 1)], 1.0);
        assert_eq!(e.vectors[(1, 2)], 1.0);
    }

    #[test]
    fn two_by_two_hand_check() {
        let m = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let e = dense_symmetric_eigen(&m).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let r = 0.5f64.sqrt();
        assert!((e.vectors[(0, 0)] - r).abs() < 1e-14);
        assert!((e.vectors[(1, 0)] - r).abs() < 1e-14);
        // Tie in magnitudes: the first maximal entry gets the positive sign.
        assert!((e.vectors[(0, 1)] - r).abs() < 1e-14);
        assert!((e.vectors[(1, 1)] + r).abs() < 1e-14);
    }

    #[test]
    fn random_matrices_reassemble() {
        for (i, n) in [2usize, 5, 20, 60].iter().enumerate() {
            let m = random_symmetric(*n, 100 + i as u64);
            let e = dense_symmetric_eigen(&m).unwrap();
            let scale = m.frob_norm();
            assert!(
                reassembly_error(&m, &e) <= 1e-10 * scale.max(1.0),
                "n={n} reassembly error too large"
            );
            let dev = e
                .vectors
                .t_matmul(&e.vectors)
                .sub(&Mat::identity(*n))
                .max_abs();
            assert!(dev < 1e-10, "n={n} eigenvectors not orthonormal: {dev}");
            for w in e.values.windows(2) {
                assert!(w[0] >= w[1], "values not descending");
            }
        }
    }

    #[test]
    fn repeated_eigenvalues_still_reassemble() {
        // I + rank-1: eigenvalues {1+3, 1, 1, 1} with a triple eigenvalue.
        let n = 4;
        let u = [0.5f64; 4];
        let mut m = Mat::identity(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += 3.0 * u[i] * u[j];
            }
        }
        let e = dense_symmetric_eigen(&m).unwrap();
        assert!((e.values[0] - 4.0).abs() < 1e-12);
        for k in 1..4 {
            assert!((e.values[k] - 1.0).abs() < 1e-12);
        }
        assert!(reassembly_error(&m, &e) < 1e-12);
    }

    #[test]
    fn zero_matrix_converges_immediately() {
        let e = dense_symmetric_eigen(&Mat::zeros(5, 5)).unwrap();
        assert!(e.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_asymmetric_input() {
        let m = Mat::from_rows(&[vec![1.0, 0.5], vec![0.2, 1.0]]);
        assert!(matches!(
            dense_symmetric_eigen(&m),
            Err(Error::NotSymmetric(_))
        ));
    }

    #[test]
    fn rejects_oversized_input() {
        let m = Mat::zeros(MAX_DENSE_N + 1, MAX_DENSE_N + 1);
        assert!(matches!(
            dense_symmetric_eigen(&m),
            Err(Error::TooLarge { .. })
        ));
    }
}
