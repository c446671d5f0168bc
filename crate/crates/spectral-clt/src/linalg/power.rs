//! Spectral norm (largest absolute eigenvalue) of a symmetric operator by
//! power iteration with an Aitken-style stopping rule.

use super::SymOp;
use crate::mat::norm2;
use crate::rng;
use rand::Rng;
use rand_distr::StandardNormal;

/// Estimates ‖M‖₂ = max |λ|. Stops once the extrapolated remaining error of
/// the Rayleigh-norm sequence drops below tol·max(1, estimate), or after
/// `max_iter` applications, whichever comes first. The estimate converges
/// from below at rate (|λ₂|/|λ₁|)²; near-ties in magnitude are benign
/// because the value error is then bounded by the tie gap itself.
pub fn spectral_norm(op: &dyn SymOp, tol: f64, max_iter: usize, seed: u64) -> f64 {
    let n = op.dim();
    if n == 0 {
        return 0.0;
    }
    let mut r = rng::stream(rng::derive(seed, 0x506F_7765));
    let mut v: Vec<f64> = (0..n).map(|_| r.sample(StandardNormal)).collect();
    let s = norm2(&v);
    if s == 0.0 {
        return 0.0;
    }
    for x in &mut v {
        *x /= s;
    }

    let mut w = vec![0.0f64; n];
    let mut theta_prev = 0.0f64;
    let mut delta_prev = f64::INFINITY;
    for it in 0..max_iter {
        op.apply(&v, &mut w);
        let theta = norm2(&w);
        if theta == 0.0 {
            // v is (numerically) in the kernel; for a zero operator this is
            // the answer, otherwise the iterate has collapsed and the norm
            // estimate so far is the best available.
            return theta_prev;
        }
        for (x, y) in v.iter_mut().zip(&w) {
            *x = y / theta;
        }
        let delta = (theta - theta_prev).abs();
        if it >= 2 {
            if delta == 0.0 {
                return theta;
            }
            let r2 = delta / delta_prev;
            if r2 < 1.0 {
                let remaining = delta * r2 / (1.0 - r2);
                if remaining <= 0.5 * tol * theta.max(1.0) {
                    return theta + remaining;
                }
            }
        }
        theta_prev = theta;
        delta_prev = delta.max(f64::MIN_POSITIVE);
    }
    theta_prev
}
