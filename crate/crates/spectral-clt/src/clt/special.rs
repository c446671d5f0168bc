//! Special functions for the distributional diagnostics: the regularized
//! lower incomplete gamma function and the error-function and chi-square
//! CDFs built on it.
//!
//! Every shape parameter used here is a half-integer (chi-square with d
//! degrees of freedom needs a = d/2, the error function needs a = 1/2), so
//! the gamma-function constant comes from the recurrence off Γ(1/2) = √π
//! and Γ(1) = 1 exactly, with no general log-gamma approximation involved.

use std::f64::consts::PI;

/// ln Γ(a) for a = twice_a / 2, by recurrence. Exact to rounding.
fn ln_gamma_half(twice_a: u32) -> f64 {
    debug_assert!(twice_a >= 1);
    let (mut a, mut ln) = if twice_a % 2 == 1 {
        (0.5, 0.5 * PI.ln())
    } else {
        (1.0, 0.0)
    };
    let target = f64::from(twice_a) / 2.0;
    while a + 0.5 <= target {
        ln += a.ln();
        a += 1.0;
    }
    ln
}

/// Regularized lower incomplete gamma P(a, x) with a = twice_a / 2.
///
/// Series below the x = a + 1 crossover, Lentz continued fraction above it;
/// both run until the running term is at rounding level, well inside 1e-12.
fn gammp_half(twice_a: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let a = f64::from(twice_a) / 2.0;
    let prefactor = (-x + a * x.ln() - ln_gamma_half(twice_a)).exp();
    if x < a + 1.0 {
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..500 {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        (sum * prefactor).min(1.0)
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (1.0 - prefactor * h).max(0.0)
    }
}

/// Error function, via erf(x) = sign(x) P(1/2, x²).
pub fn erf(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let p = gammp_half(1, x * x);
    if x > 0.0 {
        p
    } else {
        -p
    }
}

/// CDF of a centered normal with the given variance.
pub fn normal_cdf(x: f64, variance: f64) -> f64 {
    debug_assert!(variance > 0.0);
    0.5 * (1.0 + erf(x / (2.0 * variance).sqrt()))
}

/// Chi-square CDF with d degrees of freedom: P(d/2, q/2).
pub fn chisq_cdf(q: f64, d: usize) -> f64 {
    debug_assert!(d >= 1);
    if q <= 0.0 {
        return 0.0;
    }
    gammp_half(d as u32, q / 2.0)
}
