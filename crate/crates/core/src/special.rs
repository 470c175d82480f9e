//! Standard normal primitives and the inverse of the integrated normal CDF.
//!
//! `f_int_cdf(x) = x Phi(x) + phi(x)` is the antiderivative of `Phi` that
//! vanishes at minus infinity. It is a convex, increasing bijection of the
//! real line onto `(0, inf)`, and `psi` is its inverse.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use thiserror::Error;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum DomainError {
    #[error("probability {0} is outside (0, 1)")]
    Probability(f64),
    #[error("argument {0} must be strictly positive")]
    NonPositive(f64),
}

/// Standard normal density.
pub fn phi(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF, accurate in relative terms deep into the lower tail.
#[allow(non_snake_case)]
pub fn Phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Inverse of the standard normal CDF.
pub fn quantile(p: f64) -> Result<f64, DomainError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(DomainError::Probability(p));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    // Work with the smaller tail; 1 - p is exact for p in [0.5, 1).
    let (tail, sign) = if p < 0.5 { (p, -1.0) } else { (1.0 - p, 1.0) };
    let t = (-2.0 * tail.ln()).sqrt();
    let num = 2.515_517 + t * (0.802_853 + t * 0.010_328);
    let den = 1.0 + t * (1.432_788 + t * (0.189_269 + t * 0.001_308));
    let mut u = (t - num / den).max(0.0);
    // Newton on ln Phi(-u) - ln tail, which is concave and decreasing in u.
    let ln_tail = tail.ln();
    for _ in 0..50 {
        let upper = Phi(-u);
        let g = upper.ln() - ln_tail;
        let step = g * upper / phi(u);
        u += step;
        if step.abs() <= 1e-15 * u.max(1.0) {
            break;
        }
    }
    Ok(sign * u)
}

/// `E[(Z - u)^+]` for `u >= 0`, evaluated without cancellation.
fn normal_stop_loss(u: f64) -> f64 {
    if u < 2.0 {
        phi(u) - u * Phi(-u)
    } else {
        SQRT_2 * Phi(-u) * ierfc_ratio(u * FRAC_1_SQRT_2)
    }
}

/// Ratio `i erfc(z) / erfc(z)` by modified Lentz on its continued fraction
/// `1 / (2z + 4 / (2z + 6 / (2z + ...)))`. Intended for `z >= sqrt(2)`.
fn ierfc_ratio(z: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let b = 2.0 * z;
    let mut f = b;
    let mut c = f;
    let mut d = 0.0;
    for j in 1..10_000 {
        let a = 2.0 * (j as f64 + 1.0);
        d = b + a * d;
        if d == 0.0 {
            d = TINY;
        }
        c = b + a / c;
        if c == 0.0 {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

/// `E[(Z - u)^+] / P(Z > u)` for `u >= 0`; the mean excess of a standard
/// normal above `u`. Finite for all `u` even when both factors underflow.
pub(crate) fn mean_excess(u: f64) -> f64 {
    if u < 2.0 {
        normal_stop_loss(u) / Phi(-u)
    } else {
        SQRT_2 * ierfc_ratio(u * FRAC_1_SQRT_2)
    }
}

/// `f(x) = x Phi(x) + phi(x)`, the integral of `Phi` over `(-inf, x]`.
pub fn f_int_cdf(x: f64) -> f64 {
    if x >= 0.0 {
        x + normal_stop_loss(x)
    } else {
        normal_stop_loss(-x)
    }
}

/// Inverse of [`f_int_cdf`] on `(0, inf)`.
pub fn psi(y: f64) -> Result<f64, DomainError> {
    if !(y > 0.0) {
        return Err(DomainError::NonPositive(y));
    }
    Ok(psi_unchecked(y))
}

/// [`psi`] for callers that have already established `y > 0`.
/// Returns `+inf` for `y = +inf`.
pub(crate) fn psi_unchecked(y: f64) -> f64 {
    if y == f64::INFINITY {
        return f64::INFINITY;
    }
    let ln_y = y.ln();
    let f0 = INV_SQRT_2PI;
    let mut hi = y.max(0.0) + 1.0;
    let (mut lo, mut x) = if y >= f0 {
        // f(x) >= x and f(x) - x = f(-x) <= f(0) keep the root in [y - 1, y].
        let guess = if y > 2.0 { y } else { y - f0 * (-y).exp() };
        (y - 1.0, guess)
    } else {
        // f(-u) ~ phi(u) / u^2 as u grows.
        let mut u: f64 = (-2.0 * ln_y).sqrt().max(1.0);
        for _ in 0..3 {
            let arg = 2.0 * (-ln_y - LN_SQRT_2PI - 2.0 * u.ln());
            if arg > 0.0 {
                u = arg.sqrt().max(1e-3);
            }
        }
        (-40.0, -u)
    };
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let fx = f_int_cdf(x);
        let g = fx.ln() - ln_y;
        if g == 0.0 {
            return x;
        }
        if g < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        // d/dx ln f = Phi / f.
        let mut xn = x - g * fx / Phi(x);
        if !(xn > lo && xn < hi) {
            xn = 0.5 * (lo + hi);
        }
        if (xn - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            return xn;
        }
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(1.0) {
            return 0.5 * (lo + hi);
        }
        x = xn;
    }
    x
}

/// `Phi(psi(y))`, with the limit 1 at `y = +inf`.
pub(crate) fn cdf_of_psi(y: f64) -> f64 {
    if y == f64::INFINITY {
        1.0
    } else {
        Phi(psi_unchecked(y))
    }
}

/// `int_0^b psi(y) dy`, in the cancellation-free form
/// `(b psi(b) - Phi(psi(b))) / 2`.
pub fn int_psi(b: f64) -> Result<f64, DomainError> {
    if !(b > 0.0) {
        return Err(DomainError::NonPositive(b));
    }
    let a = psi_unchecked(b);
    Ok(0.5 * (b * a - Phi(a)))
}
