//! Modified Bessel functions of the first kind (orders 0 and 1), the mean
//! resultant ratio `A1(k) = I1(k) / I0(k)` and its inverse.
//!
//! Below [`SERIES_LIMIT`] both functions are summed from their power series,
//! which has only positive terms and is accurate to a few ulps. Above it the
//! exponentially scaled Hankel expansion is used, truncated at its smallest
//! term. `A1` is always formed from the scaled values, so it is finite for any
//! finite argument.

use crate::error::{Error, Result};
use core::f64::consts::PI;

/// Arguments below this use the power series.
pub const SERIES_LIMIT: f64 = 15.0;

/// Residual tolerance `|A1(k) - r| <= A1_INVERSE_TOL` for [`a1_inverse`].
pub const A1_INVERSE_TOL: f64 = 1e-10;

fn check_arg(what: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain { what, value: x })
    }
}

fn series_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > 0.5 * f64::EPSILON * sum {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

/// `I1(x) / x` from its series, well defined at zero.
fn series_i1_over_x(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 0.5;
    let mut sum = 0.5;
    let mut k = 1.0;
    while term > 0.5 * f64::EPSILON * sum {
        term *= q / (k * (k + 1.0));
        sum += term;
        k += 1.0;
    }
    sum
}

/// Hankel sum `sum_k (-1)^k a_k(order) / x^k`; multiply by `1/sqrt(2 pi x)`
/// to obtain `e^{-x} I_order(x)`.
fn hankel_sum(order: u32, x: f64) -> f64 {
    let mu = 4.0 * f64::from(order * order);
    let mut term = 1.0_f64;
    let mut sum = 1.0;
    for k in 1..=80u32 {
        let odd = f64::from(2 * k - 1);
        let next = term * -(mu - odd * odd) / (f64::from(k) * 8.0 * x);
        // asymptotic: stop at the smallest term
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() <= 0.5 * f64::EPSILON * sum.abs() {
            break;
        }
    }
    sum
}

fn hankel_prefactor(x: f64) -> f64 {
    1.0 / libm::sqrt(2.0 * PI * x)
}

/// `e^{-x} I0(x)`.
pub fn bessel_i0e(x: f64) -> Result<f64> {
    check_arg("bessel_i0e", x)?;
    Ok(if x < SERIES_LIMIT {
        series_i0(x) * libm::exp(-x)
    } else {
        hankel_sum(0, x) * hankel_prefactor(x)
    })
}

/// `e^{-x} I1(x)`.
pub fn bessel_i1e(x: f64) -> Result<f64> {
    check_arg("bessel_i1e", x)?;
    Ok(if x < SERIES_LIMIT {
        x * series_i1_over_x(x) * libm::exp(-x)
    } else {
        hankel_sum(1, x) * hankel_prefactor(x)
    })
}

fn unscale(what: &'static str, x: f64, scaled: f64) -> Result<f64> {
    // e^x overflows near 709.78; split it so values up to ~713 survive
    let half = libm::exp(0.5 * x);
    let v = scaled * half * half;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow { what, value: x })
    }
}

/// Modified Bessel function of the first kind of order zero.
pub fn bessel_i0(x: f64) -> Result<f64> {
    check_arg("bessel_i0", x)?;
    if x < SERIES_LIMIT {
        Ok(series_i0(x))
    } else {
        unscale("bessel_i0", x, hankel_sum(0, x) * hankel_prefactor(x))
    }
}

/// Modified Bessel function of the first kind of order one.
pub fn bessel_i1(x: f64) -> Result<f64> {
    check_arg("bessel_i1", x)?;
    if x < SERIES_LIMIT {
        Ok(x * series_i1_over_x(x))
    } else {
        unscale("bessel_i1", x, hankel_sum(1, x) * hankel_prefactor(x))
    }
}

/// `A1(k) = I1(k) / I0(k)` without the domain check.
pub(crate) fn a1_unchecked(kappa: f64) -> f64 {
    if kappa < SERIES_LIMIT {
        kappa * series_i1_over_x(kappa) / series_i0(kappa)
    } else {
        hankel_sum(1, kappa) / hankel_sum(0, kappa)
    }
}

/// The mean resultant length of a von Mises distribution with concentration
/// `kappa`: `A1(k) = I1(k) / I0(k)`, in `[0, 1)`.
pub fn a1(kappa: f64) -> Result<f64> {
    check_arg("a1", kappa)?;
    Ok(a1_unchecked(kappa))
}

fn a1_derivative_unchecked(kappa: f64) -> f64 {
    if kappa < 1e-4 {
        // 1 - A^2 - A/k with A/k from the series, no 0/0
        let ratio = series_i1_over_x(kappa) / series_i0(kappa);
        let a = kappa * ratio;
        1.0 - a * a - ratio
    } else if kappa > 1e3 {
        // 1 - A^2 - A/k cancels catastrophically here
        let inv = 1.0 / kappa;
        let inv2 = inv * inv;
        inv2 * (0.5 + inv * (0.25 + inv * 0.375))
    } else {
        let a = a1_unchecked(kappa);
        1.0 - a * a - a / kappa
    }
}

/// `dA1/dk = 1 - A1(k)^2 - A1(k)/k`; equals 1/2 at zero.
pub fn a1_derivative(kappa: f64) -> Result<f64> {
    check_arg("a1_derivative", kappa)?;
    Ok(a1_derivative_unchecked(kappa))
}

/// Solves `A1(k) = r_bar` for `k >= 0`.
///
/// Safeguarded Newton iteration started from `r(2 - r^2) / (1 - r^2)`; any
/// step that leaves the current bracket is replaced by bisection.
pub fn a1_inverse(r_bar: f64) -> Result<f64> {
    if !(r_bar.is_finite() && (0.0..1.0).contains(&r_bar)) {
        return Err(Error::Domain {
            what: "a1_inverse",
            value: r_bar,
        });
    }
    if r_bar == 0.0 {
        return Ok(0.0);
    }

    // A1(k) > 1 - 1/k for every k > 0, so 1/(1 - r) brackets from above.
    let mut lo = 0.0_f64;
    let mut hi = (1.0 / (1.0 - r_bar)).max(1e8);
    let mut kappa = r_bar * (2.0 - r_bar * r_bar) / (1.0 - r_bar * r_bar);
    if !(kappa > lo && kappa < hi) {
        kappa = 0.5 * (lo + hi);
    }

    for _ in 0..200 {
        let resid = a1_unchecked(kappa) - r_bar;
        if resid == 0.0 {
            return Ok(kappa);
        }
        if resid < 0.0 {
            lo = kappa;
        } else {
            hi = kappa;
        }
        let slope = a1_derivative_unchecked(kappa);
        let newton = kappa - resid / slope;
        let next = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else if lo > 0.0 && hi > 4.0 * lo {
            // bracket spans orders of magnitude
            libm::sqrt(lo * hi)
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - kappa).abs();
        kappa = next;
        if resid.abs() <= A1_INVERSE_TOL && step <= 4.0 * f64::EPSILON * kappa.max(1.0) {
            return Ok(kappa);
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(kappa);
        }
    }
    Ok(kappa)
}
