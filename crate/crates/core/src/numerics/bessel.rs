//! Modified spherical Bessel functions of order zero and one.
//!
//! Only the three functions that appear in the spherically symmetric pressure
//! and displacement solutions are provided:
//!
//! * `i0(x) = sinh(x) / x`
//! * `i1(x) = (x cosh x - sinh x) / x^2`
//! * `k0(x) = exp(-x) / x`
//!
//! Near the origin both `i0` and `i1` are evaluated from their Taylor series.
//! For `i1` the direct formula suffers from cancellation of order `eps / x^2`,
//! so its series branch extends out to `x = 1`.

use crate::error::{Error, Result};

/// Below this argument `i0` uses its Taylor series.
pub const I0_SERIES_THRESHOLD: f64 = 1e-3;

/// Below this argument `i1` uses its Taylor series.
pub const I1_SERIES_THRESHOLD: f64 = 1.0;

fn check_nonneg(name: &str, x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::domain(format!("{name}: argument must be finite, got {x}")));
    }
    if x < 0.0 {
        return Err(Error::domain(format!("{name}: argument must be >= 0, got {x}")));
    }
    Ok(())
}

/// Taylor series of `i0`: sum of x^(2k) / (2k+1)!.
pub fn i0_series(x: f64) -> f64 {
    let x2 = x * x;
    // Horner form of 1 + x^2/3! + x^4/5! + x^6/7! + x^8/9!
    1.0 + x2 / 6.0 * (1.0 + x2 / 20.0 * (1.0 + x2 / 42.0 * (1.0 + x2 / 72.0)))
}

/// Taylor series of `i1`: sum over k >= 1 of 2k x^(2k-1) / (2k+1)!.
///
/// Ten terms give full double precision for `x <= 1`.
pub fn i1_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut sum = 0.0;
    // term_k = 2k x^(2k-1) / (2k+1)!, built from term_1 = x/3
    let mut power = x; // x^(2k-1)
    let mut fact = 6.0; // (2k+1)!
    let mut terms = [0.0; 10];
    for (k, slot) in terms.iter_mut().enumerate() {
        let k = (k + 1) as f64;
        *slot = 2.0 * k * power / fact;
        power *= x2;
        fact *= (2.0 * k + 2.0) * (2.0 * k + 3.0);
    }
    // smallest terms first
    for t in terms.iter().rev() {
        sum += t;
    }
    sum
}

pub fn i0_direct(x: f64) -> f64 {
    x.sinh() / x
}

pub fn i1_direct(x: f64) -> f64 {
    (x * x.cosh() - x.sinh()) / (x * x)
}

/// `i0(x) = sinh(x)/x`, with `i0(0) = 1`.
pub fn i0(x: f64) -> Result<f64> {
    check_nonneg("i0", x)?;
    if x < I0_SERIES_THRESHOLD {
        Ok(i0_series(x))
    } else {
        Ok(i0_direct(x))
    }
}

/// `i1(x) = (x cosh x - sinh x)/x^2`, with `i1(0) = 0`.
pub fn i1(x: f64) -> Result<f64> {
    check_nonneg("i1", x)?;
    if x < I1_SERIES_THRESHOLD {
        Ok(i1_series(x))
    } else {
        Ok(i1_direct(x))
    }
}

/// `k0(x) = exp(-x)/x`, singular at the origin.
pub fn k0(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!("k0: argument must be finite and > 0, got {x}")));
    }
    Ok((-x).exp() / x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn values_at_origin() {
        assert_eq!(i0(0.0).unwrap(), 1.0);
        assert_eq!(i1(0.0).unwrap(), 0.0);
    }

    #[test]
    fn reference_points() {
        // mpmath, 40 digits
        assert_relative_eq!(i0(1.0).unwrap(), 1.1752011936438015, max_relative = 1e-15);
        assert_relative_eq!(i0(2.0).unwrap(), 1.8134302039235094, max_relative = 1e-15);
        assert_relative_eq!(i1(1.0).unwrap(), 0.36787944117144232, max_relative = 1e-14);
        assert_relative_eq!(i1(1e-6).unwrap(), 3.3333333333336667e-7, max_relative = 1e-15);
        assert_relative_eq!(k0(1.0).unwrap(), 0.36787944117144233, max_relative = 1e-15);
        assert_relative_eq!(k0(2.0).unwrap(), 0.06766764161830635, max_relative = 1e-15);
        assert_relative_eq!(k0(2f64.ln()).unwrap(), 0.7213475204444817, max_relative = 1e-15);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(i0(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(i1(f64::INFINITY), Err(Error::Domain(_))));
        assert!(matches!(i0(-1.0), Err(Error::Domain(_))));
        assert!(matches!(k0(0.0), Err(Error::Domain(_))));
        assert!(matches!(k0(-2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn branches_agree_at_switch_points() {
        let x = I0_SERIES_THRESHOLD;
        assert_relative_eq!(i0_series(x), i0_direct(x), max_relative = 1e-13);
        let x = I1_SERIES_THRESHOLD;
        assert_relative_eq!(i1_series(x), i1_direct(x), max_relative = 1e-13);
    }

    #[test]
    fn derivative_of_i0_is_i1() {
        // Central differences of i0 against i1 on log-spaced points in [1e-8, 50].
        // i0 is even, so i0(x - h) = i0(|x - h|) when the stencil crosses zero.
        // The rounding floor of the difference quotient is ~eps / (h * i1(x)),
        // which exceeds 1e-8 relative once x drops below ~1e-2; there only the
        // absolute error is bounded.
        for j in 0..100 {
            let x = 1e-8 * (50.0f64 / 1e-8).powf(j as f64 / 99.0);
            let h = 1e-4;
            let d = (i0(x + h).unwrap() - i0((x - h).abs()).unwrap()) / (2.0 * h);
            let exact = i1(x).unwrap();
            if x >= 1e-2 {
                assert_relative_eq!(d, exact, max_relative = 1e-8);
            } else {
                assert!((d - exact).abs() < 1e-11, "x={x}: {d} vs {exact}");
            }
        }
    }
}
