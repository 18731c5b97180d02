use crate::error::{Error, Result};
use crate::numerics::grid::FieldProfile;

/// Composite Simpson rule over the full grid of `samples`.
///
/// Requires an odd number of nodes (an even number of panels).
pub fn integrate_simpson(samples: &FieldProfile) -> Result<f64> {
    let n = samples.len();
    if n < 3 || n % 2 == 0 {
        return Err(Error::Shape(format!(
            "composite Simpson needs an odd node count >= 3, got {n}"
        )));
    }
    let h = samples.grid().spacing();
    let f = samples.values();
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..n - 1 {
        if i % 2 == 1 {
            odd += f[i];
        } else {
            even += f[i];
        }
    }
    Ok(h / 3.0 * (f[0] + 4.0 * odd + 2.0 * even + f[n - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::grid::Grid1D;

    fn integrate(n: usize, f: impl Fn(f64) -> f64) -> Result<f64> {
        integrate_simpson(&FieldProfile::from_fn(Grid1D::unit(n).unwrap(), f))
    }

    #[test]
    fn exact_on_cubics() {
        assert!((integrate(3, |x| x).unwrap() - 0.5).abs() < 1e-15);
        assert!((integrate(3, |x| x * x * x).unwrap() - 0.25).abs() < 1e-15);
        let p = |x: f64| 3.0 - 2.0 * x + 0.5 * x * x - 4.0 * x.powi(3);
        let exact = 3.0 - 1.0 + 0.5 / 3.0 - 1.0;
        assert!((integrate(9, p).unwrap() - exact).abs() < 1e-14);
    }

    #[test]
    fn exponential() {
        let v = integrate(101, f64::exp).unwrap();
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn even_count_rejected() {
        assert!(matches!(integrate(4, |x| x), Err(Error::Shape(_))));
    }

    #[test]
    fn fourth_order_convergence() {
        let exact = std::f64::consts::E - 1.0;
        let mut prev = None;
        for n in [5, 9, 17, 33, 65] {
            let err = (integrate(n, f64::exp).unwrap() - exact).abs();
            if let Some(p) = prev {
                let ratio: f64 = p / err;
                assert!(ratio >= 14.0, "ratio {ratio} at n = {n}");
            }
            prev = Some(err);
        }
    }
}
