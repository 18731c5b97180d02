//! Closed-form spherically symmetric steady hydrodynamics.
//!
//! Pressure, radial fluid velocity and radial solid displacement on the unit
//! ball, regular at the centre and with `P(1) = U(1) = 0`:
//!
//! ```text
//! P(r) = 1 - i0(lambda r) / i0(lambda)
//! V(r) = phi_f Da lambda i1(lambda r) / i0(lambda)
//! U(r) = (r i1(lambda) - i1(lambda r)) / (lambda varrho i0(lambda))
//! ```
//!
//! The singular `k0` and `r^-2` modes are absent; they are excluded by
//! regularity at `r = 0`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::bessel::{i0, i1};
use crate::numerics::{integrate_simpson, FieldProfile, Grid1D};

/// Default node count for the flow-rate quadrature.
pub const DEFAULT_QUADRATURE_NODES: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalParams {
    lambda: f64,
    phi_f: f64,
    da: f64,
    varrho: f64,
    i0_lambda: f64,
    i1_lambda: f64,
}

impl SphericalParams {
    pub fn new(lambda: f64, phi_f: f64, da: f64, varrho: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::domain(format!("lambda must be > 0, got {lambda}")));
        }
        if !(phi_f > 0.0 && phi_f < 1.0) {
            return Err(Error::domain(format!("phi_f must lie in (0, 1), got {phi_f}")));
        }
        if !(da.is_finite() && da > 0.0) {
            return Err(Error::domain(format!("Da must be > 0, got {da}")));
        }
        if !(varrho.is_finite() && varrho > 0.0) {
            return Err(Error::domain(format!("varrho must be > 0, got {varrho}")));
        }
        let i0_lambda = i0(lambda)?;
        if !i0_lambda.is_finite() {
            return Err(Error::Overflow(format!("i0({lambda}) overflows")));
        }
        Ok(Self {
            lambda,
            phi_f,
            da,
            varrho,
            i0_lambda,
            i1_lambda: i1(lambda)?,
        })
    }

    /// Builds the eigenvalue from the source constant: `lambda^2 = a / (phi_f Da)`.
    pub fn from_source_constant(a: f64, phi_f: f64, da: f64, varrho: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::domain(format!("source constant a must be > 0, got {a}")));
        }
        if !(phi_f > 0.0 && da > 0.0) {
            return Err(Error::domain("phi_f and Da must be > 0"));
        }
        Self::new((a / (phi_f * da)).sqrt(), phi_f, da, varrho)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn phi_f(&self) -> f64 {
        self.phi_f
    }

    pub fn da(&self) -> f64 {
        self.da
    }

    pub fn varrho(&self) -> f64 {
        self.varrho
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::domain(format!("radius must lie in [0, 1], got {r}")));
    }
    Ok(())
}

pub fn pressure(sp: &SphericalParams, r: f64) -> Result<f64> {
    check_radius(r)?;
    if r == 1.0 {
        return Ok(0.0);
    }
    Ok(1.0 - i0(sp.lambda * r)? / sp.i0_lambda)
}

pub fn velocity(sp: &SphericalParams, r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(sp.phi_f * sp.da * sp.lambda * i1(sp.lambda * r)? / sp.i0_lambda)
}

pub fn displacement(sp: &SphericalParams, r: f64) -> Result<f64> {
    check_radius(r)?;
    if r == 1.0 {
        return Ok(0.0);
    }
    Ok((r * sp.i1_lambda - i1(sp.lambda * r)?) / (sp.lambda * sp.varrho * sp.i0_lambda))
}

/// Volumetric flow rate `2 pi Da phi_f lambda / i0(lambda) * int_0^1 r i1(lambda r) dr`,
/// with the integral done by composite Simpson on `nodes` points.
pub fn flow_rate(sp: &SphericalParams, nodes: usize) -> Result<f64> {
    let grid = Grid1D::unit(nodes)?;
    let integrand = FieldProfile::try_from_fn(grid, |r| Ok(r * i1(sp.lambda * r)?))?;
    let integral = integrate_simpson(&integrand)?;
    Ok(2.0 * PI * sp.da * sp.phi_f * sp.lambda / sp.i0_lambda * integral)
}

/// Pressure, velocity and displacement sampled on `grid` (a subset of [0, 1]).
pub struct SphericalProfiles {
    pub pressure: FieldProfile,
    pub velocity: FieldProfile,
    pub displacement: FieldProfile,
}

pub fn profiles(sp: &SphericalParams, grid: Grid1D) -> Result<SphericalProfiles> {
    Ok(SphericalProfiles {
        pressure: FieldProfile::try_from_fn(grid, |r| pressure(sp, r))?,
        velocity: FieldProfile::try_from_fn(grid, |r| velocity(sp, r))?,
        displacement: FieldProfile::try_from_fn(grid, |r| displacement(sp, r))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sp(lambda: f64, phi: f64, da: f64, varrho: f64) -> SphericalParams {
        SphericalParams::new(lambda, phi, da, varrho).unwrap()
    }

    #[test]
    fn boundary_values() {
        let s = sp(1.7, 0.3, 0.05, 2.0);
        assert_eq!(pressure(&s, 1.0).unwrap(), 0.0);
        assert_eq!(displacement(&s, 1.0).unwrap(), 0.0);
        assert_eq!(velocity(&s, 0.0).unwrap(), 0.0);
        assert_eq!(displacement(&s, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn reference_values() {
        // mpmath oracle values of the closed forms
        assert_relative_eq!(pressure(&sp(1.0, 0.3, 1.0, 1.0), 0.0).unwrap(), 0.14908187176067845, max_relative = 1e-13);
        assert_relative_eq!(pressure(&sp(2.0, 0.3, 1.0, 1.0), 0.5).unwrap(), 0.3519457263361146, max_relative = 1e-13);
        assert_relative_eq!(velocity(&sp(1.0, 0.3, 1.0, 1.0), 1.0).unwrap(), 0.093910585649799391, max_relative = 1e-13);
        assert_relative_eq!(displacement(&sp(1.0, 0.3, 1.0, 1.0), 0.5).unwrap(), 0.01112065935486975, max_relative = 1e-12);
    }

    #[test]
    fn radius_outside_unit_interval() {
        let s = sp(1.0, 0.3, 1.0, 1.0);
        assert!(matches!(pressure(&s, 1.01), Err(Error::Domain(_))));
        assert!(matches!(velocity(&s, -0.1), Err(Error::Domain(_))));
        assert!(matches!(displacement(&s, 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn invalid_params() {
        assert!(SphericalParams::new(0.0, 0.3, 1.0, 1.0).is_err());
        assert!(SphericalParams::new(1.0, 1.0, 1.0, 1.0).is_err());
        assert!(SphericalParams::new(1.0, 0.3, 0.0, 1.0).is_err());
        assert!(SphericalParams::new(1.0, 0.3, 1.0, -1.0).is_err());
    }

    #[test]
    fn velocity_is_darcy_flux_of_pressure() {
        let s = sp(2.3, 0.4, 0.2, 1.0);
        let h = 1e-5;
        for k in 1..20 {
            let r = k as f64 / 20.0;
            let dp = (pressure(&s, r + h).unwrap() - pressure(&s, r - h).unwrap()) / (2.0 * h);
            let v = velocity(&s, r).unwrap();
            assert!((v + s.phi_f() * s.da() * dp).abs() < 1e-6);
        }
    }

    #[test]
    fn flow_rate_reference() {
        // mpmath adaptive quadrature of the same integral
        let q = flow_rate(&sp(1.0, 0.3, 1.0, 1.0), 101).unwrap();
        assert_relative_eq!(q, 0.18918557368579494, max_relative = 1e-9);
    }

    #[test]
    fn flow_rate_small_lambda_limit() {
        let s = sp(1e-6, 0.3, 1.0, 1.0);
        let q = flow_rate(&s, DEFAULT_QUADRATURE_NODES).unwrap();
        let series = 2.0 * PI * s.da() * s.phi_f() / i0(s.lambda()).unwrap() * s.lambda().powi(2) / 9.0;
        assert_relative_eq!(q, series, max_relative = 1e-6);
    }

    #[test]
    fn flow_rate_even_nodes_rejected() {
        assert!(matches!(flow_rate(&sp(1.0, 0.3, 1.0, 1.0), 100), Err(Error::Shape(_))));
    }

    #[test]
    fn flow_rate_nonnegative() {
        for k in 1..40 {
            let lambda = 0.05 * k as f64 * k as f64;
            assert!(flow_rate(&sp(lambda, 0.3, 0.1, 1.0), 101).unwrap() >= 0.0);
        }
    }
}
