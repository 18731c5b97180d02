//! Steady 1D elastohydrodynamics of the reduced Cartesian model.
//!
//! On `x in [0, 1]`:
//!
//! ```text
//! -(2 + lambda1) v'' + phi_f P' + v / Da = 0
//! -(2 + lambda2) u'' + phi_s P' - v / Da + delta_s Xi theta_s' = 0
//! phi_f v' = a1 - a2 P
//! v(0) = 1, v'(1) = 0, u(0) = u(1) = 0
//! ```
//!
//! Eliminating the pressure gives `v = A e^{a x} + B e^{-a x}` with
//! `a^2 = 1 / (Da (2 + lambda1 + phi_f^2 / a2))`. The pressure is recovered
//! from the mass balance as `P = (a1 - phi_f v') / a2`, which involves the
//! derivative `A e^{a x} - B e^{-a x}` of the velocity kernel.
//!
//! For `Xi = 0` the displacement is `u = (alpha_s / alpha_f) v + C x + D` where
//! `alpha_s` is fixed by requiring the solid momentum residual to vanish:
//! `alpha_s = -(phi_f phi_s alpha_f^2 / a2 + 1/Da) / ((2 + lambda2) alpha_f)`.
//! For `Xi = 1` the displacement equation is solved by finite differences with
//! the solid temperature gradient as an extra load.

use crate::error::{Error, Result};
use crate::numerics::stencil::first_derivative;
use crate::numerics::{solve_banded, BandedMatrix, FieldProfile, Grid1D};
use crate::parameters::NondimGroups;

/// Largest velocity decay rate whose exponential still fits in a double.
pub const MAX_ALPHA_F: f64 = 700.0;

/// Default grid for the thermally coupled displacement solve.
pub const DEFAULT_GRID_NODES: usize = 201;

/// Switch for the thermal-expansion load in the solid momentum balance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Xi {
    #[default]
    Off,
    On,
}

impl Xi {
    pub fn from_int(v: i64) -> Result<Self> {
        match v {
            0 => Ok(Xi::Off),
            1 => Ok(Xi::On),
            _ => Err(Error::Argument(format!("Xi must be 0 or 1, got {v}"))),
        }
    }

    pub fn as_int(self) -> u8 {
        match self {
            Xi::Off => 0,
            Xi::On => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianCoefficients {
    pub alpha_f: f64,
    pub alpha_s: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub a1: f64,
    pub a2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub phi_f: f64,
    pub phi_s: f64,
    pub da: f64,
    pub delta_s: f64,
    pub xi: Xi,
}

pub fn compute_coefficients(g: &NondimGroups, phi_f: f64, xi: Xi) -> Result<CartesianCoefficients> {
    if !(g.da.is_finite() && g.da > 0.0) {
        return Err(Error::domain(format!("Da must be > 0, got {}", g.da)));
    }
    if !(phi_f > 0.0 && phi_f < 1.0) {
        return Err(Error::domain(format!("phi_f must lie in (0, 1), got {phi_f}")));
    }
    if g.a2 == 0.0 || !g.a2.is_finite() {
        return Err(Error::domain("a2 must be non-zero"));
    }
    let phi_s = 1.0 - phi_f;
    let stiffness = 2.0 + g.lambda1 + phi_f * phi_f / g.a2;
    if !(stiffness > 0.0) {
        return Err(Error::domain(format!(
            "2 + lambda1 + phi_f^2/a2 must be > 0, got {stiffness}"
        )));
    }
    let alpha_f = (1.0 / (g.da * stiffness)).sqrt();
    if !alpha_f.is_finite() || alpha_f > MAX_ALPHA_F {
        return Err(Error::Overflow(format!(
            "alpha_f = {alpha_f:e} exceeds {MAX_ALPHA_F}; exp(alpha_f) overflows, rescale L or V"
        )));
    }
    // v(0) = A + B = 1 and v'(1) = alpha (A e^a - B e^-a) = 0
    let e2 = (-2.0 * alpha_f).exp();
    let b = 1.0 / (1.0 + e2);
    let a = e2 / (1.0 + e2);
    let alpha_s = -(phi_f * phi_s * alpha_f * alpha_f / g.a2 + 1.0 / g.da)
        / ((2.0 + g.lambda2) * alpha_f);
    let ratio = alpha_s / alpha_f;
    let d = -ratio * (a + b);
    let c = -ratio * (a * alpha_f.exp() + b * (-alpha_f).exp()) - d;
    Ok(CartesianCoefficients {
        alpha_f,
        alpha_s,
        a,
        b,
        c,
        d,
        a1: g.a1,
        a2: g.a2,
        lambda1: g.lambda1,
        lambda2: g.lambda2,
        phi_f,
        phi_s,
        da: g.da,
        delta_s: g.delta_s,
        xi,
    })
}

fn check_x(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("x must lie in [0, 1], got {x}")));
    }
    Ok(())
}

impl CartesianCoefficients {
    fn kernel(&self, x: f64) -> (f64, f64) {
        let ep = (self.alpha_f * x).exp();
        let em = (-self.alpha_f * x).exp();
        (self.a * ep, self.b * em)
    }

    /// Exact derivative of the fluid velocity.
    pub fn velocity_derivative(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        let (p, m) = self.kernel(x);
        Ok(self.alpha_f * (p - m))
    }

    /// Exact second derivative of the fluid velocity.
    pub fn velocity_second_derivative(&self, x: f64) -> Result<f64> {
        Ok(self.alpha_f * self.alpha_f * fluid_velocity(self, x)?)
    }

    /// Exact pressure gradient `-phi_f v'' / a2`.
    pub fn pressure_gradient(&self, x: f64) -> Result<f64> {
        Ok(-self.phi_f * self.velocity_second_derivative(x)? / self.a2)
    }
}

pub fn fluid_velocity(c: &CartesianCoefficients, x: f64) -> Result<f64> {
    check_x(x)?;
    let (p, m) = c.kernel(x);
    Ok(p + m)
}

pub fn pressure(c: &CartesianCoefficients, x: f64) -> Result<f64> {
    if c.a2 == 0.0 {
        return Err(Error::domain("a2 = 0"));
    }
    Ok((c.a1 - c.phi_f * c.velocity_derivative(x)?) / c.a2)
}

/// Closed-form displacement without thermal load.
pub fn displacement_closed_form(c: &CartesianCoefficients, x: f64) -> Result<f64> {
    let v = fluid_velocity(c, x)?;
    Ok(c.alpha_s / c.alpha_f * v + c.c * x + c.d)
}

/// Displacement at `x`. With `Xi = On` the finite-difference solve runs on the
/// grid of `theta_s` and the result is interpolated.
pub fn displacement(c: &CartesianCoefficients, x: f64, theta_s: Option<&FieldProfile>) -> Result<f64> {
    check_x(x)?;
    match c.xi {
        Xi::Off => displacement_closed_form(c, x),
        Xi::On => {
            let theta = theta_s.ok_or_else(|| {
                Error::Argument("Xi = 1 needs the solid temperature profile".into())
            })?;
            displacement_profile(c, *theta.grid(), Some(theta))?.interpolate(x)
        }
    }
}

/// Displacement sampled on `grid`.
///
/// With `Xi = On`, solves `-(2 + lambda2) u'' = -phi_s P' + v / Da - delta_s theta_s'`
/// with `u(0) = u(1) = 0` by second-order central differences. A `theta_s`
/// on a different grid is linearly interpolated onto `grid`.
pub fn displacement_profile(
    c: &CartesianCoefficients,
    grid: Grid1D,
    theta_s: Option<&FieldProfile>,
) -> Result<FieldProfile> {
    if grid.x_min() != 0.0 || grid.x_max() != 1.0 {
        return Err(Error::Shape("displacement grid must cover exactly [0, 1]".into()));
    }
    match c.xi {
        Xi::Off => FieldProfile::try_from_fn(grid, |x| displacement_closed_form(c, x)),
        Xi::On => {
            let theta = theta_s.ok_or_else(|| {
                Error::Argument("Xi = 1 needs the solid temperature profile".into())
            })?;
            let theta = theta.resample(grid)?;
            let dtheta = first_derivative(&theta);
            solve_displacement_fd(c, grid, dtheta.values())
        }
    }
}

fn solve_displacement_fd(c: &CartesianCoefficients, grid: Grid1D, dtheta: &[f64]) -> Result<FieldProfile> {
    let n = grid.len();
    let h = grid.spacing();
    let k = 2.0 + c.lambda2;
    let mut m = BandedMatrix::zeros(n, 1, 1)?;
    let mut rhs = vec![0.0; n];
    m.set(0, 0, 1.0)?;
    m.set(n - 1, n - 1, 1.0)?;
    for i in 1..n - 1 {
        let x = grid.node(i);
        // k (u_{i-1} - 2u_i + u_{i+1}) / h^2 = phi_s P' - v/Da + delta_s theta'
        // boundary values are zero, so their columns are dropped to keep the ends exact
        if i > 1 {
            m.set(i, i - 1, k / (h * h))?;
        }
        m.set(i, i, -2.0 * k / (h * h))?;
        if i < n - 2 {
            m.set(i, i + 1, k / (h * h))?;
        }
        rhs[i] = c.phi_s * c.pressure_gradient(x)? - fluid_velocity(c, x)? / c.da
            + c.delta_s * dtheta[i];
    }
    let u = solve_banded(&m, &rhs)?;
    FieldProfile::new(grid, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parameters::{nondimensionalize, DimensionalParams};
    use approx::assert_relative_eq;

    fn groups() -> (NondimGroups, f64) {
        let p = DimensionalParams { c_k: 2.0, ..DimensionalParams::default().with_porosity(0.9) };
        (nondimensionalize(&p).unwrap(), p.phi_f)
    }

    /// Coefficients with a prescribed decay rate, for checking against hand values.
    fn with_alpha(alpha: f64, phi_f: f64, a1: f64, a2: f64) -> CartesianCoefficients {
        // choose Da so that alpha_f comes out as requested with lambda1 = 0
        let stiffness = 2.0 + phi_f * phi_f / a2;
        let da = 1.0 / (alpha * alpha * stiffness);
        let g = NondimGroups {
            da,
            a1,
            a2,
            lambda1: 0.0,
            lambda2: 0.5,
            delta_s: 0.0,
            pe_f: 0.0,
            pe_s: 0.0,
            n: 0.0,
            kappa_ratio: 1.0,
            w: 1.0,
            delta_pf: 1.0,
            delta_ps: 0.0,
            zeta: 0.0,
        };
        compute_coefficients(&g, phi_f, Xi::Off).unwrap()
    }

    #[test]
    fn boundary_conditions_hold() {
        let (g, phi) = groups();
        let c = compute_coefficients(&g, phi, Xi::Off).unwrap();
        assert!((c.a + c.b - 1.0).abs() < 1e-15);
        assert!((c.alpha_f * (c.a * c.alpha_f.exp() - c.b * (-c.alpha_f).exp())).abs() < 1e-12);
        assert!((fluid_velocity(&c, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(c.velocity_derivative(1.0).unwrap().abs() < 1e-12);
        assert!(displacement_closed_form(&c, 0.0).unwrap().abs() < 1e-12);
        assert!(displacement_closed_form(&c, 1.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn reference_values_alpha_one() {
        // 2x2 oracle: A + B = 1, A e - B / e = 0
        let c = with_alpha(1.0, 0.3, 1.0, 1.0);
        assert_relative_eq!(c.alpha_f, 1.0, max_relative = 1e-14);
        assert_relative_eq!(c.a, 0.11920292202211756, max_relative = 1e-13);
        assert_relative_eq!(c.b, 0.88079707797788244, max_relative = 1e-13);
        assert_relative_eq!(fluid_velocity(&c, 0.5).unwrap(), 0.73076282584635881, max_relative = 1e-13);
        assert_relative_eq!(pressure(&c, 0.0).unwrap(), 1.2284782467867295, max_relative = 1e-13);
        assert_relative_eq!(pressure(&c, 1.0).unwrap(), c.a1 / c.a2, max_relative = 1e-12);
    }

    #[test]
    fn velocity_decreasing() {
        let (g, phi) = groups();
        let c = compute_coefficients(&g, phi, Xi::Off).unwrap();
        for k in 0..100 {
            let x = k as f64 / 100.0;
            let d = c.velocity_derivative(x).unwrap();
            // sign(A e^{2 a x} - B) decides the slope
            let s = c.a * (2.0 * c.alpha_f * x).exp() - c.b;
            assert!(d < 0.0 && s < 0.0);
        }
    }

    #[test]
    fn overflow_guard() {
        let (mut g, phi) = groups();
        g.da = 1e-12;
        assert!(matches!(compute_coefficients(&g, phi, Xi::Off), Err(Error::Overflow(_))));
    }

    #[test]
    fn domain_errors() {
        let c = with_alpha(1.0, 0.3, 1.0, 1.0);
        assert!(fluid_velocity(&c, 1.5).is_err());
        assert!(pressure(&c, -0.5).is_err());
        let on = CartesianCoefficients { xi: Xi::On, ..c };
        assert!(matches!(displacement(&on, 0.5, None), Err(Error::Argument(_))));
        assert!(Xi::from_int(2).is_err());
    }

    #[test]
    fn constant_temperature_recovers_closed_form() {
        let (g, phi) = groups();
        let c = compute_coefficients(&g, phi, Xi::On).unwrap();
        let closed = CartesianCoefficients { xi: Xi::Off, ..c };
        let mut errs = vec![];
        for n in [51, 101, 201] {
            let grid = Grid1D::unit(n).unwrap();
            let theta = FieldProfile::constant(grid, 0.7);
            let u = displacement_profile(&c, grid, Some(&theta)).unwrap();
            let exact = displacement_profile(&closed, grid, None).unwrap();
            assert_eq!(u.first(), 0.0);
            assert_eq!(u.last(), 0.0);
            errs.push(u.max_abs_diff(&exact).unwrap());
        }
        let r = errs[1] / errs[2];
        assert!((3.5..4.5).contains(&r), "ratio {r}, errs {errs:?}");
    }

    #[test]
    fn thermal_load_converges_second_order() {
        let (g, phi) = groups();
        let c = compute_coefficients(&g, phi, Xi::On).unwrap();
        let solve = |n| {
            let grid = Grid1D::unit(n).unwrap();
            let theta = FieldProfile::from_fn(grid, |x| (2.0 * x).cos());
            displacement_profile(&c, grid, Some(&theta)).unwrap()
        };
        let (u1, u2, u3) = (solve(51), solve(101), solve(201));
        let at = |u: &FieldProfile, stride: usize| -> Vec<f64> { u.values().iter().step_by(stride).copied().collect() };
        let (c1, c2, c3) = (at(&u1, 1), at(&u2, 2), at(&u3, 4));
        // Richardson-extrapolated reference from the two finest grids
        let reference: Vec<f64> = c2.iter().zip(&c3).map(|(a, b)| b + (b - a) / 3.0).collect();
        let err = |v: &[f64]| v.iter().zip(&reference).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let ratio = err(&c1) / err(&c2);
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }
}
