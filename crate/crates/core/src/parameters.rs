//! Dimensional coefficients, Carman–Kozeny permeability and the derived
//! dimensionless groups.
//!
//! Conventions for the pressure-source constants: `a1 = a0 L P_a / V` is the
//! source term and `a2 = mu_f a0` multiplies the pressure, so the reduced
//! mass balance reads `d(phi_f v_f)/dx = a1 - a2 P`.

use crate::error::{Error, Result};

/// Physical coefficients in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionalParams {
    /// Fluid mass density (kg/m³).
    pub rho_f: f64,
    /// Solid mass density (kg/m³).
    pub rho_s: f64,
    /// Fluid specific heat (J/(kg·K)).
    pub c_f: f64,
    /// Solid specific heat (J/(kg·K)).
    pub c_s: f64,
    /// Fluid heat conductivity (W/(m·K)).
    pub kappa_f: f64,
    /// Solid heat conductivity (W/(m·K)).
    pub kappa_s: f64,
    /// Interphase heat exchange coefficient (W/(m³·K)).
    pub h_exch: f64,
    /// Fluid viscosity (Pa·s).
    pub mu_f: f64,
    /// Solid shear modulus (Pa).
    pub mu_s: f64,
    /// Fluid first viscosity coefficient (Pa·s).
    pub lambda_f: f64,
    /// Solid first Lamé parameter (Pa).
    pub chi_s: f64,
    /// Fluid modulus of heat dissipation (Pa).
    pub gamma_f: f64,
    /// Solid modulus of heat dissipation (Pa).
    pub gamma_s: f64,
    /// Solid thermal expansion coefficient (Pa/K).
    pub alpha_s_exp: f64,
    pub phi_f: f64,
    pub phi_s: f64,
    /// Transmural conductance (1/(Pa·s)).
    pub a0: f64,
    /// Ambient pressure (Pa).
    pub p_a: f64,
    /// Characteristic length (m).
    pub length: f64,
    /// Characteristic velocity (m/s).
    pub velocity: f64,
    /// Carman–Kozeny cell-diameter parameter.
    pub d_c: f64,
    /// Carman–Kozeny constant.
    pub c_k: f64,
    /// Permeability product `mu_f K` supplied directly; overrides Carman–Kozeny.
    pub mu_f_k: Option<f64>,
    /// Drag permeability `K` (m²) of the transient momentum exchange `(1/K)(V_f - dU_s/dt)`.
    pub drag_k: f64,
    /// Pressure penalty coefficient of the pressure-substituted transient problem.
    pub beta: f64,
}

impl Default for DimensionalParams {
    /// Reference tissue values; `L = 1 m` and `V = 1e-6 m/s` are inferred scales.
    fn default() -> Self {
        let phi_f = 0.3;
        Self {
            rho_f: 1050.0,
            rho_s: 1100.0,
            c_f: 3617.0,
            c_s: 2500.0,
            kappa_f: 5.0,
            kappa_s: 5.0,
            h_exch: 10.0,
            mu_f: 0.0026,
            mu_s: 2.0e6,
            lambda_f: 0.004,
            chi_s: 0.8e6,
            gamma_f: 0.5,
            gamma_s: 0.5,
            alpha_s_exp: 0.5,
            phi_f,
            phi_s: 1.0 - phi_f,
            a0: 1.0,
            p_a: 2.6e-9,
            length: 1.0,
            velocity: 1.0e-6,
            d_c: 25.0,
            c_k: default_carman_kozeny_constant(phi_f),
            mu_f_k: None,
            drag_k: 1.0,
            beta: 0.001,
        }
    }
}

/// Carman–Kozeny constant: 2 for porosity at or above 0.9, 4 below.
pub fn default_carman_kozeny_constant(phi_f: f64) -> f64 {
    if phi_f >= 0.9 {
        2.0
    } else {
        4.0
    }
}

/// Permeability product `mu_f K = phi_f^3 / (C_k (1 - phi_f)^2 D_c^2)`.
pub fn carman_kozeny_muk(phi_f: f64, c_k: f64, d_c: f64) -> Result<f64> {
    if !(phi_f > 0.0 && phi_f < 1.0) {
        return Err(Error::domain(format!(
            "Carman-Kozeny: porosity must lie in (0, 1), got {phi_f}"
        )));
    }
    if !(c_k > 0.0 && c_k.is_finite()) {
        return Err(Error::domain(format!("Carman-Kozeny: C_k must be > 0, got {c_k}")));
    }
    if !(d_c > 0.0 && d_c.is_finite()) {
        return Err(Error::domain(format!("Carman-Kozeny: D_c must be > 0, got {d_c}")));
    }
    let solid = 1.0 - phi_f;
    Ok(phi_f.powi(3) / (c_k * solid * solid * d_c * d_c))
}

impl DimensionalParams {
    /// Sets `phi_f` and closes `phi_s = 1 - phi_f`.
    pub fn with_porosity(mut self, phi_f: f64) -> Self {
        self.phi_f = phi_f;
        self.phi_s = 1.0 - phi_f;
        self
    }

    fn named_fields(&self) -> [(&'static str, f64); 23] {
        [
            ("rho_f", self.rho_f),
            ("rho_s", self.rho_s),
            ("c_f", self.c_f),
            ("c_s", self.c_s),
            ("kappa_f", self.kappa_f),
            ("kappa_s", self.kappa_s),
            ("h_exch", self.h_exch),
            ("mu_f", self.mu_f),
            ("mu_s", self.mu_s),
            ("lambda_f", self.lambda_f),
            ("chi_s", self.chi_s),
            ("gamma_f", self.gamma_f),
            ("gamma_s", self.gamma_s),
            ("alpha_s_exp", self.alpha_s_exp),
            ("phi_f", self.phi_f),
            ("phi_s", self.phi_s),
            ("a0", self.a0),
            ("p_a", self.p_a),
            ("length", self.length),
            ("velocity", self.velocity),
            ("d_c", self.d_c),
            ("c_k", self.c_k),
            ("drag_k", self.drag_k),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.named_fields() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::domain(format!("beta must be >= 0, got {}", self.beta)));
        }
        if self.phi_f >= 1.0 {
            return Err(Error::domain(format!("phi_f must be < 1, got {}", self.phi_f)));
        }
        if (self.phi_f + self.phi_s - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!(
                "volume fractions must sum to 1: phi_f + phi_s = {}",
                self.phi_f + self.phi_s
            )));
        }
        if let Some(k) = self.mu_f_k {
            if !(k.is_finite() && k > 0.0) {
                return Err(Error::domain(format!("mu_f_k must be > 0, got {k}")));
            }
        }
        Ok(())
    }

    /// `mu_f K`, directly supplied or from Carman–Kozeny.
    pub fn permeability(&self) -> Result<f64> {
        match self.mu_f_k {
            Some(k) => Ok(k),
            None => carman_kozeny_muk(self.phi_f, self.c_k, self.d_c),
        }
    }

    /// Temperature scales `W_{f,s} = gamma_{f,s} V L / kappa_{f,s}`.
    pub fn temperature_scales(&self) -> (f64, f64) {
        (
            self.gamma_f * self.velocity * self.length / self.kappa_f,
            self.gamma_s * self.velocity * self.length / self.kappa_s,
        )
    }
}

/// Dimensionless numbers of the scaled model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NondimGroups {
    /// Darcy number `mu_f K / L^2`.
    pub da: f64,
    /// Pressure source constant `a0 L P_a / V`.
    pub a1: f64,
    /// Pressure coefficient `mu_f a0`.
    pub a2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Thermal expansion to viscous force ratio `L alpha_s W_s / (V mu_f)`.
    pub delta_s: f64,
    pub pe_f: f64,
    pub pe_s: f64,
    /// Heat-exchange number `h L^2 / kappa_f`.
    pub n: f64,
    /// Conductivity ratio `kappa_f / kappa_s`.
    pub kappa_ratio: f64,
    /// Temperature-scale ratio `W_s / W_f`.
    pub w: f64,
    pub delta_pf: f64,
    pub delta_ps: f64,
    /// Viscous to shear ratio `V mu_f / (mu_s L)`.
    pub zeta: f64,
}

fn ratio(group: &str, num: f64, den: f64) -> Result<f64> {
    if den == 0.0 || !den.is_finite() {
        return Err(Error::domain(format!("{group}: zero or non-finite denominator")));
    }
    let v = num / den;
    if !v.is_finite() {
        return Err(Error::domain(format!("{group}: non-finite value")));
    }
    Ok(v)
}

pub fn nondimensionalize(p: &DimensionalParams) -> Result<NondimGroups> {
    p.validate()?;
    let l = p.length;
    let v = p.velocity;
    let (w_f, w_s) = p.temperature_scales();
    let muk = p.permeability()?;
    Ok(NondimGroups {
        da: ratio("Da", muk, l * l)?,
        a1: ratio("a1", p.a0 * l * p.p_a, v)?,
        a2: p.mu_f * p.a0,
        lambda1: ratio("lambda1", p.lambda_f, p.mu_f)?,
        lambda2: ratio("lambda2", p.chi_s, p.mu_s)?,
        delta_s: ratio("delta_s", l * p.alpha_s_exp * w_s, v * p.mu_f)?,
        pe_f: ratio("Pe_f", p.rho_f * p.c_f * l * l * v, p.kappa_f * l)?,
        pe_s: ratio("Pe_s", p.rho_s * p.c_s * l * l * v, p.kappa_s * l)?,
        n: ratio("N", p.h_exch * l * l, p.kappa_f)?,
        kappa_ratio: ratio("kappa", p.kappa_f, p.kappa_s)?,
        w: ratio("W", w_s, w_f)?,
        delta_pf: ratio("delta'_f", l * p.gamma_f * v, p.kappa_f * w_f)?,
        delta_ps: ratio("delta'_s", p.gamma_s * v * v * p.mu_f, p.mu_s * p.kappa_s * w_s)?,
        zeta: ratio("zeta", v * p.mu_f, p.mu_s * l)?,
    })
}

impl NondimGroups {
    /// `(name, value, defining formula)` for every group, in display order.
    pub fn entries(&self) -> Vec<(&'static str, f64, &'static str)> {
        vec![
            ("Da", self.da, "mu_f*K/L^2"),
            ("a1", self.a1, "a0*L*P_a/V"),
            ("a2", self.a2, "mu_f*a0"),
            ("lambda1", self.lambda1, "lambda_f/mu_f"),
            ("lambda2", self.lambda2, "chi_s/mu_s"),
            ("delta_s", self.delta_s, "L*alpha_s*W_s/(V*mu_f)"),
            ("Pe_f", self.pe_f, "rho_f*c_f*L^2*V/(kappa_f*L)"),
            ("Pe_s", self.pe_s, "rho_s*c_s*L^2*V/(kappa_s*L)"),
            ("N", self.n, "h*L^2/kappa_f"),
            ("kappa", self.kappa_ratio, "kappa_f/kappa_s"),
            ("W", self.w, "W_s/W_f"),
            ("delta_f_prime", self.delta_pf, "L*gamma_f*V/(kappa_f*W_f)"),
            ("delta_s_prime", self.delta_ps, "gamma_s*V^2*mu_f/(mu_s*kappa_s*W_s)"),
            ("zeta", self.zeta, "V*mu_f/(mu_s*L)"),
        ]
    }
}
