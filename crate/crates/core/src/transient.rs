//! Time-dependent radially symmetric simulation in dimensional units.
//!
//! Per node the unknowns are `(theta_f, theta_s, V_f, U_s)`, stored
//! interleaved so the whole step is one banded system. Heat uses a
//! finite-volume radial operator (cell weights `int r^(d-1) dr`), which keeps
//! the weighted total heat exactly balanced and reduces to `2d (T1 - T0) / h^2`
//! at the centre. Mechanics uses centred differences of the radial vector
//! Laplacian `V'' + (d-1) V'/r - (d-1) V/r^2`.
//!
//! Boundary data: `V_f = U_s = 0` at `r = 0` (regularity of a radial vector
//! field), Robin conditions on both temperatures, `dV_f/dr = g` and `U_s = 0`
//! at `r = R`.

use crate::error::{Error, Result};
use crate::numerics::{BandedLu, BandedMatrix, FieldProfile, Grid1D};
use crate::parameters::DimensionalParams;

const TF: usize = 0;
const TS: usize = 1;
const VF: usize = 2;
const US: usize = 3;
const FIELDS: usize = 4;
const BAND: usize = 7;

fn idx(node: usize, field: usize) -> usize {
    FIELDS * node + field
}

/// Piecewise-linear function through breakpoints, constant beyond the ends.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    points: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Argument("piecewise-linear profile needs at least one breakpoint".into()));
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::Argument("piecewise-linear breakpoints must be finite".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Argument("piecewise-linear breakpoints must be strictly increasing".into()));
        }
        Ok(Self { points })
    }

    /// Unit bump: zero outside [0.25, 0.75], one on [0.4, 0.6].
    pub fn default_bump() -> Self {
        Self {
            points: vec![(0.0, 0.0), (0.25, 0.0), (0.4, 1.0), (0.6, 1.0), (0.75, 0.0), (1.0, 0.0)],
        }
    }

    pub fn constant(value: f64) -> Self {
        Self { points: vec![(0.0, value)] }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn eval(&self, x: f64) -> f64 {
        let p = &self.points;
        if x <= p[0].0 {
            return p[0].1;
        }
        if x >= p[p.len() - 1].0 {
            return p[p.len() - 1].1;
        }
        let k = p.partition_point(|(px, _)| *px <= x);
        let ((x0, y0), (x1, y1)) = (p[k - 1], p[k]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingFlags {
    /// Interphase heat exchange `h (theta_f - theta_s)`.
    pub exchange_on: bool,
    /// Dissipation sources `-gamma_f div V_f` and `-gamma_s div dU_s/dt`.
    pub dissipation_on: bool,
    /// Drag `(V_f - dU_s/dt) / K` in both momentum equations.
    pub drag_on: bool,
    pub inertia_on: bool,
}

impl Default for CouplingFlags {
    fn default() -> Self {
        Self {
            exchange_on: true,
            dissipation_on: false,
            drag_on: true,
            inertia_on: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeScheme {
    #[default]
    BackwardEuler,
    /// Trapezoidal rule for the heat operator; mechanics stays implicit.
    CrankNicolson,
}

impl TimeScheme {
    fn implicitness(self) -> f64 {
        match self {
            TimeScheme::BackwardEuler => 1.0,
            TimeScheme::CrankNicolson => 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransientConfig {
    /// Domain radius in m.
    pub radius: f64,
    /// Horizon in s.
    pub t_end: f64,
    pub dt: f64,
    pub nodes: usize,
    /// Spatial dimension of the radial Laplacian, 2 or 3.
    pub dim: usize,
    /// External exchange coefficients of the Robin conditions, W/(m^2 K).
    pub robin_alpha_f: f64,
    pub robin_alpha_s: f64,
    pub ambient_f: f64,
    pub ambient_s: f64,
    pub coupling: CouplingFlags,
    pub scheme: TimeScheme,
    pub params: DimensionalParams,
    pub theta_f_initial: f64,
    pub theta_s_base: f64,
    pub theta_s_amplitude: f64,
    /// Shape of the initial solid temperature bump.
    pub initial_profile: PiecewiseLinear,
    /// Prescribed `dV_f/dr` at the outer radius.
    pub velocity_gradient: f64,
}

impl Default for TransientConfig {
    fn default() -> Self {
        Self {
            radius: 1.0,
            t_end: 7200.0,
            dt: 7.2,
            nodes: 201,
            dim: 2,
            robin_alpha_f: 10.0,
            robin_alpha_s: 10.0,
            ambient_f: 310.0,
            ambient_s: 315.0,
            coupling: CouplingFlags::default(),
            scheme: TimeScheme::default(),
            params: DimensionalParams::default(),
            theta_f_initial: 310.0,
            theta_s_base: 300.0,
            theta_s_amplitude: 15.0,
            initial_profile: PiecewiseLinear::default_bump(),
            velocity_gradient: 1.0,
        }
    }
}

/// Heat exchange and conduction variants of the energy-interplay study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatPreset {
    Moderate,
    HighExchange,
    LowExchange,
    GoodConduction,
}

impl HeatPreset {
    pub const ALL: [HeatPreset; 4] = [
        HeatPreset::Moderate,
        HeatPreset::HighExchange,
        HeatPreset::LowExchange,
        HeatPreset::GoodConduction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HeatPreset::Moderate => "moderate",
            HeatPreset::HighExchange => "high_exchange",
            HeatPreset::LowExchange => "low_exchange",
            HeatPreset::GoodConduction => "good_conduction",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown heat preset '{s}'")))
    }
}

/// Mechanical coupling level: none, table values, or ten times the
/// dissipation moduli and drag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingLevel {
    Off,
    Small,
    Strong,
}

impl CouplingLevel {
    pub fn name(self) -> &'static str {
        match self {
            CouplingLevel::Off => "off",
            CouplingLevel::Small => "small",
            CouplingLevel::Strong => "strong",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        [CouplingLevel::Off, CouplingLevel::Small, CouplingLevel::Strong]
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown coupling level '{s}'")))
    }

    pub fn multiplier(self) -> f64 {
        match self {
            CouplingLevel::Strong => 10.0,
            _ => 1.0,
        }
    }
}

impl TransientConfig {
    pub fn preset(heat: HeatPreset, coupling: CouplingLevel) -> Self {
        let mut cfg = Self::default();
        cfg.apply_preset(heat, coupling);
        cfg
    }

    /// Scales exchange, conductivities, dissipation and drag of `self` in place.
    pub fn apply_preset(&mut self, heat: HeatPreset, coupling: CouplingLevel) {
        let p = &mut self.params;
        match heat {
            HeatPreset::Moderate => {}
            HeatPreset::HighExchange => p.h_exch *= 1e4,
            HeatPreset::LowExchange => p.h_exch *= 1e-4,
            HeatPreset::GoodConduction => {
                p.kappa_f *= 100.0;
                p.kappa_s *= 100.0;
            }
        }
        let m = coupling.multiplier();
        p.gamma_f *= m;
        p.gamma_s *= m;
        p.drag_k /= m;
        self.coupling.dissipation_on = coupling != CouplingLevel::Off;
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(0.0, self.radius, self.nodes)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Argument(m));
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return bad(format!("radius must be > 0, got {}", self.radius));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.dt) {
            return bad(format!("t_end ({}) must be >= dt ({})", self.t_end, self.dt));
        }
        if self.nodes < 5 {
            return bad(format!("transient grid needs >= 5 nodes, got {}", self.nodes));
        }
        if self.dim != 2 && self.dim != 3 {
            return bad(format!("dim must be 2 or 3, got {}", self.dim));
        }
        if self.robin_alpha_f < 0.0 || self.robin_alpha_s < 0.0 {
            return bad("Robin coefficients must be >= 0".into());
        }
        let pts = self.initial_profile.points();
        if pts.iter().any(|(x, _)| *x < 0.0 || *x > self.radius) {
            return bad(format!("initial profile breakpoints must lie in [0, {}]", self.radius));
        }
        self.params.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransientState {
    pub t: f64,
    pub theta_f: FieldProfile,
    pub theta_s: FieldProfile,
    pub v_f: FieldProfile,
    pub u_s: FieldProfile,
    pub u_s_dot: FieldProfile,
}

impl TransientState {
    fn pack(&self) -> Vec<f64> {
        let n = self.theta_f.len();
        let mut x = vec![0.0; FIELDS * n];
        for i in 0..n {
            x[idx(i, TF)] = self.theta_f.values()[i];
            x[idx(i, TS)] = self.theta_s.values()[i];
            x[idx(i, VF)] = self.v_f.values()[i];
            x[idx(i, US)] = self.u_s.values()[i];
        }
        x
    }

    fn field(x: &[f64], field: usize) -> Vec<f64> {
        x.iter().skip(field).step_by(FIELDS).copied().collect()
    }

    /// Linear interpolation in time between `self` and `other` (`w = 0` gives `self`).
    pub fn lerp(&self, other: &TransientState, w: f64) -> Result<TransientState> {
        let mix = |a: &FieldProfile, b: &FieldProfile| {
            let v = a.values().iter().zip(b.values()).map(|(x, y)| x + w * (y - x)).collect();
            FieldProfile::new(*a.grid(), v)
        };
        Ok(TransientState {
            t: self.t + w * (other.t - self.t),
            theta_f: mix(&self.theta_f, &other.theta_f)?,
            theta_s: mix(&self.theta_s, &other.theta_s)?,
            v_f: mix(&self.v_f, &other.v_f)?,
            u_s: mix(&self.u_s, &other.u_s)?,
            u_s_dot: mix(&self.u_s_dot, &other.u_s_dot)?,
        })
    }
}

pub fn initial_state(cfg: &TransientConfig) -> Result<TransientState> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let zero = FieldProfile::constant(grid, 0.0);
    Ok(TransientState {
        t: 0.0,
        theta_f: FieldProfile::constant(grid, cfg.theta_f_initial),
        theta_s: FieldProfile::from_fn(grid, |r| {
            cfg.theta_s_base + cfg.theta_s_amplitude * cfg.initial_profile.eval(r)
        }),
        v_f: zero.clone(),
        u_s: zero.clone(),
        u_s_dot: zero,
    })
}

/// Finite-volume weights `int r^(d-1) dr` over each node's cell.
pub fn cell_weights(grid: &Grid1D, dim: usize) -> Vec<f64> {
    let n = grid.len();
    let h = grid.spacing();
    let d = dim as i32;
    (0..n)
        .map(|i| {
            let lo = if i == 0 { 0.0 } else { grid.node(i) - 0.5 * h };
            let hi = if i == n - 1 { grid.x_max() } else { grid.node(i) + 0.5 * h };
            (hi.powi(d) - lo.powi(d)) / dim as f64
        })
        .collect()
}

/// Weighted total heat `sum w_i (rho_f c_f theta_f + rho_s c_s theta_s)`.
pub fn total_heat(state: &TransientState, cfg: &TransientConfig) -> f64 {
    let w = cell_weights(state.theta_f.grid(), cfg.dim);
    let p = &cfg.params;
    w.iter()
        .zip(state.theta_f.values().iter().zip(state.theta_s.values()))
        .map(|(w, (f, s))| w * (p.rho_f * p.c_f * f + p.rho_s * p.c_s * s))
        .sum()
}

/// Weighted thermal energy `sum w_i (rho_f c_f (theta_f - a_f)^2 + rho_s c_s (theta_s - a_s)^2)`.
pub fn thermal_energy(state: &TransientState, cfg: &TransientConfig) -> f64 {
    let w = cell_weights(state.theta_f.grid(), cfg.dim);
    let p = &cfg.params;
    w.iter()
        .zip(state.theta_f.values().iter().zip(state.theta_s.values()))
        .map(|(w, (f, s))| {
            w * (p.rho_f * p.c_f * (f - cfg.ambient_f).powi(2) + p.rho_s * p.c_s * (s - cfg.ambient_s).powi(2))
        })
        .sum()
}

/// Linear step operator for a fixed `dt`: `A x_new = B x_old + c + extra(state)`.
///
/// Rows of `A` are equilibrated before factoring; the same scales are applied
/// to the right-hand side.
pub struct TransientSolver {
    cfg: TransientConfig,
    grid: Grid1D,
    dt: f64,
    a: BandedMatrix,
    b: BandedMatrix,
    c: Vec<f64>,
    row_scale: Vec<f64>,
    lu: BandedLu,
}

impl TransientSolver {
    pub fn new(cfg: &TransientConfig) -> Result<Self> {
        Self::with_dt(cfg, cfg.dt)
    }

    pub fn with_dt(cfg: &TransientConfig, dt: f64) -> Result<Self> {
        cfg.validate()?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Argument(format!("dt must be > 0, got {dt}")));
        }
        let grid = cfg.grid()?;
        let (mut a, b, c) = assemble(cfg, &grid, dt)?;
        let row_scale: Vec<f64> = (0..a.n())
            .map(|i| {
                let m = a.row_columns(i).map(|j| a.get(i, j).abs()).fold(0.0, f64::max);
                if m > 0.0 { 1.0 / m } else { 1.0 }
            })
            .collect();
        for (i, s) in row_scale.iter().enumerate() {
            a.scale_row(i, *s);
        }
        let lu = a
            .factor()
            .map_err(|e| e.with_context(&format!("transient step, dt = {dt}, nodes = {}", cfg.nodes)))?;
        Ok(Self {
            cfg: cfg.clone(),
            grid,
            dt,
            a,
            b,
            c,
            row_scale,
            lu,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn rhs(&self, state: &TransientState) -> Result<Vec<f64>> {
        let x = state.pack();
        let mut r = self.b.mul_vec(&x)?;
        let p = &self.cfg.params;
        if self.cfg.coupling.inertia_on {
            let n = self.grid.len();
            for i in 1..n - 1 {
                r[idx(i, US)] += p.rho_s / self.dt * state.u_s_dot.values()[i];
            }
        }
        for ((ri, ci), s) in r.iter_mut().zip(&self.c).zip(&self.row_scale) {
            *ri = (*ri + ci) * s;
        }
        Ok(r)
    }

    fn check_state(&self, state: &TransientState) -> Result<()> {
        for f in [&state.theta_f, &state.theta_s, &state.v_f, &state.u_s, &state.u_s_dot] {
            if f.grid() != &self.grid {
                return Err(Error::Shape("state is not on the configured grid".into()));
            }
        }
        Ok(())
    }

    pub fn advance(&self, state: &TransientState) -> Result<TransientState> {
        self.check_state(state)?;
        let x = self.lu.solve(&self.rhs(state)?)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver(format!("non-finite values at t = {}", state.t + self.dt)));
        }
        let g = self.grid;
        let u_new = TransientState::field(&x, US);
        let u_dot = u_new
            .iter()
            .zip(state.u_s.values())
            .map(|(a, b)| (a - b) / self.dt)
            .collect();
        Ok(TransientState {
            t: state.t + self.dt,
            theta_f: FieldProfile::new(g, TransientState::field(&x, TF))?,
            theta_s: FieldProfile::new(g, TransientState::field(&x, TS))?,
            v_f: FieldProfile::new(g, TransientState::field(&x, VF))?,
            u_s: FieldProfile::new(g, u_new)?,
            u_s_dot: FieldProfile::new(g, u_dot)?,
        })
    }

    /// Max-norm residual of the equilibrated step equations for `next`,
    /// relative to the size of the solution.
    pub fn residual(&self, prev: &TransientState, next: &TransientState) -> Result<f64> {
        self.check_state(prev)?;
        self.check_state(next)?;
        let x = next.pack();
        let ax = self.a.mul_vec(&x)?;
        let r = self.rhs(prev)?;
        let scale = x.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        Ok(ax.iter().zip(&r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale)
    }
}

type Row = Vec<(usize, f64)>;

fn assemble(cfg: &TransientConfig, grid: &Grid1D, dt: f64) -> Result<(BandedMatrix, BandedMatrix, Vec<f64>)> {
    let n = grid.len();
    let h = grid.spacing();
    let d = cfg.dim as f64;
    let radius = grid.x_max();
    let p = &cfg.params;
    let fl = &cfg.coupling;
    let theta = cfg.scheme.implicitness();
    let w = cell_weights(grid, cfg.dim);
    let face = |r: f64| r.powf(d - 1.0) / h;

    let size = FIELDS * n;
    let mut a = BandedMatrix::zeros(size, BAND, BAND)?;
    let mut b = BandedMatrix::zeros(size, BAND, BAND)?;
    let mut c = vec![0.0; size];

    let drag = if fl.drag_on { 1.0 / p.drag_k } else { 0.0 };
    let mu_v = 2.0 * p.mu_f + p.lambda_f + p.beta * p.phi_f * p.phi_f;
    let mu_u = 2.0 * p.mu_s + p.chi_s;
    let cross = p.beta * p.phi_s * p.phi_f;

    // divergence of a radial vector field at node i, as (column, weight) pairs;
    // the outer-boundary V_f value also contributes the prescribed gradient
    let div = |i: usize, field: usize| -> Row {
        if i == 0 {
            vec![(idx(1, field), d / h)]
        } else if i == n - 1 {
            if field == VF {
                vec![(idx(i, field), (d - 1.0) / radius)]
            } else {
                vec![
                    (idx(i, field), 1.5 / h + (d - 1.0) / radius),
                    (idx(i - 1, field), -2.0 / h),
                    (idx(i - 2, field), 0.5 / h),
                ]
            }
        } else {
            let r = grid.node(i);
            vec![
                (idx(i + 1, field), 0.5 / h),
                (idx(i - 1, field), -0.5 / h),
                (idx(i, field), (d - 1.0) / r),
            ]
        }
    };
    // radial vector Laplacian at an interior node
    let lap = |i: usize, field: usize| -> Row {
        let r = grid.node(i);
        vec![
            (idx(i - 1, field), 1.0 / (h * h) - (d - 1.0) / (2.0 * h * r)),
            (idx(i, field), -2.0 / (h * h) - (d - 1.0) / (r * r)),
            (idx(i + 1, field), 1.0 / (h * h) + (d - 1.0) / (2.0 * h * r)),
        ]
    };
    let put = |m: &mut BandedMatrix, row: usize, terms: &Row, scale: f64| -> Result<()> {
        for (col, v) in terms {
            m.add(row, *col, scale * v)?;
        }
        Ok(())
    };

    // heat
    let phases = [
        (TF, p.rho_f * p.c_f, p.kappa_f, cfg.robin_alpha_f, cfg.ambient_f, p.gamma_f, VF),
        (TS, p.rho_s * p.c_s, p.kappa_s, cfg.robin_alpha_s, cfg.ambient_s, p.gamma_s, US),
    ];
    for i in 0..n {
        for &(field, capacity, kappa, robin, ambient, gamma, mech) in &phases {
            let row = idx(i, field);
            let mut op: Row = Vec::new();
            if i > 0 {
                let f = kappa * face(grid.node(i) - 0.5 * h);
                op.push((idx(i - 1, field), f));
                op.push((idx(i, field), -f));
            }
            if i < n - 1 {
                let f = kappa * face(grid.node(i) + 0.5 * h);
                op.push((idx(i + 1, field), f));
                op.push((idx(i, field), -f));
            } else {
                let area = radius.powf(d - 1.0);
                op.push((idx(i, field), -area * robin));
                c[row] += area * robin * ambient;
            }
            if fl.exchange_on {
                let other = if field == TF { TS } else { TF };
                op.push((idx(i, field), -w[i] * p.h_exch));
                op.push((idx(i, other), w[i] * p.h_exch));
            }
            a.add(row, row, w[i] * capacity / dt)?;
            b.add(row, row, w[i] * capacity / dt)?;
            put(&mut a, row, &op, -theta)?;
            put(&mut b, row, &op, 1.0 - theta)?;

            if fl.dissipation_on {
                let dv = div(i, mech);
                if field == TF {
                    put(&mut a, row, &dv, w[i] * gamma)?;
                    if i == n - 1 {
                        c[row] -= w[i] * gamma * cfg.velocity_gradient;
                    }
                } else {
                    put(&mut a, row, &dv, w[i] * gamma / dt)?;
                    put(&mut b, row, &dv, w[i] * gamma / dt)?;
                }
            }
        }
    }

    // mechanics
    a.set(idx(0, VF), idx(0, VF), 1.0)?;
    a.set(idx(0, US), idx(0, US), 1.0)?;
    a.set(idx(n - 1, US), idx(n - 1, US), 1.0)?;
    let g = cfg.velocity_gradient;
    for i in 1..n {
        let last = i == n - 1;
        let row = idx(i, VF);
        if last {
            // ghost V_n = V_{n-2} + 2 h g
            let r = radius;
            a.add(row, idx(i - 1, VF), -mu_v * 2.0 / (h * h))?;
            a.add(row, idx(i, VF), -mu_v * (-2.0 / (h * h) - (d - 1.0) / (r * r)))?;
            c[row] += mu_v * (2.0 * g / h + (d - 1.0) * g / r);
            // dtheta_f/dr at the boundary from the Robin condition
            let k = cfg.robin_alpha_f / p.kappa_f;
            a.add(row, idx(i, TF), -p.gamma_f * k)?;
            c[row] -= p.gamma_f * k * cfg.ambient_f;
        } else {
            put(&mut a, row, &lap(i, VF), -mu_v)?;
            a.add(row, idx(i + 1, TF), p.gamma_f / (2.0 * h))?;
            a.add(row, idx(i - 1, TF), -p.gamma_f / (2.0 * h))?;
        }
        a.add(row, idx(i, VF), drag)?;
        a.add(row, idx(i, US), -drag / dt)?;
        b.add(row, idx(i, US), -drag / dt)?;
        if fl.inertia_on {
            a.add(row, idx(i, VF), p.rho_f / dt)?;
            b.add(row, idx(i, VF), p.rho_f / dt)?;
        }

        if last {
            continue;
        }
        let row = idx(i, US);
        put(&mut a, row, &lap(i, US), -mu_u)?;
        put(&mut a, row, &lap(i, VF), -cross)?;
        a.add(row, idx(i + 1, TS), p.gamma_s / (2.0 * h))?;
        a.add(row, idx(i - 1, TS), -p.gamma_s / (2.0 * h))?;
        a.add(row, idx(i, VF), -drag)?;
        a.add(row, idx(i, US), drag / dt)?;
        b.add(row, idx(i, US), drag / dt)?;
        if fl.inertia_on {
            a.add(row, idx(i, US), p.rho_s / (dt * dt))?;
            b.add(row, idx(i, US), p.rho_s / (dt * dt))?;
        }
    }
    Ok((a, b, c))
}

/// One step of length `cfg.dt`. Builds and factors the operator on every
/// call; use [`TransientSolver`] to reuse the factorization.
pub fn step(state: &TransientState, cfg: &TransientConfig) -> Result<TransientState> {
    TransientSolver::new(cfg)?.advance(state)
}

/// Advances from the initial state to `t_end` with fixed steps (the last one
/// shortened to land on `t_end`) and returns states at `snapshot_times`,
/// interpolated linearly between the bracketing steps.
pub fn run_scenario(cfg: &TransientConfig, snapshot_times: &[f64]) -> Result<Vec<TransientState>> {
    cfg.validate()?;
    if snapshot_times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Argument("snapshot times must be sorted".into()));
    }
    if let Some(t) = snapshot_times.iter().find(|t| !(0.0..=cfg.t_end).contains(*t)) {
        return Err(Error::Argument(format!("snapshot time {t} outside [0, {}]", cfg.t_end)));
    }
    let mut out = Vec::with_capacity(snapshot_times.len());
    let mut pending = snapshot_times.iter().copied().peekable();
    let mut state = initial_state(cfg)?;
    while pending.peek() == Some(&0.0) {
        out.push(state.clone());
        pending.next();
    }
    if pending.peek().is_none() {
        return Ok(out);
    }

    let full = TransientSolver::new(cfg)?;
    let steps = (cfg.t_end / cfg.dt - 1e-9).ceil() as usize;
    for k in 1..=steps {
        let next = if k < steps {
            full.advance(&state)?
        } else {
            let remaining = cfg.t_end - state.t;
            let mut last = if (remaining - cfg.dt).abs() <= 1e-12 * cfg.dt {
                full.advance(&state)?
            } else {
                TransientSolver::with_dt(cfg, remaining)?.advance(&state)?
            };
            last.t = cfg.t_end;
            last
        };
        while let Some(&t) = pending.peek() {
            if t > next.t {
                break;
            }
            let w = if next.t > state.t { (t - state.t) / (next.t - state.t) } else { 1.0 };
            let mut snap = state.lerp(&next, w)?;
            snap.t = t;
            out.push(snap);
            pending.next();
        }
        state = next;
        if pending.peek().is_none() {
            break;
        }
    }
    Ok(out)
}

/// Advances `steps` full steps from the initial state.
pub fn run_steps(cfg: &TransientConfig, steps: usize) -> Result<Vec<TransientState>> {
    let solver = TransientSolver::new(cfg)?;
    let mut states = vec![initial_state(cfg)?];
    for _ in 0..steps {
        let next = solver.advance(states.last().expect("non-empty"))?;
        states.push(next);
    }
    Ok(states)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(nodes: usize, t_end: f64, dt: f64) -> TransientConfig {
        TransientConfig {
            nodes,
            t_end,
            dt,
            ..TransientConfig::default()
        }
    }

    fn last(cfg: &TransientConfig) -> TransientState {
        run_scenario(cfg, &[cfg.t_end]).unwrap().pop().unwrap()
    }

    #[test]
    fn pw1_evaluation() {
        let b = PiecewiseLinear::default_bump();
        assert_eq!(b.eval(0.1), 0.0);
        assert_eq!(b.eval(0.5), 1.0);
        assert!((b.eval(0.325) - 0.5).abs() < 1e-15);
        assert_eq!(b.eval(2.0), 0.0);
        assert!(PiecewiseLinear::new(vec![(0.0, 0.0), (0.0, 1.0)]).is_err());
        assert!(PiecewiseLinear::new(vec![]).is_err());
    }

    #[test]
    fn initial_state_values() {
        let cfg = small(21, 10.0, 1.0);
        let s = initial_state(&cfg).unwrap();
        assert!(s.theta_f.values().iter().all(|v| *v == 310.0));
        assert_eq!(s.theta_s.interpolate(0.5).unwrap(), 315.0);
        assert_eq!(s.theta_s.first(), 300.0);
        let zero = TransientConfig { initial_profile: PiecewiseLinear::constant(0.0), ..cfg.clone() };
        assert!(initial_state(&zero).unwrap().theta_s.values().iter().all(|v| *v == 300.0));
        let one = TransientConfig { initial_profile: PiecewiseLinear::constant(1.0), ..cfg.clone() };
        assert!(initial_state(&one).unwrap().theta_s.values().iter().all(|v| *v == 315.0));
        let outside = TransientConfig {
            initial_profile: PiecewiseLinear::new(vec![(0.0, 0.0), (1.5, 1.0)]).unwrap(),
            ..cfg
        };
        assert!(initial_state(&outside).is_err());
    }

    #[test]
    fn config_validation() {
        let ok = small(21, 10.0, 1.0);
        assert!(ok.validate().is_ok());
        assert!(TransientConfig { dt: 20.0, ..ok.clone() }.validate().is_err());
        assert!(TransientConfig { dt: 0.0, ..ok.clone() }.validate().is_err());
        assert!(TransientConfig { dim: 1, ..ok.clone() }.validate().is_err());
        assert!(TransientConfig { nodes: 3, ..ok }.validate().is_err());
    }

    #[test]
    fn cell_weights_sum_to_volume_factor() {
        let g = Grid1D::new(0.0, 1.0, 11).unwrap();
        for d in [2, 3] {
            let s: f64 = cell_weights(&g, d).iter().sum();
            assert!((s - 1.0 / d as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn equilibrium_is_fixed_point() {
        let mut cfg = small(31, 100.0, 10.0);
        cfg.coupling = CouplingFlags {
            exchange_on: false,
            dissipation_on: false,
            drag_on: false,
            inertia_on: false,
        };
        cfg.initial_profile = PiecewiseLinear::constant(1.0);
        let states = run_steps(&cfg, 10).unwrap();
        let s = states.last().unwrap();
        assert!(s.theta_f.values().iter().all(|v| (v - 310.0).abs() < 1e-9));
        assert!(s.theta_s.values().iter().all(|v| (v - 315.0).abs() < 1e-9));
    }

    #[test]
    fn step_solves_linear_system() {
        let mut cfg = TransientConfig::preset(HeatPreset::Moderate, CouplingLevel::Strong);
        cfg.nodes = 41;
        cfg.coupling.inertia_on = true;
        let solver = TransientSolver::new(&cfg).unwrap();
        let s0 = initial_state(&cfg).unwrap();
        let s1 = solver.advance(&s0).unwrap();
        assert!(solver.residual(&s0, &s1).unwrap() < 1e-10);
        let s2 = solver.advance(&s1).unwrap();
        assert!(solver.residual(&s1, &s2).unwrap() < 1e-10);
        assert_eq!(step(&s0, &cfg).unwrap(), s1);
    }

    #[test]
    fn mechanics_boundary_conditions() {
        let mut cfg = TransientConfig::preset(HeatPreset::Moderate, CouplingLevel::Small);
        cfg.nodes = 41;
        let s = run_steps(&cfg, 3).unwrap().pop().unwrap();
        assert_eq!(s.v_f.first(), 0.0);
        assert_eq!(s.u_s.first(), 0.0);
        assert_eq!(s.u_s.last(), 0.0);
    }

    #[test]
    fn insulated_exchange_conserves_heat() {
        let mut cfg = small(51, 1e5, 100.0);
        cfg.robin_alpha_f = 0.0;
        cfg.robin_alpha_s = 0.0;
        cfg.params.h_exch = 50.0;
        let states = run_steps(&cfg, 1000).unwrap();
        let q0 = total_heat(&states[0], &cfg);
        let q1 = total_heat(states.last().unwrap(), &cfg);
        assert!(((q1 - q0) / q0).abs() < 1e-8);
    }

    #[test]
    fn energy_non_increasing_with_equal_ambients() {
        let mut cfg = small(41, 1e4, 50.0);
        cfg.ambient_s = 310.0;
        for scheme in [TimeScheme::BackwardEuler, TimeScheme::CrankNicolson] {
            cfg.scheme = scheme;
            let states = run_steps(&cfg, 100).unwrap();
            let e: Vec<f64> = states.iter().map(|s| thermal_energy(s, &cfg)).collect();
            assert!(e.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)), "{scheme:?}");
        }
    }

    #[test]
    fn matches_two_box_oracle() {
        // uniform fields, insulated: theta_f - theta_s decays like exp(-h (1/C_f + 1/C_s) t)
        let mut cfg = small(11, 2000.0, 0.5);
        cfg.robin_alpha_f = 0.0;
        cfg.robin_alpha_s = 0.0;
        cfg.initial_profile = PiecewiseLinear::constant(0.0);
        cfg.params.h_exch = 1000.0;
        let p = cfg.params.clone();
        let (cf, cs) = (p.rho_f * p.c_f, p.rho_s * p.c_s);
        let (mut f, mut s) = (310.0_f64, 300.0_f64);
        let dt = 0.01;
        for _ in 0..(cfg.t_end / dt) as usize {
            let q = p.h_exch * (f - s);
            f -= dt * q / cf;
            s += dt * q / cs;
        }
        let end = last(&cfg);
        assert!((end.theta_f.values()[5] - f).abs() < 1e-3, "{} {f}", end.theta_f.values()[5]);
        assert!((end.theta_s.values()[5] - s).abs() < 1e-3);
    }

    #[test]
    fn stiff_exchange_locks_phases() {
        let mut cfg = small(51, 7200.0, 72.0);
        cfg.params.h_exch = 1e9;
        let end = last(&cfg);
        let gap = end
            .theta_f
            .values()
            .iter()
            .zip(end.theta_s.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(gap <= 1e-3 * (cfg.ambient_s - cfg.ambient_f).abs(), "{gap}");
    }

    #[test]
    fn maximum_principle_for_heat_presets() {
        for preset in HeatPreset::ALL {
            let mut cfg = TransientConfig::preset(preset, CouplingLevel::Off);
            cfg.nodes = 51;
            cfg.dt = 72.0;
            let states = run_scenario(&cfg, &[0.0, 1800.0, 3600.0, 7200.0]).unwrap();
            for s in &states {
                for v in s.theta_f.values().iter().chain(s.theta_s.values()) {
                    assert!((300.0 - 1e-9..=315.0 + 1e-9).contains(v), "{preset:?} {v}");
                }
            }
        }
    }

    #[test]
    fn coupled_presets_run() {
        for level in [CouplingLevel::Small, CouplingLevel::Strong] {
            let mut cfg = TransientConfig::preset(HeatPreset::Moderate, level);
            cfg.nodes = 41;
            cfg.dt = 360.0;
            let end = last(&cfg);
            assert!(end.theta_f.values().iter().all(|v| v.is_finite()));
            assert!(end.v_f.max_abs() > 0.0);
        }
    }

    #[test]
    fn snapshots() {
        let cfg = small(21, 100.0, 10.0);
        assert!(run_scenario(&cfg, &[]).unwrap().is_empty());
        let s = run_scenario(&cfg, &[0.0]).unwrap();
        assert_eq!(s[0], initial_state(&cfg).unwrap());
        let s = run_scenario(&cfg, &[10.0, 15.0, 20.0]).unwrap();
        assert_eq!(s[1].t, 15.0);
        let mid = s[0].lerp(&s[2], 0.5).unwrap();
        assert!(mid.theta_s.max_abs_diff(&s[1].theta_s).unwrap() < 1e-12);
        assert!(run_scenario(&cfg, &[20.0, 10.0]).is_err());
        assert!(run_scenario(&cfg, &[200.0]).is_err());
    }

    #[test]
    fn truncated_last_step_lands_on_t_end() {
        let cfg = small(21, 25.0, 10.0);
        let s = run_scenario(&cfg, &[25.0]).unwrap();
        assert_eq!(s[0].t, 25.0);
    }

    #[test]
    fn deterministic() {
        let cfg = TransientConfig { nodes: 31, dt: 600.0, ..TransientConfig::preset(HeatPreset::Moderate, CouplingLevel::Small) };
        assert_eq!(last(&cfg), last(&cfg));
    }

    #[test]
    fn backward_euler_first_order() {
        let base = small(41, 600.0, 60.0);
        let at = |dt: f64| last(&TransientConfig { dt, ..base.clone() });
        let reference = at(60.0 / 16.0);
        let e1 = at(60.0).theta_s.max_abs_diff(&reference.theta_s).unwrap();
        let e2 = at(30.0).theta_s.max_abs_diff(&reference.theta_s).unwrap();
        let ratio = e1 / e2;
        assert!((1.7..=2.3).contains(&ratio), "ratio {ratio}");
    }
}
