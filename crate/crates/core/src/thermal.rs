//! Steady two-temperature heat transfer on `[0, 1]`.
//!
//! The implemented system is
//!
//! ```text
//! Pe_f (theta_f v)' - theta_f'' + N (theta_f - kappa theta_s) + v' = 0
//! -theta_s'' + N (kappa theta_s - theta_f) = 0
//! theta_f(0) = theta_s(0) = 1,  theta_f'(1) = theta_s'(1) = 0
//! ```
//!
//! [`solve_coupled_steady`] discretizes it directly with interleaved unknowns.
//! [`solve_fourth_order`] eliminates `theta_f = kappa theta_s - theta_s'' / N`
//! and solves the resulting fourth-order equation for `theta_s`:
//!
//! ```text
//! s'''' - Pe v s''' - ((kappa + 1) N + Pe v') s'' + Pe kappa N v s' + Pe kappa N v' s = -N v'
//! s(0) = 1,  kappa s(0) - s''(0)/N = 1,  s'(1) = 0,  kappa s'(1) - s'''(1)/N = 0
//! ```
//!
//! Note the sign of the `s''/N` terms: they follow from eliminating `theta_f`
//! through the second equation above; `+s''/N` would correspond to the
//! opposite sign of the exchange term.

use log::warn;

use crate::error::{Error, Result};
use crate::numerics::stencil::second_derivative;
use crate::numerics::{BandedMatrix, FieldProfile, Grid1D};

/// Default node count (odd, so profiles can be integrated with Simpson).
pub const DEFAULT_GRID_NODES: usize = 201;

/// Discretization of the convective term `(theta_f v)'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvectionScheme {
    Centered,
    Upwind,
    /// Centered unless the cell Peclet number `Pe_f h max|v|` exceeds 2.
    #[default]
    Auto,
}

#[derive(Debug, Clone)]
pub struct ThermalProblem {
    pub pe_f: f64,
    pub n: f64,
    pub kappa_ratio: f64,
    pub v_f: FieldProfile,
    pub dv_f: FieldProfile,
    pub convection: ConvectionScheme,
}

impl ThermalProblem {
    pub fn new(pe_f: f64, n: f64, kappa_ratio: f64, v_f: FieldProfile, dv_f: FieldProfile) -> Result<Self> {
        let p = Self {
            pe_f,
            n,
            kappa_ratio,
            v_f,
            dv_f,
            convection: ConvectionScheme::Auto,
        };
        p.validate()?;
        Ok(p)
    }

    /// Problem with a quiescent fluid on an `n`-node unit grid.
    pub fn at_rest(pe_f: f64, n_exchange: f64, kappa_ratio: f64, nodes: usize) -> Result<Self> {
        let grid = Grid1D::unit(nodes)?;
        Self::new(
            pe_f,
            n_exchange,
            kappa_ratio,
            FieldProfile::constant(grid, 0.0),
            FieldProfile::constant(grid, 0.0),
        )
    }

    pub fn grid(&self) -> &Grid1D {
        self.v_f.grid()
    }

    fn validate(&self) -> Result<()> {
        let g = self.v_f.grid();
        if g.x_min() != 0.0 || g.x_max() != 1.0 {
            return Err(Error::Shape("thermal grid must cover exactly [0, 1]".into()));
        }
        if g.len() < 5 {
            return Err(Error::Shape(format!("thermal grid needs >= 5 nodes, got {}", g.len())));
        }
        if self.dv_f.grid() != g {
            return Err(Error::Shape("v_f and dv_f must share a grid".into()));
        }
        if !(self.n.is_finite() && self.n >= 0.0) {
            return Err(Error::domain(format!("N must be >= 0, got {}", self.n)));
        }
        if !(self.kappa_ratio.is_finite() && self.kappa_ratio > 0.0) {
            return Err(Error::domain(format!("kappa must be > 0, got {}", self.kappa_ratio)));
        }
        if !self.pe_f.is_finite() {
            return Err(Error::domain("Pe_f must be finite"));
        }
        Ok(())
    }

    fn use_upwind(&self) -> bool {
        match self.convection {
            ConvectionScheme::Centered => false,
            ConvectionScheme::Upwind => true,
            ConvectionScheme::Auto => {
                let cell_pe = self.pe_f.abs() * self.grid().spacing() * self.v_f.max_abs();
                if cell_pe > 2.0 {
                    warn!("cell Peclet number {cell_pe:.3} > 2, switching convection to upwind");
                    true
                } else {
                    false
                }
            }
        }
    }

    fn describe(&self) -> String {
        format!(
            "Pe_f = {}, N = {}, kappa = {}, nodes = {}",
            self.pe_f,
            self.n,
            self.kappa_ratio,
            self.grid().len()
        )
    }
}

fn tf(i: usize) -> usize {
    2 * i
}

fn ts(i: usize) -> usize {
    2 * i + 1
}

/// Assembles the interleaved system `(theta_f0, theta_s0, theta_f1, ...)`.
pub fn assemble_coupled(p: &ThermalProblem) -> Result<(BandedMatrix, Vec<f64>)> {
    p.validate()?;
    let grid = p.grid();
    let nn = grid.len();
    let h = grid.spacing();
    let h2 = h * h;
    let v = p.v_f.values();
    let dv = p.dv_f.values();
    let upwind = p.use_upwind();
    let (pe, ne, kap) = (p.pe_f, p.n, p.kappa_ratio);

    let mut m = BandedMatrix::zeros(2 * nn, 2, 2)?;
    let mut rhs = vec![0.0; 2 * nn];

    m.set(tf(0), tf(0), 1.0)?;
    rhs[tf(0)] = 1.0;
    m.set(ts(0), ts(0), 1.0)?;
    rhs[ts(0)] = 1.0;

    // node-0 values are known; fold them into the right-hand side so they stay exact
    let add = |m: &mut BandedMatrix, rhs: &mut [f64], r: usize, c: usize, w: f64| -> Result<()> {
        if c < 2 {
            rhs[r] -= w;
            Ok(())
        } else {
            m.add(r, c, w)
        }
    };
    for i in 1..nn {
        let last = i == nn - 1;
        // ghost node at x = 1 + h mirrors i - 1 so that the centered derivative vanishes
        let (left, right) = (i - 1, if last { i - 1 } else { i + 1 });
        let v_right = if last { v[i - 1] + 2.0 * h * dv[i] } else { v[i + 1] };

        let r = tf(i);
        add(&mut m, &mut rhs, r, tf(left), -1.0 / h2)?;
        add(&mut m, &mut rhs, r, tf(i), 2.0 / h2 + ne)?;
        add(&mut m, &mut rhs, r, tf(right), -1.0 / h2)?;
        add(&mut m, &mut rhs, r, ts(i), -ne * kap)?;
        if upwind {
            if v[i] >= 0.0 {
                add(&mut m, &mut rhs, r, tf(i), pe * v[i] / h)?;
                add(&mut m, &mut rhs, r, tf(left), -pe * v[left] / h)?;
            } else {
                add(&mut m, &mut rhs, r, tf(right), pe * v_right / h)?;
                add(&mut m, &mut rhs, r, tf(i), -pe * v[i] / h)?;
            }
        } else {
            add(&mut m, &mut rhs, r, tf(right), pe * v_right / (2.0 * h))?;
            add(&mut m, &mut rhs, r, tf(left), -pe * v[left] / (2.0 * h))?;
        }
        rhs[r] -= dv[i];

        let r = ts(i);
        add(&mut m, &mut rhs, r, ts(left), -1.0 / h2)?;
        add(&mut m, &mut rhs, r, ts(i), 2.0 / h2 + ne * kap)?;
        add(&mut m, &mut rhs, r, ts(right), -1.0 / h2)?;
        add(&mut m, &mut rhs, r, tf(i), -ne)?;
    }
    Ok((m, rhs))
}

/// Solves for the departure from the uniform inlet state and refines twice.
/// The rest state comes out exact and most LU rounding is removed, which
/// matters for the h^4-scaled fourth-order system.
fn refined_solve(m: &BandedMatrix, rhs: &[f64], p: &ThermalProblem) -> Result<Vec<f64>> {
    let lu = m.factor().map_err(|e| e.with_context(&p.describe()))?;
    let mut z = vec![1.0; rhs.len()];
    for _ in 0..3 {
        let az = m.mul_vec(&z)?;
        let r: Vec<f64> = rhs.iter().zip(&az).map(|(b, a)| b - a).collect();
        let d = lu.solve(&r).map_err(|e| e.with_context(&p.describe()))?;
        z.iter_mut().zip(d).for_each(|(zi, di)| *zi += di);
    }
    Ok(z)
}

/// Solves the coupled steady problem; returns `(theta_f, theta_s)`.
pub fn solve_coupled_steady(p: &ThermalProblem) -> Result<(FieldProfile, FieldProfile)> {
    let (m, rhs) = assemble_coupled(p)?;
    let z = refined_solve(&m, &rhs, p)?;
    let grid = *p.grid();
    let theta_f = z.iter().step_by(2).copied().collect();
    let theta_s = z.iter().skip(1).step_by(2).copied().collect();
    Ok((FieldProfile::new(grid, theta_f)?, FieldProfile::new(grid, theta_s)?))
}

/// `theta_f = kappa theta_s - theta_s'' / N`, with one-sided second derivatives at the ends.
pub fn recover_theta_f(theta_s: &FieldProfile, n: f64, kappa_ratio: f64) -> Result<FieldProfile> {
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::domain(format!(
            "recovering theta_f needs N > 0, got {n}"
        )));
    }
    let d2 = second_derivative(theta_s)?;
    let values = theta_s
        .values()
        .iter()
        .zip(d2.values())
        .map(|(s, s2)| kappa_ratio * s - s2 / n)
        .collect();
    FieldProfile::new(*theta_s.grid(), values)
}

/// Assembles the ghost-node system for the fourth-order equation.
///
/// Unknown `k` holds `theta_s` at node `k - 1`, so index 0 is the ghost at
/// `x = -h` and the last two are ghosts at `1 + h` and `1 + 2h`.
pub fn assemble_fourth_order(p: &ThermalProblem) -> Result<(BandedMatrix, Vec<f64>)> {
    p.validate()?;
    if p.n == 0.0 {
        return Err(Error::domain("the fourth-order form needs N > 0"));
    }
    let grid = p.grid();
    let nn = grid.len();
    let h = grid.spacing();
    let (pe, ne, kap) = (p.pe_f, p.n, p.kappa_ratio);
    let v = p.v_f.values();
    let dv = p.dv_f.values();
    let size = nn + 3;
    let col = |i: isize| (i + 1) as usize;

    let mut m = BandedMatrix::zeros(size, 4, 2)?;
    let mut rhs = vec![0.0; size];

    // kappa s_0 - (s_1 - 2 s_0 + s_-1) / (N h^2) = 1, scaled by h^2
    m.set(0, col(-1), -1.0 / ne)?;
    m.set(0, col(0), kap * h * h + 2.0 / ne)?;
    m.set(0, col(1), -1.0 / ne)?;
    rhs[0] = h * h;
    m.set(1, col(0), 1.0)?;
    rhs[1] = 1.0;

    // interior rows scaled by h^4
    for i in 1..nn {
        let r = i + 1;
        let ii = i as isize;
        let c2 = (ne * (kap + 1.0) + pe * dv[i]) * h * h;
        let c3 = pe * v[i] * h / 2.0;
        let c1 = pe * kap * ne * v[i] * h.powi(3) / 2.0;
        let c0 = pe * kap * ne * dv[i] * h.powi(4);
        // s'''' h^4 = s_{-2} - 4 s_{-1} + 6 s_0 - 4 s_1 + s_2
        // s''' h^3 = (-s_{-2} + 2 s_{-1} - 2 s_1 + s_2) / 2
        let weights = [
            1.0 + c3,
            -4.0 - 2.0 * c3 + (-c2) - c1,
            6.0 + 2.0 * c2 + c0,
            -4.0 + 2.0 * c3 - c2 + c1,
            1.0 - c3,
        ];
        for (k, w) in weights.into_iter().enumerate() {
            m.add(r, col(ii - 2 + k as isize), w)?;
        }
        rhs[r] = -ne * dv[i] * h.powi(4);
    }

    let last = (nn - 1) as isize;
    // s'(1) = 0
    m.set(nn + 1, col(last - 1), -1.0)?;
    m.set(nn + 1, col(last + 1), 1.0)?;
    // kappa s'(1) - s'''(1)/N = 0, scaled by 2 h^3 N
    let k1 = kap * ne * h * h;
    m.set(nn + 2, col(last - 2), 1.0)?;
    m.set(nn + 2, col(last - 1), -k1 - 2.0)?;
    m.set(nn + 2, col(last + 1), k1 + 2.0)?;
    m.set(nn + 2, col(last + 2), -1.0)?;
    Ok((m, rhs))
}

/// Solves the fourth-order reformulation for `theta_s`.
pub fn solve_fourth_order(p: &ThermalProblem) -> Result<FieldProfile> {
    let (m, rhs) = assemble_fourth_order(p)?;
    let z = refined_solve(&m, &rhs, p)?;
    FieldProfile::new(*p.grid(), z[1..p.grid().len() + 1].to_vec())
}

/// Co-registered steady fields of one Cartesian solve.
#[derive(Debug, Clone)]
pub struct SolutionBundle {
    pub grid: Grid1D,
    pub v_f: FieldProfile,
    pub pressure: FieldProfile,
    pub u_s: FieldProfile,
    pub theta_f: FieldProfile,
    pub theta_s: FieldProfile,
}
