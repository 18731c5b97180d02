use crate::error::{Error, Result};

/// Uniform grid of `n` nodes on `[x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Shape(format!("grid needs at least 3 nodes, got {n}")));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::domain(format!(
                "grid bounds must be finite with x_max > x_min, got [{x_min}, {x_max}]"
            )));
        }
        Ok(Self { x_min, x_max, n })
    }

    /// Grid on the unit interval.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(0.0, 1.0, n)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    /// Node `i`. Nodes are computed by interpolation between the end points so
    /// that the first and last are exact.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i < self.n);
        if i + 1 == self.n {
            return self.x_max;
        }
        let t = i as f64 / (self.n - 1) as f64;
        self.x_min + (self.x_max - self.x_min) * t
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Index of node `x` if it coincides with a node of this grid.
    fn exact_index(&self, x: f64) -> Option<usize> {
        let s = (x - self.x_min) / self.spacing();
        let i = s.round();
        if i >= 0.0 && (i as usize) < self.n && (s - i).abs() < 1e-9 {
            Some(i as usize)
        } else {
            None
        }
    }
}

/// Scalar field sampled on the nodes of a [`Grid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct FieldProfile {
    grid: Grid1D,
    values: Vec<f64>,
}

impl FieldProfile {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "profile has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self { grid, values }
    }

    pub fn try_from_fn(grid: Grid1D, f: impl Fn(f64) -> Result<f64>) -> Result<Self> {
        let values = grid.nodes().into_iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Grid1D, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Piecewise-linear interpolation, exact at nodes.
    pub fn interpolate(&self, x: f64) -> Result<f64> {
        let g = &self.grid;
        if x < g.x_min() - 1e-12 || x > g.x_max() + 1e-12 {
            return Err(Error::domain(format!(
                "x = {x} outside profile range [{}, {}]",
                g.x_min(),
                g.x_max()
            )));
        }
        if let Some(i) = g.exact_index(x) {
            return Ok(self.values[i]);
        }
        let s = ((x - g.x_min()) / g.spacing()).clamp(0.0, (g.len() - 1) as f64);
        let i = (s.floor() as usize).min(g.len() - 2);
        let t = s - i as f64;
        Ok(self.values[i] * (1.0 - t) + self.values[i + 1] * t)
    }

    /// Resamples onto `target`, copying values when the grids coincide.
    pub fn resample(&self, target: Grid1D) -> Result<FieldProfile> {
        if target == self.grid {
            return Ok(self.clone());
        }
        FieldProfile::try_from_fn(target, |x| self.interpolate(x))
    }

    /// Maximum absolute difference to `other` on a shared grid.
    pub fn max_abs_diff(&self, other: &FieldProfile) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::Shape("profiles live on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}
