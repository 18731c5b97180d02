//! Second-order finite-difference derivatives on uniform grids.
//!
//! Interior nodes use central differences; the end nodes use one-sided
//! three-point (first derivative) and four-point (second derivative) formulas
//! of the same order.

use crate::error::{Error, Result};
use crate::numerics::grid::FieldProfile;

pub fn first_derivative(f: &FieldProfile) -> FieldProfile {
    let h = f.grid().spacing();
    let v = f.values();
    let n = v.len();
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    for i in 1..n - 1 {
        d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    }
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    FieldProfile::new(*f.grid(), d).expect("same grid")
}

/// Needs at least four nodes for the one-sided end formulas.
pub fn second_derivative(f: &FieldProfile) -> Result<FieldProfile> {
    let v = f.values();
    let n = v.len();
    if n < 4 {
        return Err(Error::Shape(format!(
            "second derivative needs at least 4 nodes, got {n}"
        )));
    }
    let h2 = f.grid().spacing().powi(2);
    let mut d = vec![0.0; n];
    d[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
    for i in 1..n - 1 {
        d[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
    }
    d[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2;
    FieldProfile::new(*f.grid(), d)
}
