//! Shared numerical kernels.

pub mod banded;
pub mod bessel;
pub mod grid;
pub mod quadrature;
pub mod stencil;

pub use banded::{solve_banded, BandedLu, BandedMatrix};
pub use bessel::{i0 as mod_sph_bessel_i0, i1 as mod_sph_bessel_i1, k0 as mod_sph_bessel_k0};
pub use grid::{FieldProfile, Grid1D};
pub use quadrature::integrate_simpson;
