//! Solvers for a biphasic thermo-poroelastic mixture: closed-form steady
//! hydrodynamics in spherical and Cartesian geometry, steady two-temperature
//! heat transfer, and a transient radially symmetric simulation.

pub mod cartesian;
pub mod config;
pub mod csv_io;
pub mod driver;
pub mod error;
pub mod numerics;
pub mod parameters;
pub mod spherical;
pub mod thermal;
pub mod transient;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use numerics::{FieldProfile, Grid1D};
pub use parameters::{nondimensionalize, DimensionalParams, NondimGroups};
