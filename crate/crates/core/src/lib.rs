//! Determining projections for 2D incompressible Navier–Stokes flows on the
//! periodic box, with executable checks of the associated a priori estimates.

pub mod error;
pub mod estimates;
pub mod experiment;
pub mod operators;
pub mod projections;
pub mod quadrature;
pub mod snapshot;
pub mod solver;
pub mod spectral;
pub mod viscosity;

pub use error::{Error, Result};
pub use spectral::{
    compute_norms, leray_project, NormReport, ScalarField, SpectralField, Spectrum,
};
