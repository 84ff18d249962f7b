//! Hybrid numerical-asymptotic Galerkin boundary element solver for
//! time-harmonic 2D acoustic scattering by collinear sound-soft screens.

pub mod assembly;
pub mod error;
pub mod geometry;
pub mod hna_space;
pub mod linalg;
pub mod postprocess;
pub mod quadrature;
pub mod reference_bem;
pub mod specfun;

pub use error::{HnaError, Result};
pub use num_complex::Complex64;
