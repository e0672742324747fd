//! Simulation and diagnostics toolkit for the Lamb dipole of the 2D Euler
//! equations and for the alpha-SQG family of active scalars.

pub mod cli;
pub mod diagnostics;
pub mod dipole;
pub mod error;
pub mod grid;
pub mod io;
pub mod perturbation;
pub mod quadrature;
pub mod report;
pub mod spectral;
pub mod solver;
pub mod special;
pub mod tracer;

pub use error::{Error, Result};
