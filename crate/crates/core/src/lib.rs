//! Pseudo-spectral simulation and verification lab for the two-dimensional
//! Navier–Stokes equations driven by space-time white noise on the torus.

pub mod cli;
pub mod error;
pub mod galerkin;
pub mod monitor;
pub mod noise;
pub mod operator;
pub mod paracalc;
pub mod solver;
pub mod spectral;

pub use error::{Result, SnsError};
