//! Numerical laboratory for quadratic matrix ODEs `dX/dt = B·X·X` and its
//! variants: exact resolvent solutions, spectral blowup-time prediction,
//! adaptive Runge–Kutta integration with pole extrapolation, and
//! random-matrix Monte Carlo sweeps.

pub mod closedform;
pub mod harness;
pub mod integrator;
pub mod linalg;

pub use linalg::Matrix;
