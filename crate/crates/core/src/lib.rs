//! Numerical laboratory for semiclassical Schrodinger eigenfunctions
//! `(-h^2 Laplacian + V) u = E u` on the flat torus `[0,1)^dim`.
//!
//! The crate provides the shared grid/field vocabulary, an FFT-spectral
//! eigensolver, a discrete FBI (coherent-state) transform, semiclassical
//! derivative and analytic-continuation diagnostics, Carleman-weight
//! symbol calculus, nodal-set extraction, and local-mass surveys
//! (tunneling, doubling, vanishing order).

pub mod ball;
pub mod carleman;
pub mod eigensolver;
pub mod error;
pub mod estimates;
pub mod fbi;
pub mod fit;
pub mod grid;
pub mod localization;
pub mod nodal;
pub mod potential;
pub mod spectral;

pub use ball::{ball_l2, ball_l2_norm, ball_mask, BallNorm, BallSpec};
pub use eigensolver::{
    apply_hamiltonian, resolution_for, solve_eigenpairs, weyl_count_check, EigenPair,
    SolveRequest, SolverMode,
};
pub use error::{Error, Result};
pub use grid::{periodic_delta, periodic_dist, wrap_unit, ScalarField, TorusGrid};
pub use potential::{Bump, PotentialSpec, SampledPotential};
pub use spectral::SpectralField;
