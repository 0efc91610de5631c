//! Slender-body Stokes hydrodynamics on closed filaments.
//!
//! The crate is organised bottom-up:
//!
//! - [`specfun`]: modified Bessel functions and their ratios
//! - [`multipliers`]: Fourier symbols on the straight periodic cylinder
//! - [`geometry`]: Fourier curves, frames and the tubular surface
//! - [`fields`]: periodic vector fields, the frame map and θ-projections
//! - [`layers`]: Stokes kernels and on-surface quadrature
//! - [`bvp`]: straight and curved Dirichlet/Neumann solves
//! - [`evolution`]: exponential integrator for the filament evolution
//! - [`io`]: file formats shared with the command-line tool

pub mod bvp;
pub mod error;
pub mod evolution;
pub mod fields;
pub mod geometry;
pub mod io;
pub mod layers;
pub mod multipliers;
pub mod quadrature;
pub mod specfun;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/symbols.md")]
    struct Symbols;
    #[doc = include_str!("../../../book/src/surfaces.md")]
    struct Surfaces;
    #[doc = include_str!("../../../book/src/evolution.md")]
    struct Evolution;
}
