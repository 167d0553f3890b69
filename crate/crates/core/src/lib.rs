//! Allen–Cahn flow with homogeneous Neumann data on a disk, and the
//! diagnostics that go with it: diffuse energy and discrepancy measures,
//! backward heat kernels reflected across the boundary, discrete varifolds
//! and their first variation, contact angles.
//!
//! The crate is `no_std` and only needs `alloc`. All file formats, the
//! experiment harness and the command line live in the `acflow` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod contour;
pub mod diagnostics;
pub mod error;
pub mod fft;
pub mod geometry;
pub mod grid;
pub mod kernels;
pub mod measures;
pub mod potential;
pub mod solver;
pub mod sum;
pub mod tridiag;
pub mod varifold;

pub use error::Error;
pub use geometry::{CutoffEta, DiskGeometry, Vec2};
pub use grid::{PolarGrid, ScalarField};
pub use potential::{DoubleWell, PotentialSpec, Quartic};

pub use diagnostics::{DiagnosticsRow, DiagnosticsTable};
pub use solver::{Interface, Scheme, SolverConfig, State};
