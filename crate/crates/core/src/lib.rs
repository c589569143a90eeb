//! Spectral solver and numerical checks for the Airy L⁸ Strichartz functional.
//!
//! Fields live on a periodic frequency grid ([`spectral::FourierGrid`]) and are
//! evolved exactly in frequency. The modules build on each other roughly in
//! the order they are declared.

// Validation uses `!(x > 0.0)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fit;
pub mod spectral;
pub mod airy;
pub mod functional;
pub mod symmetry;
pub mod multilinear;
pub mod bilinear;
pub mod decay;
pub mod profile;
pub mod io;

pub use error::{Error, Result};
pub use spectral::{FourierGrid, SpaceTimeField, SpaceTimeGrid, SpectralField, TimeWindow, C64};
pub use functional::{solve_extremiser, strichartz_ratio, ExtremiserReport, SolverOptions};
pub use symmetry::SymmetryElement;
