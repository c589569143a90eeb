//! Shared fixtures for the kernel benchmarks.

use airy_core::{FourierGrid, SpaceTimeGrid, SpectralField};

pub fn gaussian_fixture(n_modes: usize, dk: f64, t_max: f64, n_t: usize) -> (SpectralField, SpaceTimeGrid) {
    let grid = FourierGrid::new(n_modes, dk).expect("benchmark grid");
    let stg = SpaceTimeGrid::uniform(grid, t_max, n_t).expect("benchmark window");
    (SpectralField::gaussian(grid), stg)
}
