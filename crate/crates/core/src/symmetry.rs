//! Phase, translation, scaling and time-translation symmetries, plus the
//! frequency boost, which is not a symmetry of the functional.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::airy::{evolve_symbol, propagate_with};
use crate::error::{Error, Result};
use crate::fit::{linear_fit, LinearFit};
use crate::functional::{boundary_mass_fraction, strichartz_ratio, DEFAULT_PAD, ADEQUACY_TOL};
use crate::spectral::{evaluate_transform, l2_norm, FourierGrid, SpaceTimeGrid, SpectralField, C64};

/// `f ↦ e^{ixξ₀} e^{t₀∂³} [h₀^{-1/2} e^{iθ} f((x − x₀)/h₀)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryElement {
    pub theta: f64,
    pub x0: f64,
    pub h0: f64,
    pub t0: f64,
    pub xi0: f64,
}

impl Default for SymmetryElement {
    fn default() -> Self {
        Self::identity()
    }
}

impl SymmetryElement {
    pub fn identity() -> Self {
        Self { theta: 0.0, x0: 0.0, h0: 1.0, t0: 0.0, xi0: 0.0 }
    }

    pub fn new(theta: f64, x0: f64, h0: f64, t0: f64, xi0: f64) -> Result<Self> {
        if !(h0 > 0.0 && h0.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale must be positive, got {h0}")));
        }
        if ![theta, x0, t0, xi0].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("symmetry parameters"));
        }
        Ok(Self { theta: theta.rem_euclid(2.0 * PI), x0, h0, t0, xi0 })
    }

    pub fn phase(theta: f64) -> Self {
        Self { theta: theta.rem_euclid(2.0 * PI), ..Self::identity() }
    }

    pub fn translation(x0: f64) -> Self {
        Self { x0, ..Self::identity() }
    }

    pub fn scaling(h0: f64) -> Self {
        Self { h0, ..Self::identity() }
    }

    pub fn time_shift(t0: f64) -> Self {
        Self { t0, ..Self::identity() }
    }

    pub fn boost(xi0: f64) -> Self {
        Self { xi0, ..Self::identity() }
    }

    /// `self ∘ first` on the boost-free subgroup.
    pub fn compose(&self, first: &Self) -> Result<Self> {
        if self.xi0 != 0.0 || first.xi0 != 0.0 {
            return Err(Error::InvalidArgument("composition is only closed for xi0 = 0".into()));
        }
        Self::new(
            self.theta + first.theta,
            self.x0 + self.h0 * first.x0,
            self.h0 * first.h0,
            self.t0 + self.h0.powi(3) * first.t0,
            0.0,
        )
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.xi0 != 0.0 {
            return Err(Error::InvalidArgument("inverse is only closed for xi0 = 0".into()));
        }
        let h = 1.0 / self.h0;
        Self::new(-self.theta, -h * self.x0, h, -h.powi(3) * self.t0, 0.0)
    }

    fn multiplier(&self, k: f64) -> C64 {
        Complex64::from_polar(1.0, self.theta - k * self.x0 - self.t0 * k * k * k)
    }
}

/// Fraction of mass allowed to fall off the grid before an element is rejected.
const LOST_MASS_TOL: f64 = 1e-10;

/// Applies `g` on the grid of `f`.
///
/// Phase, translation and time translation are exact multipliers. A scale
/// `h₀ ≠ 1` or an off-grid boost resamples the box-restricted transform.
pub fn apply(g: &SymmetryElement, f: &SpectralField) -> Result<SpectralField> {
    let grid = *f.grid();
    let scaled = if g.h0 == 1.0 {
        f.clone()
    } else {
        let qs: Vec<f64> = grid.wavenumbers().iter().map(|k| g.h0 * k).collect();
        let s = g.h0.sqrt();
        SpectralField::new(grid, evaluate_transform(f, &qs).into_iter().map(|c| c * s).collect())?
    };
    let moved = scaled.map_modes(|k| g.multiplier(k));
    let out = if g.xi0 == 0.0 { moved } else { shift_frequency(&moved, g.xi0)? };
    let before = l2_norm(f).powi(2);
    if before > 0.0 {
        let lost = (before - l2_norm(&out).powi(2)) / before;
        if lost.abs() > LOST_MASS_TOL {
            return Err(Error::Unresolved(format!(
                "symmetry element {g:?} changes the resolved mass by a fraction {lost:.3e}"
            )));
        }
    }
    Ok(out)
}

/// `f̂(k) ↦ f̂(k − ξ₀)`; grid multiples of `dk` shift slots, others resample.
fn shift_frequency(f: &SpectralField, xi0: f64) -> Result<SpectralField> {
    let grid = *f.grid();
    let steps = xi0 / grid.dk();
    if steps == steps.round() {
        let s = steps as i64;
        let mut coeffs = vec![C64::new(0.0, 0.0); grid.n_modes()];
        for (i, c) in f.coeffs().iter().enumerate() {
            if let Some(slot) = grid.slot(grid.mode(i) + s) {
                coeffs[slot] = *c;
            }
        }
        SpectralField::new(grid, coeffs)
    } else {
        let qs: Vec<f64> = grid.wavenumbers().iter().map(|k| k - xi0).collect();
        SpectralField::new(grid, evaluate_transform(f, &qs))
    }
}

/// Exact action on a rescaled grid: `dk ↦ dk/h₀` with the same mode count,
/// so every coefficient keeps its slot.
pub fn apply_covariant(g: &SymmetryElement, f: &SpectralField) -> Result<SpectralField> {
    if g.xi0 != 0.0 {
        return Err(Error::InvalidArgument("covariant action is boost free".into()));
    }
    let grid = FourierGrid::new(f.grid().n_modes(), f.grid().dk() / g.h0)?;
    let s = g.h0.sqrt();
    let coeffs = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| c * s * g.multiplier(grid.k(i)))
        .collect();
    SpectralField::new(grid, coeffs)
}

/// Window transformed with the element: `t ↦ h₀³t + t₀` on the box of [`apply_covariant`].
pub fn covariant_window(g: &SymmetryElement, stg: &SpaceTimeGrid) -> Result<SpaceTimeGrid> {
    let grid = FourierGrid::new(stg.spatial().n_modes(), stg.spatial().dk() / g.h0)?;
    Ok(stg.affine(g.h0.powi(3), g.t0).with_spatial(grid))
}

/// `|R(g f) − R(f)|` with the window carried along by `g`.
pub fn ratio_invariance(f: &SpectralField, g: &SymmetryElement, stg: &SpaceTimeGrid) -> Result<f64> {
    if g.xi0 != 0.0 {
        return Err(Error::InvalidArgument("ratio invariance is defined for xi0 = 0".into()));
    }
    let image = apply_covariant(g, f)?;
    let window = covariant_window(g, stg)?;
    Ok((strichartz_ratio(&image, &window)? - strichartz_ratio(f, stg)?).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostPoint {
    pub n: f64,
    pub norm8: f64,
    /// Half width of the moving-frame time window `t' = 3Nt`.
    pub t_prime_max: f64,
    /// Lab-frame half window `t'/(3N)`.
    pub t_lab_max: f64,
    pub box_length: f64,
    pub boundary_mass: f64,
}

impl BoostPoint {
    pub fn window_params(&self) -> String {
        format!(
            "t_prime_max={};t_lab_max={};box={};boundary_mass={:e}",
            self.t_prime_max, self.t_lab_max, self.box_length, self.boundary_mass
        )
    }
}

/// `‖e^{-t∂³}[e^{ixN}φ]‖_{L⁸}` evaluated in the frame `x' = x + 3N²t`, `t' = 3Nt`,
/// where the flow has symbol `ξ² + ξ³/(3N)` and `dt dx = dt' dx' / (3N)`.
/// `stg` is the window in primed coordinates. `N = 0` is the plain lab-frame norm.
pub fn boost_norm8(phi: &SpectralField, n: f64, stg: &SpaceTimeGrid) -> Result<BoostPoint> {
    if !(n >= 0.0 && n.is_finite()) {
        return Err(Error::InvalidArgument(format!("boost frequency must be nonnegative, got {n}")));
    }
    let (u, jacobian) = if n == 0.0 {
        (evolve_symbol(phi, stg, DEFAULT_PAD, |k| k * k * k)?, 1.0)
    } else {
        let c = 1.0 / (3.0 * n);
        (evolve_symbol(phi, stg, DEFAULT_PAD, move |k| k * k + c * k * k * k)?, c)
    };
    let pow: f64 = u.slice_powers(8.0).iter().zip(stg.weights()).map(|(s, w)| s * w).sum();
    let (lo, hi) = stg.t_range();
    let mut boundary: f64 = 0.0;
    for t in [lo, hi] {
        let end = if n == 0.0 {
            propagate_with(phi, t, |k| k * k * k)?
        } else {
            let c = 1.0 / (3.0 * n);
            propagate_with(phi, t, move |k| k * k + c * k * k * k)?
        };
        boundary = boundary.max(boundary_mass_fraction(&end));
    }
    let t_prime_max = stg.t_max();
    Ok(BoostPoint {
        n,
        norm8: (jacobian * pow).powf(0.125),
        t_prime_max,
        t_lab_max: if n == 0.0 { t_prime_max } else { t_prime_max / (3.0 * n) },
        box_length: stg.spatial().box_length(),
        boundary_mass: boundary,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoostExperiment {
    pub points: Vec<BoostPoint>,
    pub fit: LinearFit,
}

impl BoostExperiment {
    pub fn slope(&self) -> f64 {
        self.fit.slope
    }
}

/// Least-squares slope of `log ‖·‖₈` against `log N` over the positive `n_values`.
pub fn boost_decay_experiment(phi: &SpectralField, n_values: &[f64], stg: &SpaceTimeGrid) -> Result<BoostExperiment> {
    let points = n_values
        .par_iter()
        .map(|&n| boost_norm8(phi, n, stg))
        .collect::<Result<Vec<_>>>()?;
    if let Some(p) = points.iter().find(|p| p.boundary_mass > ADEQUACY_TOL) {
        return Err(Error::WindowLost { fraction: p.boundary_mass });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| p.n > 0.0)
        .map(|p| (p.n.ln(), p.norm8.ln()))
        .unzip();
    let fit = linear_fit(&xs, &ys)?;
    Ok(BoostExperiment { points, fit })
}
