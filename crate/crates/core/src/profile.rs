//! Bubbles transported by scaling, translation and time translation, and the
//! decoupling diagnostics between them.

use rayon::prelude::*;

use crate::airy::grid_matches;
use crate::bilinear::product_l4;
use crate::error::{Error, Result};
use crate::functional::{window_norm8_pow, DEFAULT_PAD};
use crate::spectral::{SpaceTimeGrid, SpectralField, TimeWindow};
use crate::symmetry::{apply, SymmetryElement};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BubbleParams {
    pub h: f64,
    pub x0: f64,
    pub t0: f64,
}

impl BubbleParams {
    pub fn new(h: f64, x0: f64, t0: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite() && x0.is_finite() && t0.is_finite()) {
            return Err(Error::InvalidArgument(format!("bubble needs h > 0 and finite x0, t0, got ({h}, {x0}, {t0})")));
        }
        Ok(Self { h, x0, t0 })
    }

    pub const fn identity() -> Self {
        Self { h: 1.0, x0: 0.0, t0: 0.0 }
    }

    /// `e^{t₀∂³} g_{0,x₀,h}` as a symmetry element.
    pub fn element(&self) -> Result<SymmetryElement> {
        SymmetryElement::new(0.0, self.x0, self.h, self.t0, 0.0)
    }

    /// Base window carried to this bubble: `t ↦ h³t + t₀`.
    pub fn window(&self, base: &TimeWindow) -> TimeWindow {
        let h3 = self.h.powi(3);
        TimeWindow {
            center: h3 * base.center + self.t0,
            half_width: h3 * base.half_width,
            step: h3 * base.step,
        }
    }
}

impl Default for BubbleParams {
    fn default() -> Self {
        Self::identity()
    }
}

/// `h₁/h₂ + h₂/h₁ + |t₁−t₂|/h₁³ + |x₁−x₂|/h₁`.
pub fn orthogonality_divergence(p1: &BubbleParams, p2: &BubbleParams) -> f64 {
    p1.h / p2.h + p2.h / p1.h + (p1.t0 - p2.t0).abs() / p1.h.powi(3) + (p1.x0 - p2.x0).abs() / p1.h
}

pub fn bubble(phi: &SpectralField, p: &BubbleParams) -> Result<SpectralField> {
    apply(&p.element()?, phi)
}

/// `Σ e^{t_j∂³} g_j φ_j` on the common grid.
pub fn synthesize_bubbles(bubbles: &[(SpectralField, BubbleParams)]) -> Result<SpectralField> {
    let (first, rest) = bubbles
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("no bubbles to synthesize".into()))?;
    let grid = *first.0.grid();
    let mut sum = SpectralField::zeros(grid);
    for (phi, p) in std::iter::once(first).chain(rest) {
        if !grid_matches(&grid, phi.grid()) {
            return Err(Error::GridMismatch);
        }
        sum = sum.add(&bubble(phi, p)?)?;
    }
    Ok(sum)
}

/// Base time window of an unmoved profile and the grading of union windows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowPlan {
    pub base: TimeWindow,
    pub grading: f64,
}

impl WindowPlan {
    pub fn base_grid(&self, phi: &SpectralField) -> Result<SpaceTimeGrid> {
        SpaceTimeGrid::multiscale(*phi.grid(), &[self.base], self.grading)
    }

    /// Union of the covariant windows of every bubble.
    pub fn union_grid(&self, phi: &SpectralField, params: &[BubbleParams]) -> Result<SpaceTimeGrid> {
        let windows: Vec<TimeWindow> = params.iter().map(|p| p.window(&self.base)).collect();
        SpaceTimeGrid::multiscale(*phi.grid(), &windows, self.grading)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdditivityRecord {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_gap: f64,
}

/// `‖Σ e^{-(t-t_j)∂³} g_j φ_j‖₈⁸` against `Σ_j ‖e^{-(t-t_j)∂³} g_j φ_j‖₈⁸`, both on
/// the union window. Each term on the right equals `‖e^{-t∂³}φ_j‖₈⁸` over the
/// pulled-back window, so a single bubble has zero gap.
pub fn l8_additivity_check(bubbles: &[(SpectralField, BubbleParams)], plan: &WindowPlan) -> Result<AdditivityRecord> {
    if bubbles.is_empty() {
        return Err(Error::InvalidArgument("additivity needs at least one bubble".into()));
    }
    let sum = synthesize_bubbles(bubbles)?;
    let params: Vec<BubbleParams> = bubbles.iter().map(|(_, p)| *p).collect();
    let union = plan.union_grid(&sum, &params)?;
    let lhs = window_norm8_pow(&sum, &union, DEFAULT_PAD)?;
    let rhs = bubbles
        .iter()
        .map(|(phi, p)| window_norm8_pow(&bubble(phi, p)?, &union, DEFAULT_PAD))
        .sum::<Result<f64>>()?;
    if rhs == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(AdditivityRecord { lhs, rhs, rel_gap: (lhs - rhs).abs() / rhs })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecouplingRow {
    pub divergence: f64,
    pub cross_l4: f64,
    pub l8_lhs: f64,
    pub l8_rhs: f64,
}

/// Cross term `‖e^{-(t-t¹)∂³}g¹φ¹ · e^{-(t-t²)∂³}g²φ²‖_{L⁴}` and the two-bubble
/// additivity sides along a parameter path.
pub fn decoupling_experiment(
    phi1: &SpectralField,
    phi2: &SpectralField,
    path: &[(BubbleParams, BubbleParams)],
    plan: &WindowPlan,
) -> Result<Vec<DecouplingRow>> {
    if !grid_matches(phi1.grid(), phi2.grid()) {
        return Err(Error::GridMismatch);
    }
    path.par_iter()
        .map(|(p1, p2)| {
            let b1 = bubble(phi1, p1)?;
            let b2 = bubble(phi2, p2)?;
            let union = plan.union_grid(phi1, &[*p1, *p2])?;
            let cross_l4 = product_l4(&b1, &b2, &union)?;
            let add = l8_additivity_check(&[(phi1.clone(), *p1), (phi2.clone(), *p2)], plan)?;
            Ok(DecouplingRow {
                divergence: orthogonality_divergence(p1, p2),
                cross_l4,
                l8_lhs: add.lhs,
                l8_rhs: add.rhs,
            })
        })
        .collect()
}
