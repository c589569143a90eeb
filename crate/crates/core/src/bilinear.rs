//! Bilinear L⁴ interaction of frequency-separated waves.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::airy::grid_matches;
use crate::error::{Error, Result};
use crate::fit::{log_log_fit, median, LinearFit};
use crate::functional::DEFAULT_PAD;
use crate::spectral::{l2_norm, synthesize_into, FourierGrid, SpaceTimeGrid, SpectralField, C64};

/// Two-sided band `|k| ∈ [lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSpec {
    pub lo: f64,
    pub hi: f64,
}

impl BandSpec {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidArgument(format!("band needs 0 ≤ lo < hi, got [{lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, k: f64) -> bool {
        k.abs() >= self.lo && k.abs() < self.hi
    }
}

/// Unit-norm field with i.i.d. complex Gaussian coefficients inside `band`.
pub fn random_band_field(grid: FourierGrid, band: BandSpec, seed: u64) -> Result<SpectralField> {
    if band.hi > grid.cutoff() + 0.5 * grid.dk() {
        return Err(Error::Unresolved(format!(
            "band [{}, {}) exceeds the grid cutoff {}",
            band.lo,
            band.hi,
            grid.cutoff()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<C64> = (0..grid.n_modes())
        .map(|i| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            if band.contains(grid.k(i)) {
                C64::new(re, im)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    let f = SpectralField::new(grid, coeffs)?;
    if f.is_zero() {
        return Err(Error::InvalidArgument(format!("band [{}, {}) holds no grid modes", band.lo, band.hi)));
    }
    f.normalized()
}

/// `‖u₁u₂‖_{L⁴_{t,x}}` on the window without normalization, alias free.
pub fn product_l4(f1: &SpectralField, f2: &SpectralField, stg: &SpaceTimeGrid) -> Result<f64> {
    let grid = *f1.grid();
    if !grid_matches(&grid, f2.grid()) || !grid_matches(&grid, stg.spatial()) {
        return Err(Error::GridMismatch);
    }
    let pad = DEFAULT_PAD;
    let nx = grid.n_modes() * pad;
    let dx = grid.box_length() / nx as f64;
    let ks = grid.wavenumbers();
    let nodes: Vec<(f64, f64)> = stg.times().iter().copied().zip(stg.weights().iter().copied()).collect();
    let parts: Vec<f64> = nodes
        .par_chunks(8)
        .map(|chunk| {
            let mut c = vec![C64::new(0.0, 0.0); grid.n_modes()];
            let mut a = vec![C64::new(0.0, 0.0); nx];
            let mut b = vec![C64::new(0.0, 0.0); nx];
            let mut acc = 0.0;
            for &(t, w) in chunk {
                for (buf, f) in [(&mut a, f1), (&mut b, f2)] {
                    for ((ci, f0), &k) in c.iter_mut().zip(f.coeffs()).zip(&ks) {
                        *ci = f0 * Complex64::from_polar(1.0, t * k * k * k);
                    }
                    synthesize_into(&grid, &c, pad, buf);
                }
                let s: f64 = a.iter().zip(&b).map(|(x, y)| (x.norm_sqr() * y.norm_sqr()).powi(2)).sum();
                acc += w * s * dx;
            }
            acc
        })
        .collect();
    let total: f64 = parts.iter().sum();
    if !total.is_finite() {
        return Err(Error::NonFinite("bilinear product"));
    }
    Ok(total.powf(0.25))
}

/// `‖e^{-t∂³}f₁ · e^{-t∂³}f₂‖_{L⁴} / (‖f₁‖₂‖f₂‖₂)`.
pub fn bilinear_ratio(f1: &SpectralField, f2: &SpectralField, stg: &SpaceTimeGrid) -> Result<f64> {
    let n1 = l2_norm(f1);
    let n2 = l2_norm(f2);
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(product_l4(f1, f2, stg)? / (n1 * n2))
}

/// Window policy for the separation sweep: `T(N₂) = t_ref (n_ref/N₂)²` so the
/// transport `3N₂²T` is the same for every band, with enough nodes to resolve
/// the fastest temporal phase `(2N₂)³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationWindow {
    pub t_ref: f64,
    pub n_ref: f64,
    pub samples_per_period: f64,
    pub min_nodes: usize,
}

impl SeparationWindow {
    pub fn for_band(&self, grid: FourierGrid, n2: f64) -> Result<SpaceTimeGrid> {
        let t = self.t_ref * (self.n_ref / n2).powi(2);
        let omega = (2.0 * n2).powi(3);
        let periods = 2.0 * t * omega / (2.0 * std::f64::consts::PI);
        let mut nodes = ((periods * self.samples_per_period).ceil() as usize).max(self.min_nodes);
        if nodes % 2 == 0 {
            nodes += 1;
        }
        SpaceTimeGrid::uniform(grid, t, nodes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationRow {
    pub n1: f64,
    pub n2: f64,
    pub seed: u64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationResult {
    pub rows: Vec<SeparationRow>,
    pub medians: Vec<(f64, f64)>,
    pub fit: LinearFit,
    /// Decay strictly faster than the reference exponent.
    pub steeper_than: Option<f64>,
}

/// Median bilinear ratio per `N₂` with `f₁` in `[0, N₁)` and `f₂` in `[N₂, 2N₂)`,
/// and the log-log slope of the medians.
pub fn separation_experiment(
    grid: FourierGrid,
    n1: f64,
    n2_values: &[f64],
    window: SeparationWindow,
    seeds: &[u64],
    reference_slope: f64,
) -> Result<SeparationResult> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("separation experiment needs at least one seed".into()));
    }
    let low_band = BandSpec::new(0.0, n1)?;
    let jobs: Vec<(f64, u64)> = n2_values.iter().flat_map(|&n2| seeds.iter().map(move |&s| (n2, s))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(n2, seed)| {
            let high = BandSpec::new(n2, 2.0 * n2)?;
            let f1 = random_band_field(grid, low_band, seed.wrapping_mul(2))?;
            let f2 = random_band_field(grid, high, seed.wrapping_mul(2).wrapping_add(1))?;
            let stg = window.for_band(grid, n2)?;
            Ok(SeparationRow { n1, n2, seed, ratio: bilinear_ratio(&f1, &f2, &stg)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let medians: Vec<(f64, f64)> = n2_values
        .iter()
        .map(|&n2| {
            let vals: Vec<f64> = rows.iter().filter(|r| r.n2 == n2).map(|r| r.ratio).collect();
            (n2, median(&vals).expect("seeds are nonempty"))
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = medians.iter().copied().unzip();
    let fit = log_log_fit(&xs, &ys)?;
    let steeper_than = (fit.slope < reference_slope).then_some(reference_slope);
    Ok(SeparationResult { rows, medians, fit, steeper_than })
}
