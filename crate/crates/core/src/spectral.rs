//! Frequency grids, spectral fields and the transforms between frequency and
//! physical space.
//!
//! Coefficients approximate `f̂(k) = (2π)^{-1/2} ∫ e^{-ixk} f(x) dx` at the
//! wavenumbers `k_j = j·dk`, `j ∈ [-n/2, n/2)`, stored in ascending order.
//! Physical samples live on the periodic box `[-L/2, L/2)` at
//! `x_m = (m - n/2)·dx`.

use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};

pub type C64 = Complex64;

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER
        .get_or_init(|| Mutex::new(FftPlanner::new()))
        .lock()
        .expect("fft planner poisoned")
        .plan_fft(len, direction)
}

#[inline]
fn alternating(j: i64) -> f64 {
    if j.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierGrid {
    n_modes: usize,
    dk: f64,
}

impl FourierGrid {
    pub fn new(n_modes: usize, dk: f64) -> Result<Self> {
        if n_modes < 8 || n_modes % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "n_modes must be even and at least 8, got {n_modes}"
            )));
        }
        if !(dk.is_finite() && dk > 0.0) {
            return Err(Error::InvalidGrid(format!("dk must be positive, got {dk}")));
        }
        Ok(Self { n_modes, dk })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dk(&self) -> f64 {
        self.dk
    }

    /// Largest resolved wavenumber magnitude, `n/2 · dk`.
    pub fn cutoff(&self) -> f64 {
        (self.n_modes / 2) as f64 * self.dk
    }

    pub fn box_length(&self) -> f64 {
        2.0 * PI / self.dk
    }

    pub fn dx(&self) -> f64 {
        self.box_length() / self.n_modes as f64
    }

    /// Signed mode number of storage slot `i`.
    #[inline]
    pub fn mode(&self, i: usize) -> i64 {
        i as i64 - (self.n_modes / 2) as i64
    }

    #[inline]
    pub fn k(&self, i: usize) -> f64 {
        self.mode(i) as f64 * self.dk
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n_modes).map(|i| self.k(i)).collect()
    }

    /// Storage slot of signed mode `j`, if resolved.
    pub fn slot(&self, j: i64) -> Option<usize> {
        let half = (self.n_modes / 2) as i64;
        (-half..half).contains(&j).then(|| (j + half) as usize)
    }

    /// Physical sample positions on a grid oversampled by `pad`.
    pub fn positions(&self, pad: usize) -> Vec<f64> {
        let m = self.n_modes * pad;
        let dx = self.box_length() / m as f64;
        (0..m).map(|p| (p as f64 - (m / 2) as f64) * dx).collect()
    }

    /// Same box, `factor` times as many modes.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.n_modes * factor, self.dk)
    }

    pub(crate) fn same_as(&self, other: &Self) -> bool {
        self.n_modes == other.n_modes && self.dk.to_bits() == other.dk.to_bits()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: FourierGrid,
    coeffs: Vec<C64>,
}

impl SpectralField {
    pub fn new(grid: FourierGrid, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != grid.n_modes() {
            return Err(Error::DimensionMismatch {
                expected: grid.n_modes(),
                got: coeffs.len(),
            });
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite("field coefficients"));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: FourierGrid) -> Self {
        Self {
            grid,
            coeffs: vec![C64::new(0.0, 0.0); grid.n_modes()],
        }
    }

    /// Samples `profile(k_j)` at every mode.
    pub fn from_fn(grid: FourierGrid, mut profile: impl FnMut(f64) -> C64) -> Result<Self> {
        let coeffs = (0..grid.n_modes()).map(|i| profile(grid.k(i))).collect();
        Self::new(grid, coeffs)
    }

    /// Unit-mass Gaussian `π^{-1/4} e^{-k²/2}`.
    pub fn gaussian(grid: FourierGrid) -> Self {
        let a = PI.powf(-0.25);
        Self::from_fn(grid, |k| C64::new(a * (-0.5 * k * k).exp(), 0.0))
            .expect("gaussian coefficients are finite")
    }

    pub fn grid(&self) -> &FourierGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// Multiplies mode `i` by `multiplier(k_i)`.
    pub fn map_modes(&self, multiplier: impl Fn(f64) -> C64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * multiplier(self.grid.k(i)))
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = l2_norm(self);
        if norm == 0.0 {
            return Err(Error::ZeroField);
        }
        Ok(self.scale(C64::new(1.0 / norm, 0.0)))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &Self, op: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| op(*a, *b))
            .collect();
        Ok(Self {
            grid: self.grid,
            coeffs,
        })
    }
}

/// Samples `coeffs` on the box at `n·pad` points.
pub(crate) fn synthesize_into(grid: &FourierGrid, coeffs: &[C64], pad: usize, out: &mut [C64]) {
    let n = grid.n_modes();
    let m = n * pad;
    debug_assert_eq!(out.len(), m);
    out.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
    let scale = grid.dk() / (2.0 * PI).sqrt();
    for (i, c) in coeffs.iter().enumerate() {
        let j = grid.mode(i);
        out[j.rem_euclid(m as i64) as usize] = c * (alternating(j) * scale);
    }
    plan(m, FftDirection::Inverse).process(out);
}

/// Transform of `samples` (length `n·pad`) truncated to the `n` working modes.
pub(crate) fn analyze_into(grid: &FourierGrid, samples: &mut [C64], pad: usize, out: &mut [C64]) {
    let n = grid.n_modes();
    let m = n * pad;
    debug_assert_eq!(samples.len(), m);
    plan(m, FftDirection::Forward).process(samples);
    let scale = grid.box_length() / m as f64 / (2.0 * PI).sqrt();
    for (i, o) in out.iter_mut().enumerate() {
        let j = grid.mode(i);
        *o = samples[j.rem_euclid(m as i64) as usize] * (alternating(j) * scale);
    }
}

/// Physical-space samples of `f` at the working resolution.
pub fn synthesize(f: &SpectralField) -> Vec<C64> {
    synthesize_padded(f, 1)
}

/// Physical-space samples on a grid oversampled by `pad` (zero-padded modes).
pub fn synthesize_padded(f: &SpectralField, pad: usize) -> Vec<C64> {
    let pad = pad.max(1);
    let mut out = vec![C64::new(0.0, 0.0); f.grid.n_modes() * pad];
    synthesize_into(&f.grid, &f.coeffs, pad, &mut out);
    out
}

pub fn analyze(samples: &[C64], grid: FourierGrid) -> Result<SpectralField> {
    analyze_padded(samples, grid, 1)
}

/// Inverse of [`synthesize_padded`]; modes beyond the working band are dropped.
pub fn analyze_padded(samples: &[C64], grid: FourierGrid, pad: usize) -> Result<SpectralField> {
    let pad = pad.max(1);
    let expected = grid.n_modes() * pad;
    if samples.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: samples.len(),
        });
    }
    let mut buf = samples.to_vec();
    let mut coeffs = vec![C64::new(0.0, 0.0); grid.n_modes()];
    analyze_into(&grid, &mut buf, pad, &mut coeffs);
    SpectralField::new(grid, coeffs)
}

/// Transform of the box-restricted function evaluated at arbitrary
/// wavenumbers: `(2π)^{-1/2} dx Σ_m f(x_m) e^{-i q x_m}`.
///
/// Reproduces the stored coefficient exactly when `q` is a grid wavenumber.
/// The samples are oversampled far enough that no `q` aliases.
pub fn evaluate_transform(f: &SpectralField, qs: &[f64]) -> Vec<C64> {
    let cutoff = f.grid.cutoff();
    let q_max = qs.iter().fold(0.0f64, |m, q| m.max(q.abs()));
    let pad = (((q_max + cutoff) / (2.0 * cutoff)).floor() as usize + 1).max(1);
    let samples = synthesize_padded(f, pad);
    let xs = f.grid.positions(pad);
    let scale = f.grid.dx() / pad as f64 / (2.0 * PI).sqrt();
    qs.iter()
        .map(|&q| {
            let sum: C64 = samples
                .iter()
                .zip(&xs)
                .map(|(s, &x)| s * C64::from_polar(1.0, -q * x))
                .sum();
            sum * scale
        })
        .collect()
}

pub fn l2_norm(f: &SpectralField) -> f64 {
    (f.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * f.grid.dk()).sqrt()
}

/// `⟨g, f⟩ = Σ conj(ĝ) f̂ dk`.
pub fn inner(g: &SpectralField, f: &SpectralField) -> Result<C64> {
    if !g.grid.same_as(&f.grid) {
        return Err(Error::GridMismatch);
    }
    let sum: C64 = g.coeffs.iter().zip(&f.coeffs).map(|(a, b)| a.conj() * b).sum();
    Ok(sum * f.grid.dk())
}

/// Multiplier `|k|^α`. The DC mode is zeroed for negative `α`.
pub fn fractional_derivative(f: &SpectralField, alpha: f64) -> Result<SpectralField> {
    if !alpha.is_finite() || alpha <= -0.5 {
        return Err(Error::InvalidArgument(format!(
            "fractional order must exceed -1/2, got {alpha}"
        )));
    }
    Ok(f.map_modes(|k| {
        let a = k.abs();
        let w = if a == 0.0 {
            if alpha == 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            a.powf(alpha)
        };
        C64::new(w, 0.0)
    }))
}

/// Time nodes with quadrature weights over a spatial box.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeGrid {
    spatial: FourierGrid,
    times: Vec<f64>,
    weights: Vec<f64>,
}

/// One covariant time window used to build a graded union axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWindow {
    pub center: f64,
    pub half_width: f64,
    pub step: f64,
}

impl SpaceTimeGrid {
    /// `n_t` uniform nodes on `[-t_max, t_max]`, trapezoid weights.
    pub fn uniform(spatial: FourierGrid, t_max: f64, n_t: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidGrid(format!("t_max must be positive, got {t_max}")));
        }
        if n_t < 3 || n_t % 2 == 0 {
            return Err(Error::InvalidGrid(format!("n_t must be odd and at least 3, got {n_t}")));
        }
        let half = (n_t - 1) / 2;
        let dt = t_max / half as f64;
        let times = (0..n_t).map(|i| (i as f64 - half as f64) * dt).collect();
        let mut weights = vec![dt; n_t];
        weights[0] *= 0.5;
        weights[n_t - 1] *= 0.5;
        Ok(Self {
            spatial,
            times,
            weights,
        })
    }

    /// Trapezoid rule on arbitrary strictly increasing nodes.
    pub fn from_nodes(spatial: FourierGrid, times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidGrid("need at least two time nodes".into()));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("time nodes must be finite and increasing".into()));
        }
        let n = times.len();
        let weights = (0..n)
            .map(|i| {
                let lo = if i == 0 { times[0] } else { times[i - 1] };
                let hi = if i + 1 == n { times[n - 1] } else { times[i + 1] };
                0.5 * (hi - lo)
            })
            .collect();
        Ok(Self {
            spatial,
            times,
            weights,
        })
    }

    /// Graded union of windows: the local step is the smallest of
    /// `step·max(1, |t-center|/half_width)^grading` over all windows.
    pub fn multiscale(spatial: FourierGrid, windows: &[TimeWindow], grading: f64) -> Result<Self> {
        if windows.is_empty() {
            return Err(Error::InvalidGrid("no time windows".into()));
        }
        for w in windows {
            if !(w.half_width > 0.0 && w.step > 0.0 && w.center.is_finite()) {
                return Err(Error::InvalidGrid(format!("bad time window {w:?}")));
            }
        }
        if windows.len() == 1 {
            let w = windows[0];
            let n_half = (w.half_width / w.step).ceil().max(1.0) as usize;
            return Ok(Self::uniform(spatial, w.half_width, 2 * n_half + 1)?.affine(1.0, w.center));
        }
        let lo = windows
            .iter()
            .map(|w| w.center - w.half_width)
            .fold(f64::INFINITY, f64::min);
        let hi = windows
            .iter()
            .map(|w| w.center + w.half_width)
            .fold(f64::NEG_INFINITY, f64::max);
        let step_at = |t: f64| {
            windows
                .iter()
                .map(|w| w.step * ((t - w.center).abs() / w.half_width).max(1.0).powf(grading))
                .fold(f64::INFINITY, f64::min)
        };
        let mut times = vec![lo];
        let mut t = lo;
        while t < hi {
            t += step_at(t);
            times.push(t.min(hi));
        }
        // Merge a sliver at the right end into its neighbour.
        let n = times.len();
        if n > 2 && times[n - 1] - times[n - 2] < 0.25 * step_at(hi) {
            times.remove(n - 2);
        }
        Self::from_nodes(spatial, times)
    }

    /// Maps nodes `t ↦ scale·t + shift`, weights scale with `scale`.
    pub fn affine(&self, scale: f64, shift: f64) -> Self {
        Self {
            spatial: self.spatial,
            times: self.times.iter().map(|t| scale * t + shift).collect(),
            weights: self.weights.iter().map(|w| scale * w).collect(),
        }
    }

    pub fn with_spatial(&self, spatial: FourierGrid) -> Self {
        Self {
            spatial,
            ..self.clone()
        }
    }

    /// Every other node, keeping both endpoints.
    pub fn coarsened(&self) -> Result<Self> {
        let n = self.times.len();
        let mut nodes: Vec<f64> = self.times.iter().step_by(2).copied().collect();
        if (n - 1) % 2 != 0 {
            nodes.push(self.times[n - 1]);
        }
        Self::from_nodes(self.spatial, nodes)
    }

    pub fn spatial(&self) -> &FourierGrid {
        &self.spatial
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn n_t(&self) -> usize {
        self.times.len()
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    /// Largest `|t|` on the axis.
    pub fn t_max(&self) -> f64 {
        let (lo, hi) = self.t_range();
        lo.abs().max(hi.abs())
    }
}

/// Samples `u(t_i, x_m)`, stored slice by slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    grid: SpaceTimeGrid,
    pad: usize,
    samples: Vec<C64>,
}

impl SpaceTimeField {
    pub fn new(grid: SpaceTimeGrid, pad: usize, samples: Vec<C64>) -> Result<Self> {
        let expected = grid.n_t() * grid.spatial().n_modes() * pad;
        if pad == 0 || samples.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: samples.len(),
            });
        }
        Ok(Self { grid, pad, samples })
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn pad(&self) -> usize {
        self.pad
    }

    pub fn n_x(&self) -> usize {
        self.grid.spatial().n_modes() * self.pad
    }

    pub fn dx(&self) -> f64 {
        self.grid.spatial().box_length() / self.n_x() as f64
    }

    pub fn slice(&self, i: usize) -> &[C64] {
        let nx = self.n_x();
        &self.samples[i * nx..(i + 1) * nx]
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    /// Pointwise product with another field on the same grid.
    pub fn pointwise(&self, other: &Self, op: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.grid != other.grid || self.pad != other.pad {
            return Err(Error::GridMismatch);
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| op(*a, *b))
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            pad: self.pad,
            samples,
        })
    }

    /// `dx Σ_m |u(t_i, x_m)|^r` for each slice.
    pub fn slice_powers(&self, r: f64) -> Vec<f64> {
        let dx = self.dx();
        (0..self.grid.n_t())
            .map(|i| self.slice(i).iter().map(|v| v.norm().powf(r)).sum::<f64>() * dx)
            .collect()
    }
}

/// `(∫ (∫ |u|^r dx)^{q/r} dt)^{1/q}` with trapezoid weights in t.
pub fn mixed_norm(u: &SpaceTimeField, q: f64, r: f64) -> Result<f64> {
    if !(q >= 1.0 && r >= 1.0 && q.is_finite() && r.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "exponents must lie in [1, ∞), got q = {q}, r = {r}"
        )));
    }
    if u.samples.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NonFinite("space-time samples"));
    }
    let total: f64 = u
        .slice_powers(r)
        .iter()
        .zip(u.grid.weights())
        .map(|(s, w)| w * s.powf(q / r))
        .sum();
    Ok(total.powf(1.0 / q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: FourierGrid, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..grid.n_modes())
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        SpectralField::new(grid, coeffs).unwrap()
    }

    fn rel_diff(a: &SpectralField, b: &SpectralField) -> f64 {
        l2_norm(&a.sub(b).unwrap()) / l2_norm(a)
    }

    #[test]
    fn grid_validation() {
        assert!(FourierGrid::new(6, 1.0).is_err());
        assert!(FourierGrid::new(9, 1.0).is_err());
        assert!(FourierGrid::new(8, 0.0).is_err());
        let g = FourierGrid::new(16, 0.5).unwrap();
        assert_eq!(g.cutoff(), 4.0);
        assert_eq!(g.k(0), -4.0);
        assert_eq!(g.k(8), 0.0);
        assert!((g.box_length() * g.dk() - 2.0 * PI).abs() < 1e-14);
        assert_eq!(g.slot(-8), Some(0));
        assert_eq!(g.slot(8), None);
    }

    #[test]
    fn zero_field_synthesizes_to_zero() {
        let g = FourierGrid::new(32, 0.25).unwrap();
        assert!(synthesize(&SpectralField::zeros(g)).iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn dc_mode_is_constant() {
        let g = FourierGrid::new(32, 0.25).unwrap();
        let mut c = vec![C64::new(0.0, 0.0); 32];
        // f ≡ 1 on the box has f̂(0) = L / √(2π) in the box-restricted sense.
        c[16] = C64::new(g.box_length() / (2.0 * PI).sqrt(), 0.0);
        let samples = synthesize(&SpectralField::new(g, c).unwrap());
        for s in samples {
            assert!((s - C64::new(1.0, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn constant_samples_have_only_dc() {
        let g = FourierGrid::new(64, 0.5).unwrap();
        let f = analyze(&vec![C64::new(2.0, -1.0); 64], g).unwrap();
        for (i, c) in f.coeffs().iter().enumerate() {
            if g.mode(i) != 0 {
                assert!(c.norm() < 1e-13);
            } else {
                assert!(c.norm() > 1.0);
            }
        }
    }

    #[test]
    fn plane_wave_hits_single_mode() {
        let g = FourierGrid::new(64, 0.5).unwrap();
        let j = 5;
        let samples: Vec<C64> = g
            .positions(1)
            .iter()
            .map(|&x| C64::from_polar(1.0, j as f64 * g.dk() * x))
            .collect();
        let f = analyze(&samples, g).unwrap();
        let peak = g.slot(j).unwrap();
        for (i, c) in f.coeffs().iter().enumerate() {
            if i == peak {
                assert!((c.norm() - g.box_length() / (2.0 * PI).sqrt()).abs() < 1e-12);
            } else {
                assert!(c.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn analyze_rejects_wrong_length() {
        let g = FourierGrid::new(16, 1.0).unwrap();
        assert_eq!(
            analyze(&[C64::new(0.0, 0.0); 15], g),
            Err(Error::DimensionMismatch { expected: 16, got: 15 })
        );
    }

    #[test]
    fn gaussian_has_unit_mass() {
        let g = FourierGrid::new(512, 0.0625).unwrap();
        assert!((l2_norm(&SpectralField::gaussian(g)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn padded_round_trip_and_parseval() {
        let g = FourierGrid::new(64, 0.3).unwrap();
        let f = random_field(g, 3);
        for pad in [1, 2, 4] {
            let s = synthesize_padded(&f, pad);
            let back = analyze_padded(&s, g, pad).unwrap();
            assert!(rel_diff(&f, &back) < 1e-13);
            let dx = g.box_length() / (64 * pad) as f64;
            let mass: f64 = s.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx;
            assert!((mass - l2_norm(&f).powi(2)).abs() < 1e-12 * mass);
        }
    }

    #[test]
    fn transform_evaluation_matches_grid_coefficients() {
        let g = FourierGrid::new(32, 0.5).unwrap();
        let f = random_field(g, 11);
        let vals = evaluate_transform(&f, &g.wavenumbers());
        for (a, b) in vals.iter().zip(f.coeffs()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn fractional_derivative_cases() {
        let g = FourierGrid::new(16, 1.0).unwrap();
        let f = random_field(g, 5);
        assert_eq!(fractional_derivative(&f, 0.0).unwrap(), f);
        let mut c = vec![C64::new(0.0, 0.0); 16];
        c[g.slot(2).unwrap()] = C64::new(1.0, 0.0);
        let single = SpectralField::new(g, c).unwrap();
        let d = fractional_derivative(&single, 1.0 / 6.0).unwrap();
        assert!((d.coeffs()[g.slot(2).unwrap()].re - 2f64.powf(1.0 / 6.0)).abs() < 1e-15);
        let neg = fractional_derivative(&f, -0.25).unwrap();
        assert_eq!(neg.coeffs()[g.slot(0).unwrap()], C64::new(0.0, 0.0));
        assert!(fractional_derivative(&f, -0.5).is_err());
        let a = fractional_derivative(&fractional_derivative(&f, 1.0 / 3.0).unwrap(), 1.0 / 3.0).unwrap();
        let b = fractional_derivative(&f, 2.0 / 3.0).unwrap();
        assert!(rel_diff(&b, &a) < 1e-12);
    }

    #[test]
    fn uniform_time_grid_is_symmetric() {
        let g = FourierGrid::new(16, 1.0).unwrap();
        let st = SpaceTimeGrid::uniform(g, 8.0, 257).unwrap();
        assert_eq!(st.times()[128], 0.0);
        assert_eq!(st.times()[0], -8.0);
        assert_eq!(st.times()[256], 8.0);
        assert!((st.weights().iter().sum::<f64>() - 16.0).abs() < 1e-12);
        assert!(SpaceTimeGrid::uniform(g, 8.0, 256).is_err());
        assert!(SpaceTimeGrid::uniform(g, -1.0, 11).is_err());
        let coarse = st.coarsened().unwrap();
        assert_eq!(coarse.n_t(), 129);
        assert!((coarse.weights().iter().sum::<f64>() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn multiscale_axis_covers_union() {
        let g = FourierGrid::new(16, 1.0).unwrap();
        let windows = [
            TimeWindow { center: 0.0, half_width: 1.0, step: 0.01 },
            TimeWindow { center: 0.0, half_width: 64.0, step: 0.64 },
        ];
        let st = SpaceTimeGrid::multiscale(g, &windows, 0.5).unwrap();
        let (lo, hi) = st.t_range();
        assert_eq!((lo, hi), (-64.0, 64.0));
        assert!((st.weights().iter().sum::<f64>() - 128.0).abs() < 1e-9);
        let fine = st.times().windows(2).filter(|w| w[0] >= -1.0 && w[1] <= 1.0).count();
        assert!(fine >= 190, "{fine}");
        // A single window reproduces the shifted uniform grid.
        let one = SpaceTimeGrid::multiscale(g, &[TimeWindow { center: 3.0, half_width: 2.0, step: 0.5 }], 0.5).unwrap();
        assert_eq!(one.times(), SpaceTimeGrid::uniform(g, 2.0, 9).unwrap().affine(1.0, 3.0).times());
    }

    #[test]
    fn mixed_norm_rejects_bad_exponents() {
        let g = FourierGrid::new(8, 1.0).unwrap();
        let st = SpaceTimeGrid::uniform(g, 1.0, 3).unwrap();
        let u = SpaceTimeField::new(st, 1, vec![C64::new(0.0, 0.0); 24]).unwrap();
        assert_eq!(mixed_norm(&u, 8.0, 8.0).unwrap(), 0.0);
        assert!(mixed_norm(&u, 0.5, 2.0).is_err());
        let mut bad = u.samples().to_vec();
        bad[3] = C64::new(f64::NAN, 0.0);
        let u = SpaceTimeField::new(u.grid().clone(), 1, bad).unwrap();
        assert_eq!(mixed_norm(&u, 2.0, 2.0), Err(Error::NonFinite("space-time samples")));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn round_trip_and_parseval(seed in any::<u64>(), log_n in 3u32..9, dk in 0.01f64..2.0) {
            let g = FourierGrid::new(1 << log_n, dk).unwrap();
            let f = random_field(g, seed);
            let s = synthesize(&f);
            prop_assert!(rel_diff(&f, &analyze(&s, g).unwrap()) < 1e-12);
            let mass: f64 = s.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.dx();
            let n2 = l2_norm(&f).powi(2);
            prop_assert!((n2 - mass).abs() <= 1e-12 * n2);
            let again = synthesize(&analyze(&s, g).unwrap());
            let err: f64 = again.iter().zip(&s).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            let size: f64 = s.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            prop_assert!(err <= 1e-12 * size);
        }

        #[test]
        fn inner_is_hermitian(s1 in any::<u64>(), s2 in any::<u64>()) {
            let g = FourierGrid::new(32, 0.5).unwrap();
            let (f, h) = (random_field(g, s1), random_field(g, s2));
            let a = inner(&f, &h).unwrap();
            let b = inner(&h, &f).unwrap();
            prop_assert!((a - b.conj()).norm() <= 1e-13 * a.norm().max(1.0));
            let ff = inner(&f, &f).unwrap();
            prop_assert!((ff.re - l2_norm(&f).powi(2)).abs() <= 1e-12 * ff.re);
            prop_assert!(ff.im.abs() <= 1e-12 * ff.re);
        }

        #[test]
        fn mixed_norm_is_a_norm(s1 in any::<u64>(), s2 in any::<u64>(), q in 1.0f64..9.0, r in 1.0f64..9.0, c in -3.0f64..3.0) {
            let g = FourierGrid::new(16, 0.5).unwrap();
            let st = SpaceTimeGrid::uniform(g, 1.0, 5).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(s1 ^ s2.rotate_left(7));
            let mut draw = || -> Vec<C64> {
                (0..80).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
            };
            let u = SpaceTimeField::new(st.clone(), 1, draw()).unwrap();
            let v = SpaceTimeField::new(st, 1, draw()).unwrap();
            let nu = mixed_norm(&u, q, r).unwrap();
            let nv = mixed_norm(&v, q, r).unwrap();
            let sum = u.pointwise(&v, |a, b| a + b).unwrap();
            prop_assert!(mixed_norm(&sum, q, r).unwrap() <= (nu + nv) * (1.0 + 1e-12));
            let scaled = u.pointwise(&u, |a, _| a * c).unwrap();
            prop_assert!((mixed_norm(&scaled, q, r).unwrap() - c.abs() * nu).abs() <= 1e-12 * nu.max(1e-300));
        }

        #[test]
        fn norm_is_homogeneous(seed in any::<u64>(), re in -5.0f64..5.0, im in -5.0f64..5.0) {
            let g = FourierGrid::new(16, 0.5).unwrap();
            let f = random_field(g, seed);
            let c = C64::new(re, im);
            prop_assert!((l2_norm(&f.scale(c)) - c.norm() * l2_norm(&f)).abs() <= 1e-13 * (1.0 + c.norm() * l2_norm(&f)));
        }
    }
}
