//! The 8-linear space-time form `Q`, the resonance-surface form `M`, its
//! weighted variant `M_F` and the Monte-Carlo sampler of the surface
//! `{a(η) = 0, b(η) = 0}`.
//!
//! The surface is parametrized by the six free variables `η₂…η₇`. The
//! linear constraint fixes `η₈ = η₁ + c` and the cubic one collapses to the
//! quadratic `-3cη₁² - 3c²η₁ - c³ + d = 0`. Each real root carries the
//! co-area weight `1/(3|η₈² − η₁²|)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::airy::grid_matches;
use crate::error::{Error, Result};
use crate::fit::{log_log_fit, LinearFit};
use crate::spectral::{synthesize_into, SpaceTimeGrid, SpectralField, C64};

pub const DEFAULT_STREAMS: u32 = 64;

pub fn a_of(eta: &[f64; 8]) -> f64 {
    eta[..4].iter().map(|v| v * v * v).sum::<f64>() - eta[4..].iter().map(|v| v * v * v).sum::<f64>()
}

pub fn b_of(eta: &[f64; 8]) -> f64 {
    eta[..4].iter().sum::<f64>() - eta[4..].iter().sum::<f64>()
}

/// Parameters of `F(k) = μ|k|³ / (1 + ε|k|³)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSpec {
    pub mu: f64,
    pub eps: f64,
}

impl WeightSpec {
    pub fn new(mu: f64, eps: f64) -> Result<Self> {
        if !(mu >= 0.0 && eps >= 0.0 && mu.is_finite() && eps.is_finite()) {
            return Err(Error::InvalidArgument(format!("weight needs mu, eps ≥ 0, got ({mu}, {eps})")));
        }
        Ok(Self { mu, eps })
    }

    pub const fn zero() -> Self {
        Self { mu: 0.0, eps: 0.0 }
    }
}

pub fn weight_f(k: f64, w: WeightSpec) -> f64 {
    if w.mu == 0.0 {
        return 0.0;
    }
    let c = k.abs().powi(3);
    if w.eps > 0.0 && c.is_infinite() {
        return w.mu / w.eps;
    }
    w.mu * c / (1.0 + w.eps * c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintSample {
    pub eta: [f64; 8],
    pub weight: f64,
}

impl ConstraintSample {
    pub fn residuals(&self) -> (f64, f64) {
        (a_of(&self.eta), b_of(&self.eta))
    }

    pub fn on_surface(&self) -> bool {
        let m = self.eta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let (a, b) = self.residuals();
        a.abs() <= 1e-9 * (1.0 + m.powi(3)) && b.abs() <= 1e-12 * (1.0 + m)
    }
}

/// Law of the free variables `η₂…η₇`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Density {
    /// Uniform on `ranges`, estimates scaled by the box volume.
    Uniform,
    /// Independent centered normals with standard deviation `sigma`; each
    /// draw is weighted by the inverse density and `ranges` is ignored.
    Normal { sigma: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub n_samples: u64,
    /// Uniform sampling interval of each free variable `η₂…η₇`.
    pub ranges: [(f64, f64); 6],
    pub singular_cutoff: f64,
    pub rng_seed: u64,
    pub n_streams: u32,
    pub density: Density,
}

impl SamplerConfig {
    /// Box `[-k, k]⁶`.
    pub fn symmetric(k: f64, n_samples: u64, singular_cutoff: f64, rng_seed: u64) -> Self {
        Self {
            n_samples,
            ranges: [(-k, k); 6],
            singular_cutoff,
            rng_seed,
            n_streams: DEFAULT_STREAMS,
            density: Density::Uniform,
        }
    }

    /// Normal draws with standard deviation `sigma`.
    pub fn normal(sigma: f64, n_samples: u64, singular_cutoff: f64, rng_seed: u64) -> Self {
        Self { density: Density::Normal { sigma }, ..Self::symmetric(sigma, n_samples, singular_cutoff, rng_seed) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 || self.n_streams == 0 {
            return Err(Error::InvalidArgument("sampler needs n_samples ≥ 1 and at least one stream".into()));
        }
        if !(self.singular_cutoff > 0.0) {
            return Err(Error::InvalidArgument("singular cutoff must be positive".into()));
        }
        match self.density {
            Density::Uniform => {
                if self.ranges.iter().any(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo < hi)) {
                    return Err(Error::InvalidArgument("sampler ranges must be finite with lo < hi".into()));
                }
            }
            Density::Normal { sigma } => {
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::InvalidArgument(format!("normal sampling needs sigma > 0, got {sigma}")));
                }
            }
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        self.ranges.iter().map(|(lo, hi)| hi - lo).product()
    }

    /// Free variables of one draw and the factor turning an integrand value into
    /// an unbiased sample of the integral.
    pub(crate) fn draw(&self, rng: &mut ChaCha8Rng) -> ([f64; 6], f64) {
        let mut v = [0.0; 6];
        match self.density {
            Density::Uniform => {
                for (x, (lo, hi)) in v.iter_mut().zip(&self.ranges) {
                    *x = lo + (hi - lo) * rng.random::<f64>();
                }
                (v, self.volume())
            }
            Density::Normal { sigma } => {
                let mut q = 0.0;
                for x in v.iter_mut() {
                    let z: f64 = StandardNormal.sample(rng);
                    *x = sigma * z;
                    q += z * z;
                }
                let norm = (2.0 * std::f64::consts::PI).sqrt() * sigma;
                (v, norm.powi(6) * (0.5 * q).exp())
            }
        }
    }

    pub(crate) fn stream_len(&self, s: u32) -> u64 {
        let n = self.n_streams as u64;
        self.n_samples / n + u64::from((s as u64) < self.n_samples % n)
    }
}

/// Surface points above the free variables `η₂…η₇`, at most two.
pub fn surface_points(free: &[f64; 6], cutoff: f64) -> ([ConstraintSample; 2], usize) {
    let empty = ConstraintSample { eta: [0.0; 8], weight: 0.0 };
    let mut out = [empty; 2];
    let c = free[0] + free[1] + free[2] - free[3] - free[4] - free[5];
    if c.abs() < cutoff {
        return (out, 0);
    }
    let d = free[..3].iter().map(|v| v * v * v).sum::<f64>() - free[3..].iter().map(|v| v * v * v).sum::<f64>();
    let disc = 3.0 * c * (4.0 * d - c * c * c);
    if !(disc >= 0.0) {
        return (out, 0);
    }
    let s = disc.sqrt();
    let q = 0.5 * (3.0 * c * c + s);
    let candidates = [-q / (3.0 * c), (d - c * c * c) / q];
    let mut count = 0;
    for (i, &root) in candidates.iter().enumerate() {
        if i == 1 && s == 0.0 {
            break;
        }
        let mut e1 = root;
        let g = e1 * e1 * e1 - (e1 + c).powi(3) + d;
        let dg = -3.0 * c * (2.0 * e1 + c);
        if dg != 0.0 {
            e1 -= g / dg;
        }
        let e8 = e1 + c;
        let gap = (e8 * e8 - e1 * e1).abs();
        if gap < cutoff {
            continue;
        }
        out[count] = ConstraintSample {
            eta: [e1, free[0], free[1], free[2], free[3], free[4], free[5], e8],
            weight: 1.0 / (3.0 * gap),
        };
        count += 1;
    }
    (out, count)
}

pub(crate) fn stream_rng(cfg: &SamplerConfig, s: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    rng.set_stream(s as u64);
    rng
}

/// All surface points generated by the configured draws, in stream order.
pub fn sample_constraint(cfg: &SamplerConfig) -> Result<Vec<ConstraintSample>> {
    cfg.validate()?;
    let per_stream: Vec<Vec<ConstraintSample>> = (0..cfg.n_streams)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream_rng(cfg, s);
            let mut out = Vec::new();
            for _ in 0..cfg.stream_len(s) {
                let (free, _) = cfg.draw(&mut rng);
                let (pts, n) = surface_points(&free, cfg.singular_cutoff);
                out.extend_from_slice(&pts[..n]);
            }
            out
        })
        .collect();
    Ok(per_stream.into_iter().flatten().collect())
}

/// Per-draw first and second moments of several integrands sharing draws.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Moments {
    pub sum: Vec<f64>,
    pub sum_sq: Vec<f64>,
}

/// Sums of the per-draw values. The integrand adds its point values into the
/// slice; the first `n_weighted` entries are then scaled by the draw factor and
/// the rest are plain counts.
pub(crate) fn integrate<F>(cfg: &SamplerConfig, n_weighted: usize, n_counts: usize, integrand: F) -> Result<Moments>
where
    F: Fn(&ConstraintSample, &mut [f64]) + Sync,
{
    cfg.validate()?;
    let n_quantities = n_weighted + n_counts;
    let parts: Vec<Moments> = (0..cfg.n_streams)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream_rng(cfg, s);
            let mut m = Moments { sum: vec![0.0; n_quantities], sum_sq: vec![0.0; n_quantities] };
            let mut vals = vec![0.0; n_quantities];
            for _ in 0..cfg.stream_len(s) {
                let (free, factor) = cfg.draw(&mut rng);
                let (pts, n) = surface_points(&free, cfg.singular_cutoff);
                if n == 0 {
                    continue;
                }
                vals.iter_mut().for_each(|v| *v = 0.0);
                for p in &pts[..n] {
                    integrand(p, &mut vals);
                }
                for (i, ((s1, s2), v)) in m.sum.iter_mut().zip(m.sum_sq.iter_mut()).zip(&vals).enumerate() {
                    let x = if i < n_weighted { v * factor } else { *v };
                    *s1 += x;
                    *s2 += x * x;
                }
            }
            m
        })
        .collect();
    let mut total = Moments { sum: vec![0.0; n_quantities], sum_sq: vec![0.0; n_quantities] };
    for p in parts {
        for i in 0..n_quantities {
            total.sum[i] += p.sum[i];
            total.sum_sq[i] += p.sum_sq[i];
        }
    }
    Ok(total)
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl Estimate {
    pub(crate) fn from_moments(sum: f64, sum_sq: f64, cfg: &SamplerConfig) -> Self {
        let n = cfg.n_samples as f64;
        let mean = sum / n;
        let var = if cfg.n_samples > 1 { ((sum_sq - sum * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        Self {
            value: mean,
            stderr: (var / n).sqrt(),
            n_samples: cfg.n_samples,
            seed: cfg.rng_seed,
        }
    }
}

/// Magnitude of a frequency profile `|h(k)|`.
pub trait Profile: Sync {
    fn eval(&self, k: f64) -> f64;
}

impl<P: Profile + ?Sized> Profile for &P {
    fn eval(&self, k: f64) -> f64 {
        (**self).eval(k)
    }
}

impl<P: Profile + ?Sized> Profile for Box<P> {
    fn eval(&self, k: f64) -> f64 {
        (**self).eval(k)
    }
}

/// `1` on `(lo, hi)`, `1/2` at the endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Indicator {
    pub lo: f64,
    pub hi: f64,
}

impl Indicator {
    pub fn symmetric(half_width: f64) -> Self {
        Self { lo: -half_width, hi: half_width }
    }
}

impl Profile for Indicator {
    fn eval(&self, k: f64) -> f64 {
        if k > self.lo && k < self.hi {
            1.0
        } else if k == self.lo || k == self.hi {
            0.5
        } else {
            0.0
        }
    }
}

/// `amplitude · e^{-k²/(2 width²)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian {
    pub amplitude: f64,
    pub width: f64,
}

impl Profile for Gaussian {
    fn eval(&self, k: f64) -> f64 {
        let z = k / self.width;
        self.amplitude.abs() * (-0.5 * z * z).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Zero;

impl Profile for Zero {
    fn eval(&self, _: f64) -> f64 {
        0.0
    }
}

pub struct FnProfile<F>(pub F);

impl<F: Fn(f64) -> f64 + Sync> Profile for FnProfile<F> {
    fn eval(&self, k: f64) -> f64 {
        (self.0)(k).abs()
    }
}

/// `|f̂|` linearly interpolated between grid wavenumbers, zero past the last mode.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldProfile {
    k0: f64,
    dk: f64,
    values: Vec<f64>,
}

impl FieldProfile {
    pub fn new(f: &SpectralField) -> Self {
        Self {
            k0: f.grid().k(0),
            dk: f.grid().dk(),
            values: f.coeffs().iter().map(|c| c.norm()).collect(),
        }
    }
}

impl Profile for FieldProfile {
    fn eval(&self, k: f64) -> f64 {
        let pos = (k - self.k0) / self.dk;
        if !(pos >= 0.0) {
            return 0.0;
        }
        let i = pos.floor() as usize;
        let last = self.values.len() - 1;
        if i > last || (i == last && pos > last as f64) {
            return 0.0;
        }
        if i == last {
            return self.values[last];
        }
        let frac = pos - i as f64;
        (1.0 - frac) * self.values[i] + frac * self.values[i + 1]
    }
}

/// `|h(k)| e^{sign·F(k)}`.
pub struct ExpWeighted<'a> {
    pub inner: &'a dyn Profile,
    pub weight: WeightSpec,
    pub sign: f64,
}

impl Profile for ExpWeighted<'_> {
    fn eval(&self, k: f64) -> f64 {
        let h = self.inner.eval(k);
        if h == 0.0 {
            0.0
        } else {
            h * (self.sign * weight_f(k, self.weight)).exp()
        }
    }
}

pub type Profiles<'a> = [&'a dyn Profile; 8];

/// `Π|h_j(η_j)|` times the co-area weight.
pub fn integrand(profiles: &Profiles<'_>, s: &ConstraintSample) -> f64 {
    let mut v = s.weight;
    for (h, &e) in profiles.iter().zip(&s.eta) {
        if v == 0.0 {
            break;
        }
        v *= h.eval(e);
    }
    v
}

/// `F(η₁) − Σ_{l≥2} F(η_l)`.
pub fn weight_exponent(s: &ConstraintSample, w: WeightSpec) -> f64 {
    weight_f(s.eta[0], w) - s.eta[1..].iter().map(|&e| weight_f(e, w)).sum::<f64>()
}

pub fn weighted_integrand(profiles: &Profiles<'_>, w: WeightSpec, s: &ConstraintSample) -> f64 {
    let base = integrand(profiles, s);
    if base == 0.0 || w.mu == 0.0 {
        base
    } else {
        base * weight_exponent(s, w).exp()
    }
}

pub fn m_form(profiles: &Profiles<'_>, cfg: &SamplerConfig) -> Result<Estimate> {
    let m = integrate(cfg, 1, 0, |s, v| v[0] += integrand(profiles, s))?;
    Ok(Estimate::from_moments(m.sum[0], m.sum_sq[0], cfg))
}

pub fn m_form_weighted(profiles: &Profiles<'_>, w: WeightSpec, cfg: &SamplerConfig) -> Result<Estimate> {
    let m = integrate(cfg, 1, 0, |s, v| v[0] += weighted_integrand(profiles, w, s))?;
    Ok(Estimate::from_moments(m.sum[0], m.sum_sq[0], cfg))
}

/// `M_F` through the plain form with inputs `e^{F}h₁, e^{-F}h₂, …, e^{-F}h₈`.
pub fn m_form_weighted_rescaled(profiles: &Profiles<'_>, w: WeightSpec, cfg: &SamplerConfig) -> Result<Estimate> {
    let first = ExpWeighted { inner: profiles[0], weight: w, sign: 1.0 };
    let rest: Vec<ExpWeighted<'_>> = profiles[1..]
        .iter()
        .map(|&p| ExpWeighted { inner: p, weight: w, sign: -1.0 })
        .collect();
    let rescaled: Profiles<'_> = [&first, &rest[0], &rest[1], &rest[2], &rest[3], &rest[4], &rest[5], &rest[6]];
    m_form(&rescaled, cfg)
}

/// `M` and several `M_F` on common draws, with per-point violation counts of
/// `M_F`-integrand > `M`-integrand.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedComparison {
    pub base: Estimate,
    pub weighted: Vec<(WeightSpec, Estimate, u64)>,
    pub surface_points: u64,
}

pub fn weighted_comparison(profiles: &Profiles<'_>, weights: &[WeightSpec], cfg: &SamplerConfig) -> Result<WeightedComparison> {
    let nw = weights.len();
    // Layout: base, weighted values, violation indicators, point count.
    let m = integrate(cfg, 1 + nw, 1 + nw, |s, v| {
        let base = integrand(profiles, s);
        v[0] += base;
        for (i, w) in weights.iter().enumerate() {
            let wv = weighted_integrand(profiles, *w, s);
            v[1 + i] += wv;
            if wv > base {
                v[1 + nw + i] += 1.0;
            }
        }
        v[1 + 2 * nw] += 1.0;
    })?;
    let base = Estimate::from_moments(m.sum[0], m.sum_sq[0], cfg);
    let weighted = weights
        .iter()
        .enumerate()
        .map(|(i, w)| (*w, Estimate::from_moments(m.sum[1 + i], m.sum_sq[1 + i], cfg), m.sum[1 + nw + i] as u64))
        .collect();
    Ok(WeightedComparison { base, weighted, surface_points: m.sum[1 + 2 * nw] as u64 })
}

/// Pointwise sublinearity `F(η₁) ≤ Σ_{l≥2} F(η_l)` with slack `1e-12·(1 + ΣF)`.
pub fn sublinearity_check(sample: &ConstraintSample, w: WeightSpec) -> Result<bool> {
    if !sample.on_surface() {
        let (a, b) = sample.residuals();
        return Err(Error::OffSurface { a, b });
    }
    let rest: f64 = sample.eta[1..].iter().map(|&e| weight_f(e, w)).sum();
    Ok(weight_f(sample.eta[0], w) <= rest + 1e-12 * (1.0 + rest))
}

/// `M` at several singular cutoffs on the same draws.
pub fn singular_sweep(profiles: &Profiles<'_>, cfg: &SamplerConfig, cutoffs: &[f64]) -> Result<Vec<(f64, Estimate)>> {
    cutoffs
        .iter()
        .map(|&delta| {
            let c = SamplerConfig { singular_cutoff: delta, ..cfg.clone() };
            m_form(profiles, &c).map(|e| (delta, e))
        })
        .collect()
}

/// Deterministic midpoint rule for `M` on an `n⁶` tensor grid of the free variables.
pub fn m_form_grid(profiles: &Profiles<'_>, ranges: &[(f64, f64); 6], n: usize, cutoff: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("grid quadrature needs n ≥ 1".into()));
    }
    let nodes: Vec<Vec<f64>> = ranges
        .iter()
        .map(|(lo, hi)| (0..n).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64).collect())
        .collect();
    let cell: f64 = ranges.iter().map(|(lo, hi)| (hi - lo) / n as f64).product();
    let partial: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i0| {
            let mut acc = 0.0;
            let mut free = [0.0; 6];
            free[0] = nodes[0][i0];
            for &a in &nodes[1] {
                free[1] = a;
                for &b in &nodes[2] {
                    free[2] = b;
                    for &c in &nodes[3] {
                        free[3] = c;
                        for &d in &nodes[4] {
                            free[4] = d;
                            for &e in &nodes[5] {
                                free[5] = e;
                                let (pts, k) = surface_points(&free, cutoff);
                                for p in &pts[..k] {
                                    acc += integrand(profiles, p);
                                }
                            }
                        }
                    }
                }
            }
            acc
        })
        .collect();
    Ok(partial.iter().sum::<f64>() * cell)
}

/// `∬ Π_{l≤4} conj(u_l) Π_{m≥5} u_m dx dt` over the window, alias free for `pad ≥ 4`.
pub fn q_form(fields: [&SpectralField; 8], stg: &SpaceTimeGrid, pad: usize) -> Result<C64> {
    let grid = *fields[0].grid();
    for f in &fields {
        if !grid_matches(f.grid(), &grid) || !grid_matches(f.grid(), stg.spatial()) {
            return Err(Error::GridMismatch);
        }
    }
    // Slots sharing a field are synthesized once.
    let mut distinct: Vec<usize> = Vec::new();
    let slot_of: Vec<usize> = fields
        .iter()
        .map(|f| {
            match distinct.iter().position(|&d| std::ptr::eq(fields[d], *f)) {
                Some(p) => p,
                None => {
                    distinct.push(fields.iter().position(|g| std::ptr::eq(*g, *f)).unwrap());
                    distinct.len() - 1
                }
            }
        })
        .collect();
    let pad = pad.max(1);
    let nx = grid.n_modes() * pad;
    let dx = grid.box_length() / nx as f64;
    let ks = grid.wavenumbers();
    let nodes: Vec<(f64, f64)> = stg.times().iter().copied().zip(stg.weights().iter().copied()).collect();
    let partial: Vec<C64> = nodes
        .par_chunks(8)
        .map(|chunk| {
            let mut bufs = vec![vec![C64::new(0.0, 0.0); nx]; distinct.len()];
            let mut coeffs = vec![C64::new(0.0, 0.0); grid.n_modes()];
            let mut acc = C64::new(0.0, 0.0);
            for &(t, w) in chunk {
                for (b, &d) in bufs.iter_mut().zip(&distinct) {
                    for ((c, f0), &k) in coeffs.iter_mut().zip(fields[d].coeffs()).zip(&ks) {
                        *c = f0 * Complex64::from_polar(1.0, t * k * k * k);
                    }
                    synthesize_into(&grid, &coeffs, pad, b);
                }
                let mut slice = C64::new(0.0, 0.0);
                #[allow(clippy::needless_range_loop)]
                for m in 0..nx {
                    let mut p = C64::new(1.0, 0.0);
                    for (slot, &d) in slot_of.iter().enumerate() {
                        let v = bufs[d][m];
                        p *= if slot < 4 { v.conj() } else { v };
                    }
                    slice += p;
                }
                acc += slice * (w * dx);
            }
            acc
        })
        .collect();
    let total: C64 = partial.iter().sum();
    if !(total.re.is_finite() && total.im.is_finite()) {
        return Err(Error::NonFinite("8-linear form"));
    }
    Ok(total)
}

/// One point of the weighted-form scaling experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub l: f64,
    pub m_weighted: Estimate,
    pub norm_product: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingExperiment {
    pub points: Vec<ScalingPoint>,
    pub fit: LinearFit,
}

/// `M_F(h₁,…,h₈)/Π‖h_j‖₂` for `h₁, h₃…h₇ = 1_{[-s,s]}` and `h₂ = h₈ = 1_{[Ls, 2Ls]}`,
/// fitted against `L`.
pub fn weighted_scaling_experiment(
    s: f64,
    l_values: &[f64],
    w: WeightSpec,
    n_samples: u64,
    singular_cutoff: f64,
    seed: u64,
) -> Result<ScalingExperiment> {
    if !(s > 0.0) {
        return Err(Error::InvalidArgument("scaling experiment needs s > 0".into()));
    }
    let low = Indicator::symmetric(s);
    let points = l_values
        .iter()
        .map(|&l| {
            if !(l > 1.0) {
                return Err(Error::InvalidArgument(format!("separation factor must exceed 1, got {l}")));
            }
            let high = Indicator { lo: l * s, hi: 2.0 * l * s };
            let profiles: Profiles<'_> = [&low, &high, &low, &low, &low, &low, &low, &high];
            let mut ranges = [(-s, s); 6];
            ranges[0] = (l * s, 2.0 * l * s);
            let cfg = SamplerConfig {
                n_samples,
                ranges,
                singular_cutoff,
                rng_seed: seed,
                n_streams: DEFAULT_STREAMS,
                density: Density::Uniform,
            };
            let m = m_form_weighted(&profiles, w, &cfg)?;
            let norm_product = (2.0 * s).powf(3.0) * (l * s);
            Ok(ScalingPoint { l, m_weighted: m, norm_product, ratio: m.value / norm_product })
        })
        .collect::<Result<Vec<_>>>()?;
    let ls: Vec<f64> = points.iter().map(|p| p.l).collect();
    let rs: Vec<f64> = points.iter().map(|p| p.ratio).collect();
    let fit = log_log_fit(&ls, &rs)?;
    Ok(ScalingExperiment { points, fit })
}
