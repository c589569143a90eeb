//! Weighted tail norms, frequency splits, the bootstrap polynomial and the
//! super-Gaussian decay certificate.

use crate::airy::band_project;
use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::multilinear::{integrate, weight_f, Estimate, FieldProfile, Profile, SamplerConfig, WeightSpec};
use crate::spectral::SpectralField;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSpec {
    pub s: f64,
    pub weight: WeightSpec,
}

impl TailSpec {
    pub fn new(s: f64, weight: WeightSpec) -> Result<Self> {
        if !(s > 1.0 && s.is_finite()) {
            return Err(Error::InvalidArgument(format!("tail split needs s > 1, got {s}")));
        }
        Ok(Self { s, weight })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailNorm {
    pub value: f64,
    /// `s²` reaches the grid cutoff, so the tail is empty by construction.
    pub unresolved: bool,
}

/// `‖e^{F} f̂ 1_{|k|>s²}‖₂`, summed in log space so large weights do not overflow early.
pub fn tail_norm(f: &SpectralField, ts: &TailSpec) -> TailNorm {
    let grid = f.grid();
    let edge = ts.s * ts.s;
    let unresolved = edge >= grid.cutoff();
    let logs: Vec<f64> = f
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(i, c)| grid.k(*i).abs() > edge && c.norm() > 0.0)
        .map(|(i, c)| 2.0 * (weight_f(grid.k(i), ts.weight) + c.norm().ln()))
        .collect();
    if logs.is_empty() {
        return TailNorm { value: 0.0, unresolved };
    }
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logs.iter().map(|l| (l - top).exp()).sum();
    let value = (0.5 * (top + sum.ln() + grid.dk().ln())).exp();
    TailNorm { value, unresolved }
}

/// `|k| ≤ s`, `s < |k| ≤ s²` and `|k| > s²`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySplit {
    pub low: SpectralField,
    pub mid: SpectralField,
    pub high: SpectralField,
}

pub fn frequency_split(f: &SpectralField, s: f64) -> Result<FrequencySplit> {
    if !(s >= 1.0 && s.is_finite()) {
        return Err(Error::InvalidArgument(format!("frequency split needs s ≥ 1, got {s}")));
    }
    let s2 = s * s;
    let closed = |lo: f64, hi: f64| band_project(f, lo, next_up(hi), false);
    let low = closed(0.0, s)?;
    let high = band_project(f, 0.0, next_up(s2), true)?;
    // Middle shell: complement of the other two, exactly.
    let mid = f.sub(&low)?.sub(&high)?;
    Ok(FrequencySplit { low, mid, high })
}

fn next_up(x: f64) -> f64 {
    if x.is_infinite() {
        x
    } else {
        f64::from_bits(x.to_bits() + 1)
    }
}

/// Groupings of `M(h_>, h, …, h)` by how many of the slots `2…8` are high.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapTerms {
    pub total: Estimate,
    /// Slots `2…8` all low.
    pub a: Estimate,
    /// Exactly one of slots `2…8` high.
    pub b1: Estimate,
    /// Two or more of slots `2…8` high.
    pub b2: Estimate,
    pub unresolved: bool,
}

/// Monte-Carlo estimates of the split terms with `h = e^{F} f̂`, `h_>` the part
/// above `s²` and `h_<` the rest. `cfg` should cover the grid band.
pub fn bootstrap_terms(f: &SpectralField, s: f64, w: WeightSpec, cfg: &SamplerConfig) -> Result<BootstrapTerms> {
    let split = frequency_split(f, s)?;
    let unresolved = s * s >= f.grid().cutoff();
    let lo_field = split.low.add(&split.mid)?;
    let weighted = |p: FieldProfile| {
        move |k: f64| {
            let v = p.eval(k);
            if v == 0.0 {
                0.0
            } else {
                v * weight_f(k, w).exp()
            }
        }
    };
    let high = weighted(FieldProfile::new(&split.high));
    let low = weighted(FieldProfile::new(&lo_field));
    let edge = s * s;
    let high_at = |k: f64| if k.abs() > edge { high(k) } else { 0.0 };
    let low_at = |k: f64| if k.abs() <= edge { low(k) } else { 0.0 };
    let est = sample_groupings(cfg, &high_at, &low_at)?;
    Ok(BootstrapTerms { total: est[0], a: est[1], b1: est[2], b2: est[3], unresolved })
}

fn sample_groupings(
    cfg: &SamplerConfig,
    high: &(dyn Fn(f64) -> f64 + Sync),
    low: &(dyn Fn(f64) -> f64 + Sync),
) -> Result<[Estimate; 4]> {
    let m = integrate(cfg, 4, 0, |p, vals| {
        let lead = high(p.eta[0]) * p.weight;
        if lead == 0.0 {
            return;
        }
        // Coefficients of Π_l (low_l + z·high_l) in z.
        let mut poly = [0.0f64; 8];
        poly[0] = 1.0;
        for (deg, &e) in p.eta[1..].iter().enumerate() {
            let (lv, hv) = (low(e), high(e));
            for j in (0..=deg + 1).rev() {
                let carry = if j > 0 { poly[j - 1] * hv } else { 0.0 };
                poly[j] = poly[j] * lv + carry;
            }
        }
        vals[0] += lead * poly.iter().sum::<f64>();
        vals[1] += lead * poly[0];
        vals[2] += lead * poly[1];
        vals[3] += lead * poly[2..].iter().sum::<f64>();
    })?;
    Ok(std::array::from_fn(|i| Estimate::from_moments(m.sum[i], m.sum_sq[i], cfg)))
}

/// `G(v) = ω v / 2 − C Σ_{l=2}^{7} v^l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapPoly {
    pub omega: f64,
    pub c: f64,
}

impl BootstrapPoly {
    pub fn new(omega: f64, c: f64) -> Result<Self> {
        if !(omega > 0.0 && c > 0.0 && omega.is_finite() && c.is_finite()) {
            return Err(Error::InvalidArgument(format!("polynomial needs ω, C > 0, got ({omega}, {c})")));
        }
        Ok(Self { omega, c })
    }

    pub fn value(&self, v: f64) -> f64 {
        0.5 * self.omega * v - self.c * (2..=7).map(|l| v.powi(l)).sum::<f64>()
    }

    fn slope(&self, v: f64) -> f64 {
        0.5 * self.omega - self.c * (2..=7).map(|l| l as f64 * v.powi(l - 1)).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyAnalysis {
    pub g_max: f64,
    pub v_max: f64,
    /// Roots of `G = G_max/2` below and above the maximizer.
    pub v0: f64,
    pub v1: f64,
    /// Positive root of `G`.
    pub x0: f64,
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-15 * hi.abs().max(1e-300) {
            break;
        }
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn poly_analysis(p: &BootstrapPoly) -> PolyAnalysis {
    // G' is strictly decreasing on [0, ∞) and G(v)/v too, so each root is bracketed.
    let mut hi = 1.0;
    while p.value(hi) > 0.0 {
        hi *= 2.0;
    }
    let x0 = bisect(0.0, hi, |v| if v == 0.0 { 0.5 * p.omega } else { p.value(v) / v });
    let v_max = bisect(0.0, x0, |v| p.slope(v));
    let g_max = p.value(v_max);
    let half = 0.5 * g_max;
    let v0 = bisect(0.0, v_max, |v| p.value(v) - half);
    let v1 = bisect(v_max, x0, |v| p.value(v) - half);
    PolyAnalysis { g_max, v_max, v0, v1, x0 }
}

/// Fit of `log|f̂(k)| ≈ intercept − μ̂|k|^power` on the qualifying modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayCertificate {
    pub mu_hat: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub n_modes: usize,
    pub power: f64,
}

impl DecayCertificate {
    pub fn to_text(&self) -> String {
        format!(
            "mu_hat = {:.17e}\nr2 = {:.17e}\nk_min = {:.17e}\nk_max = {:.17e}\nn_modes = {}\n",
            self.mu_hat, self.r_squared, self.k_min, self.k_max, self.n_modes
        )
    }
}

pub const MIN_FIT_MODES: usize = 8;

/// Modes with `|f̂| > floor·max|f̂|` and `|k| ≥ 1`, fitted against `|k|³`.
pub fn decay_certificate(f: &SpectralField, floor: f64) -> Result<DecayCertificate> {
    decay_fit(f, floor, 3.0)
}

pub fn decay_fit(f: &SpectralField, floor: f64, power: f64) -> Result<DecayCertificate> {
    if f.is_zero() {
        return Err(Error::ZeroField);
    }
    let grid = f.grid();
    let peak = f.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    let threshold = floor * peak;
    let (xs, ys): (Vec<f64>, Vec<f64>) = f
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(i, c)| grid.k(*i).abs() >= 1.0 && c.norm() > threshold)
        .map(|(i, c)| (grid.k(i).abs().powf(power), c.norm().ln()))
        .unzip();
    if xs.len() < MIN_FIT_MODES {
        return Err(Error::TooFewModes { found: xs.len(), needed: MIN_FIT_MODES });
    }
    let fit = linear_fit(&xs, &ys)?;
    let ks: Vec<f64> = xs.iter().map(|x| x.powf(1.0 / power)).collect();
    Ok(DecayCertificate {
        mu_hat: -fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        k_min: ks.iter().cloned().fold(f64::INFINITY, f64::min),
        k_max: ks.iter().cloned().fold(0.0, f64::max),
        n_modes: xs.len(),
        power,
    })
}
