//! The L⁸ Strichartz functional, its Euler-Lagrange map and the normalized
//! power iteration that searches for extremisers.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::airy::grid_matches;
use crate::error::{Error, Result};
use crate::spectral::{
    analyze_into, evaluate_transform, inner, l2_norm, synthesize, synthesize_into, SpaceTimeGrid,
    SpectralField, C64,
};

/// Oversampling that makes degree-8 products alias free.
pub const DEFAULT_PAD: usize = 4;

/// `max_x Ai(x)`, attained near `x ≈ -1.0188`.
pub const AIRY_MAX: f64 = 0.535_656_656_015_700_4;

/// Threshold used for the window-limited and under-resolution flags.
pub const ADEQUACY_TOL: f64 = 1e-3;

const SLICE_CHUNK: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub stg: SpaceTimeGrid,
    pub max_iters: usize,
    pub residual_tol: f64,
    /// Relative change of the ratio below which the iteration counts as stalled.
    pub ratio_stall_tol: f64,
    pub dealias_pad_factor: usize,
    /// When set, every iterate is rescaled so that `Σ k²|f̂|² dk` equals this value.
    pub scale_gauge: Option<f64>,
}

impl SolverOptions {
    pub fn new(stg: SpaceTimeGrid) -> Self {
        Self {
            stg,
            max_iters: 200,
            residual_tol: 1e-4,
            ratio_stall_tol: 1e-13,
            dealias_pad_factor: DEFAULT_PAD,
            scale_gauge: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if !(self.residual_tol > 0.0 && self.ratio_stall_tol > 0.0) {
            return Err(Error::InvalidArgument("solver tolerances must be positive".into()));
        }
        if self.dealias_pad_factor == 0 {
            return Err(Error::InvalidArgument("dealias_pad_factor must be at least 1".into()));
        }
        if let Some(g) = self.scale_gauge {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::InvalidArgument(format!("scale gauge must be positive, got {g}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub ratio: f64,
    pub omega: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    Stalled,
    MaxIters,
}

/// Truncation and resolution monitors for one field on one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowDiagnostics {
    pub window_norm8_pow: f64,
    /// Largest mass fraction in the outer tenth of the box at the window ends.
    pub boundary_mass: f64,
    pub tail_bound: f64,
    /// `tail_bound / window_norm8_pow`.
    pub tail_fraction: f64,
    /// Relative change of the time integral when every other node is dropped.
    pub time_refinement_gap: f64,
    pub window_limited: bool,
    pub time_underresolved: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremiserReport {
    pub f_star: SpectralField,
    pub omega: f64,
    pub ratio_trace: Vec<f64>,
    pub trace: Vec<TraceRow>,
    pub residual: f64,
    pub a_estimate: f64,
    pub stop: StopReason,
    pub converged: bool,
    /// Whether the ratio trace never decreased (reported, not enforced).
    pub monotone: bool,
    pub diagnostics: WindowDiagnostics,
}

fn check_grid(f: &SpectralField, stg: &SpaceTimeGrid) -> Result<()> {
    if grid_matches(f.grid(), stg.spatial()) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// `dx Σ |u(t_i)|⁸` per time slice on the oversampled grid.
pub fn slice_norm8_pows(f: &SpectralField, stg: &SpaceTimeGrid, pad: usize) -> Result<Vec<f64>> {
    check_grid(f, stg)?;
    let grid = *f.grid();
    let pad = pad.max(1);
    let nx = grid.n_modes() * pad;
    let dx = grid.box_length() / nx as f64;
    let ks = grid.wavenumbers();
    let out: Vec<f64> = stg
        .times()
        .par_iter()
        .map_init(
            || (vec![C64::new(0.0, 0.0); grid.n_modes()], vec![C64::new(0.0, 0.0); nx]),
            |(coeffs, buf), &t| {
                for ((c, f0), &k) in coeffs.iter_mut().zip(f.coeffs()).zip(&ks) {
                    *c = f0 * Complex64::from_polar(1.0, t * k * k * k);
                }
                synthesize_into(&grid, coeffs, pad, buf);
                buf.iter().map(|v| v.norm_sqr().powi(4)).sum::<f64>() * dx
            },
        )
        .collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("space-time samples"));
    }
    Ok(out)
}

/// `∫∫ |e^{-t∂³} f|⁸ dx dt` over the window.
pub fn window_norm8_pow(f: &SpectralField, stg: &SpaceTimeGrid, pad: usize) -> Result<f64> {
    let slices = slice_norm8_pows(f, stg, pad)?;
    Ok(slices.iter().zip(stg.weights()).map(|(s, w)| s * w).sum())
}

/// `‖e^{-t∂³}f‖_{L⁸} / ‖f‖₂` on the window, evaluated alias free.
pub fn strichartz_ratio(f: &SpectralField, stg: &SpaceTimeGrid) -> Result<f64> {
    let norm = l2_norm(f);
    if norm == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(window_norm8_pow(f, stg, DEFAULT_PAD)?.powf(0.125) / norm)
}

/// Riemann sum of `|f|` on the working grid.
pub fn l1_norm_x(f: &SpectralField) -> f64 {
    synthesize(f).iter().map(|v| v.norm()).sum::<f64>() * f.grid().dx()
}

/// Upper estimate of `∫_{|t|>T} ‖u(t)‖₈⁸ dt` from
/// `‖u(t)‖₈⁸ ≤ ‖u(t)‖_∞⁶ ‖f‖₂²` and `‖u(t)‖_∞ ≤ Ai_max (3|t|)^{-1/3} ‖f‖_{L¹}`.
pub fn tail_bound(f: &SpectralField, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("tail time must be positive, got {t}")));
    }
    let l1 = l1_norm_x(f);
    let l2 = l2_norm(f);
    Ok(2.0 * AIRY_MAX.powi(6) * l1.powi(6) * l2 * l2 / (9.0 * t))
}

/// Mass fraction of `f` in `|x| ≥ 0.4·L`.
pub fn boundary_mass_fraction(f: &SpectralField) -> f64 {
    let samples = synthesize(f);
    let xs = f.grid().positions(1);
    let edge = 0.4 * f.grid().box_length();
    let total: f64 = samples.iter().map(|v| v.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let outer: f64 = samples
        .iter()
        .zip(&xs)
        .filter(|(_, x)| x.abs() >= edge)
        .map(|(v, _)| v.norm_sqr())
        .sum();
    outer / total
}

pub fn window_diagnostics(f: &SpectralField, stg: &SpaceTimeGrid, pad: usize) -> Result<WindowDiagnostics> {
    let slices = slice_norm8_pows(f, stg, pad)?;
    let fine: f64 = slices.iter().zip(stg.weights()).map(|(s, w)| s * w).sum();
    let coarse_grid = stg.coarsened()?;
    let coarse: f64 = coarse_grid
        .times()
        .iter()
        .zip(coarse_grid.weights())
        .map(|(t, w)| {
            let i = stg.times().iter().position(|s| s == t).expect("coarse node on fine axis");
            slices[i] * w
        })
        .sum();
    let (lo, hi) = stg.t_range();
    let boundary_mass = [lo, hi]
        .iter()
        .map(|&t| crate::airy::propagate(f, t).map(|g| boundary_mass_fraction(&g)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let tail = tail_bound(f, lo.abs().min(hi.abs()).max(f64::MIN_POSITIVE))?;
    let tail_fraction = if fine > 0.0 { tail / fine } else { 0.0 };
    let gap = if fine > 0.0 { (fine - coarse).abs() / fine } else { 0.0 };
    Ok(WindowDiagnostics {
        window_norm8_pow: fine,
        boundary_mass,
        tail_bound: tail,
        tail_fraction,
        time_refinement_gap: gap,
        window_limited: boundary_mass > ADEQUACY_TOL || tail_fraction > ADEQUACY_TOL,
        time_underresolved: gap > ADEQUACY_TOL,
    })
}

/// `Λ(f)` and `‖u‖₈⁸` from one pass over the window.
pub fn el_map_with_norm(f: &SpectralField, stg: &SpaceTimeGrid, pad: usize) -> Result<(SpectralField, f64)> {
    check_grid(f, stg)?;
    let grid = *f.grid();
    let n = grid.n_modes();
    let pad = pad.max(1);
    let nx = n * pad;
    let dx = grid.box_length() / nx as f64;
    let ks = grid.wavenumbers();
    let nodes: Vec<(f64, f64)> = stg.times().iter().copied().zip(stg.weights().iter().copied()).collect();
    let partials: Vec<(Vec<C64>, f64)> = nodes
        .par_chunks(SLICE_CHUNK)
        .map(|chunk| {
            let mut acc = vec![C64::new(0.0, 0.0); n];
            let mut norm = 0.0;
            let mut coeffs = vec![C64::new(0.0, 0.0); n];
            let mut buf = vec![C64::new(0.0, 0.0); nx];
            let mut back = vec![C64::new(0.0, 0.0); n];
            for &(t, w) in chunk {
                for ((c, f0), &k) in coeffs.iter_mut().zip(f.coeffs()).zip(&ks) {
                    *c = f0 * Complex64::from_polar(1.0, t * k * k * k);
                }
                synthesize_into(&grid, &coeffs, pad, &mut buf);
                let mut slice = 0.0;
                for v in buf.iter_mut() {
                    let m2 = v.norm_sqr();
                    let m6 = m2 * m2 * m2;
                    slice += m6 * m2;
                    *v *= m6;
                }
                norm += w * slice * dx;
                analyze_into(&grid, &mut buf, pad, &mut back);
                for ((a, b), &k) in acc.iter_mut().zip(&back).zip(&ks) {
                    *a += b * Complex64::from_polar(w, -t * k * k * k);
                }
            }
            (acc, norm)
        })
        .collect();
    let mut total = vec![C64::new(0.0, 0.0); n];
    let mut norm = 0.0;
    for (acc, part) in partials {
        for (t, a) in total.iter_mut().zip(acc) {
            *t += a;
        }
        norm += part;
    }
    if !norm.is_finite() || total.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::NonFinite("Euler-Lagrange map"));
    }
    Ok((SpectralField::new(grid, total)?, norm))
}

/// `Λ(f) = ∫ e^{t∂³}[|u|⁶u](t) dt`, truncated to the working modes.
pub fn el_map(f: &SpectralField, opts: &SolverOptions) -> Result<SpectralField> {
    Ok(el_map_with_norm(f, &opts.stg, opts.dealias_pad_factor)?.0)
}

/// `(ω, ‖ωf − Λ(f)‖₂)` with `ω = Re⟨f, Λ(f)⟩`; `f` must have unit norm.
pub fn el_residual(f: &SpectralField, opts: &SolverOptions) -> Result<(f64, f64)> {
    let norm = l2_norm(f);
    if norm == 0.0 {
        return Err(Error::ZeroField);
    }
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidArgument(format!("residual needs a unit-norm field, got norm {norm}")));
    }
    let lam = el_map(f, opts)?;
    Ok(omega_residual(f, &lam))
}

fn omega_residual(f: &SpectralField, lam: &SpectralField) -> (f64, f64) {
    let omega = inner(f, lam).expect("same grid").re;
    let r = f.scale(C64::new(omega, 0.0)).sub(lam).expect("same grid");
    (omega, l2_norm(&r))
}

/// Rescales `f̂(k) ↦ λ^{1/2} f̂(λk)` so that the second frequency moment hits `target`.
pub fn apply_scale_gauge(f: &SpectralField, target: f64) -> Result<SpectralField> {
    let grid = *f.grid();
    let moment: f64 = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| grid.k(i).powi(2) * c.norm_sqr())
        .sum::<f64>()
        * grid.dk()
        / l2_norm(f).powi(2);
    let lambda = (moment / target).sqrt();
    let qs: Vec<f64> = grid.wavenumbers().iter().map(|k| lambda * k).collect();
    let coeffs = evaluate_transform(f, &qs).into_iter().map(|c| c * lambda.sqrt()).collect();
    SpectralField::new(grid, coeffs)?.normalized()
}

/// Normalized power iteration `f ← Λ(f)/‖Λ(f)‖₂`.
pub fn solve_extremiser(f0: &SpectralField, opts: &SolverOptions) -> Result<ExtremiserReport> {
    opts.validate()?;
    check_grid(f0, &opts.stg)?;
    let mut f = f0.normalized()?;
    if let Some(target) = opts.scale_gauge {
        f = apply_scale_gauge(&f, target)?;
    }
    let mut trace: Vec<TraceRow> = Vec::new();
    let mut stop = StopReason::MaxIters;
    for iter in 0..opts.max_iters {
        let (lam, norm8) = match el_map_with_norm(&f, &opts.stg, opts.dealias_pad_factor) {
            Ok(v) => v,
            Err(Error::NonFinite(_)) => {
                return Err(Error::Diverged {
                    iteration: iter,
                    ratio_trace: trace.iter().map(|r| r.ratio).collect(),
                })
            }
            Err(e) => return Err(e),
        };
        let (omega, residual) = omega_residual(&f, &lam);
        let ratio = norm8.powf(0.125);
        let prev = trace.last().map(|r| r.ratio);
        trace.push(TraceRow { iter, ratio, omega, residual });
        if residual <= opts.residual_tol {
            stop = StopReason::Converged;
            break;
        }
        if let Some(p) = prev {
            if (ratio - p).abs() <= opts.ratio_stall_tol * ratio {
                stop = StopReason::Stalled;
                break;
            }
        }
        if iter + 1 == opts.max_iters {
            break;
        }
        f = lam.normalized().map_err(|_| Error::Diverged {
            iteration: iter,
            ratio_trace: trace.iter().map(|r| r.ratio).collect(),
        })?;
        if let Some(target) = opts.scale_gauge {
            f = apply_scale_gauge(&f, target)?;
        }
    }
    let last = *trace.last().expect("at least one iteration");
    let ratio_trace: Vec<f64> = trace.iter().map(|r| r.ratio).collect();
    let monotone = ratio_trace.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12));
    let diagnostics = window_diagnostics(&f, &opts.stg, opts.dealias_pad_factor)?;
    Ok(ExtremiserReport {
        omega: last.omega,
        residual: last.residual,
        a_estimate: last.ratio,
        converged: last.residual <= opts.residual_tol,
        f_star: f,
        ratio_trace,
        trace,
        stop,
        monotone,
        diagnostics,
    })
}
