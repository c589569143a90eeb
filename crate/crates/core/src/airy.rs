//! Fourier-multiplier propagators and sharp frequency projections.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::{synthesize_into, FourierGrid, SpaceTimeField, SpaceTimeGrid, SpectralField, C64};

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite("propagation time"))
    }
}

/// `e^{-t∂³}`: multiplies `f̂(k)` by `e^{itk³}`.
pub fn propagate(f: &SpectralField, t: f64) -> Result<SpectralField> {
    check_time(t)?;
    Ok(f.map_modes(|k| Complex64::from_polar(1.0, t * k * k * k)))
}

/// Free Schrödinger flow, multiplier `e^{itk²}`.
pub fn schrodinger_propagate(f: &SpectralField, t: f64) -> Result<SpectralField> {
    check_time(t)?;
    Ok(f.map_modes(|k| Complex64::from_polar(1.0, t * k * k)))
}

/// Evolution under an arbitrary real dispersion relation, multiplier `e^{it·symbol(k)}`.
pub fn propagate_with(f: &SpectralField, t: f64, symbol: impl Fn(f64) -> f64) -> Result<SpectralField> {
    check_time(t)?;
    Ok(f.map_modes(|k| Complex64::from_polar(1.0, t * symbol(k))))
}

/// Samples `u(t_i, ·) = e^{-t_i∂³} f` at the working resolution.
pub fn evolve(f: &SpectralField, stg: &SpaceTimeGrid) -> Result<SpaceTimeField> {
    evolve_padded(f, stg, 1)
}

/// As [`evolve`] on a spatial grid oversampled by `pad`.
pub fn evolve_padded(f: &SpectralField, stg: &SpaceTimeGrid, pad: usize) -> Result<SpaceTimeField> {
    evolve_symbol(f, stg, pad, |k| k * k * k)
}

/// Space-time samples of the flow with multiplier `e^{it·symbol(k)}`.
pub fn evolve_symbol(
    f: &SpectralField,
    stg: &SpaceTimeGrid,
    pad: usize,
    symbol: impl Fn(f64) -> f64 + Sync,
) -> Result<SpaceTimeField> {
    let grid = *f.grid();
    if !grid_matches(&grid, stg.spatial()) {
        return Err(Error::GridMismatch);
    }
    let pad = pad.max(1);
    let nx = grid.n_modes() * pad;
    let mut samples = vec![C64::new(0.0, 0.0); nx * stg.n_t()];
    let symbols: Vec<f64> = grid.wavenumbers().iter().map(|&k| symbol(k)).collect();
    samples
        .par_chunks_mut(nx)
        .zip(stg.times().par_iter())
        .for_each(|(slice, &t)| {
            let coeffs: Vec<C64> = f
                .coeffs()
                .iter()
                .zip(&symbols)
                .map(|(c, s)| c * Complex64::from_polar(1.0, t * s))
                .collect();
            synthesize_into(&grid, &coeffs, pad, slice);
        });
    SpaceTimeField::new(stg.clone(), pad, samples)
}

pub(crate) fn grid_matches(a: &FourierGrid, b: &FourierGrid) -> bool {
    a.n_modes() == b.n_modes() && a.dk().to_bits() == b.dk().to_bits()
}

/// Keeps modes with `|k| ∈ [lo, hi)`, or the complement when `complement` is set.
pub fn band_project(f: &SpectralField, lo: f64, hi: f64, complement: bool) -> Result<SpectralField> {
    if !(lo >= 0.0 && lo < hi) || lo.is_nan() || hi.is_nan() {
        return Err(Error::InvalidArgument(format!("band needs 0 ≤ lo < hi, got [{lo}, {hi})")));
    }
    Ok(f.map_modes(|k| {
        let inside = k.abs() >= lo && k.abs() < hi;
        if inside != complement {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

/// Splits `f` into `|k| < 2^k_min` and the dyadic shells `2^k ≤ |k| < 2^{k+1}`
/// up to the grid cutoff. The pieces sum to `f`.
pub fn dyadic_partition(f: &SpectralField, k_min: i32) -> Result<(SpectralField, Vec<SpectralField>)> {
    let cutoff = f.grid().cutoff();
    let low = band_project(f, 0.0, 2f64.powi(k_min), false)?;
    let mut shells = Vec::new();
    let mut k = k_min;
    while 2f64.powi(k) <= cutoff {
        shells.push(band_project(f, 2f64.powi(k), 2f64.powi(k + 1), false)?);
        k += 1;
    }
    Ok((low, shells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{inner, l2_norm, synthesize, fractional_derivative};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_field(grid: FourierGrid, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..grid.n_modes())
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        SpectralField::new(grid, coeffs).unwrap()
    }

    fn dist(a: &SpectralField, b: &SpectralField) -> f64 {
        l2_norm(&a.sub(b).unwrap())
    }

    fn unit_mode(grid: FourierGrid, j: i64) -> SpectralField {
        let mut c = vec![C64::new(0.0, 0.0); grid.n_modes()];
        c[grid.slot(j).unwrap()] = C64::new(1.0, 0.0);
        SpectralField::new(grid, c).unwrap()
    }

    #[test]
    fn propagate_identity_and_phase() {
        let g = FourierGrid::new(16, 1.0).unwrap();
        let f = random_field(g, 1);
        assert_eq!(propagate(&f, 0.0).unwrap(), f);
        let one = propagate(&unit_mode(g, 1), PI).unwrap();
        assert!((one.coeffs()[g.slot(1).unwrap()] - C64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!(propagate(&f, f64::NAN).is_err());
    }

    #[test]
    fn schrodinger_phase() {
        let g = FourierGrid::new(16, 1.0).unwrap();
        let f = random_field(g, 2);
        assert_eq!(schrodinger_propagate(&f, 0.0).unwrap(), f);
        let s = schrodinger_propagate(&unit_mode(g, 2), PI / 4.0).unwrap();
        assert!((s.coeffs()[g.slot(2).unwrap()] - C64::new(-1.0, 0.0)).norm() < 1e-15);
        let moved = schrodinger_propagate(&f, 3.7).unwrap();
        assert!((l2_norm(&moved) - l2_norm(&f)).abs() < 1e-12 * l2_norm(&f));
    }

    #[test]
    fn evolve_slices() {
        let g = FourierGrid::new(64, 0.25).unwrap();
        let st = SpaceTimeGrid::uniform(g, 2.0, 9).unwrap();
        let zero = evolve(&SpectralField::zeros(g), &st).unwrap();
        assert!(zero.samples().iter().all(|v| v.norm() == 0.0));
        let f = random_field(g, 9);
        let u = evolve(&f, &st).unwrap();
        let s0 = synthesize(&f);
        assert!(u.slice(4).iter().zip(&s0).all(|(a, b)| (a - b).norm() < 1e-14));
        let mass = l2_norm(&f).powi(2);
        for m in u.slice_powers(2.0) {
            assert!((m - mass).abs() < 1e-12 * mass);
        }
    }

    #[test]
    fn evolve_rejects_foreign_grid() {
        let g = FourierGrid::new(64, 0.25).unwrap();
        let h = FourierGrid::new(64, 0.5).unwrap();
        let st = SpaceTimeGrid::uniform(h, 1.0, 3).unwrap();
        assert_eq!(evolve(&SpectralField::gaussian(g), &st), Err(Error::GridMismatch));
    }

    #[test]
    fn band_projection_cases() {
        let g = FourierGrid::new(64, 0.5).unwrap();
        let f = random_field(g, 4);
        assert_eq!(band_project(&f, 0.0, f64::INFINITY, false).unwrap(), f);
        assert!(band_project(&f, 2.0, 2.0, false).is_err());
        let inside = band_project(&f, 1.0, 4.0, false).unwrap();
        let outside = band_project(&f, 1.0, 4.0, true).unwrap();
        let total = l2_norm(&f).powi(2);
        assert!((l2_norm(&inside).powi(2) + l2_norm(&outside).powi(2) - total).abs() < 1e-12 * total);
        assert_eq!(band_project(&inside, 1.0, 4.0, false).unwrap(), inside);
    }

    #[test]
    fn dyadic_pieces_sum_to_field() {
        let g = FourierGrid::new(256, 0.125).unwrap();
        let f = random_field(g, 8);
        let (low, shells) = dyadic_partition(&f, -2).unwrap();
        let mut sum = low;
        for s in &shells {
            sum = sum.add(s).unwrap();
        }
        assert!(dist(&sum, &f) < 1e-14 * l2_norm(&f));
        for (a, b) in shells.iter().zip(shells.iter().skip(1)) {
            assert!(inner(a, b).unwrap().norm() == 0.0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn unitary_group(seed in any::<u64>(), s in -2.0f64..2.0, t in -2.0f64..2.0) {
            let g = FourierGrid::new(128, 0.0625).unwrap();
            let f = random_field(g, seed);
            let n = l2_norm(&f);
            let ft = propagate(&f, t).unwrap();
            prop_assert!((l2_norm(&ft) - n).abs() <= 1e-12 * n);
            let two = propagate(&propagate(&f, s).unwrap(), t).unwrap();
            prop_assert!(dist(&two, &propagate(&f, s + t).unwrap()) <= 1e-12 * n);
        }

        #[test]
        fn commutes_with_fractional_derivative(seed in any::<u64>(), t in -3.0f64..3.0, alpha in -0.4f64..2.0) {
            let g = FourierGrid::new(64, 0.25).unwrap();
            let f = random_field(g, seed);
            let a = propagate(&fractional_derivative(&f, alpha).unwrap(), t).unwrap();
            let b = fractional_derivative(&propagate(&f, t).unwrap(), alpha).unwrap();
            let err = a.sub(&b).unwrap();
            prop_assert!(l2_norm(&err) <= 1e-14 * l2_norm(&a).max(1.0));
        }

        #[test]
        fn projection_is_self_adjoint(s1 in any::<u64>(), s2 in any::<u64>(), lo in 0.0f64..3.0, width in 0.1f64..5.0) {
            let g = FourierGrid::new(64, 0.25).unwrap();
            let (f, h) = (random_field(g, s1), random_field(g, s2));
            let pf = band_project(&f, lo, lo + width, false).unwrap();
            let ph = band_project(&h, lo, lo + width, false).unwrap();
            let a = inner(&pf, &h).unwrap();
            let b = inner(&f, &ph).unwrap();
            prop_assert!((a - b).norm() <= 1e-13 * (1.0 + a.norm()));
            prop_assert_eq!(band_project(&pf, lo, lo + width, false).unwrap(), pf);
        }
    }
}
