//! Fast invariant suite on small grids.

use airy_core::airy::{propagate, schrodinger_propagate};
use airy_core::decay::frequency_split;
use airy_core::functional::{el_map_with_norm, window_norm8_pow};
use airy_core::io::{read_field, write_field};
use airy_core::multilinear::{
    q_form, sample_constraint, sublinearity_check, weighted_comparison, Indicator, Profile, SamplerConfig, WeightSpec,
};
use airy_core::profile::{l8_additivity_check, BubbleParams, WindowPlan};
use airy_core::spectral::{analyze, inner, l2_norm, synthesize};
use airy_core::symmetry::{ratio_invariance, SymmetryElement};
use airy_core::{FourierGrid, SpaceTimeGrid, SpectralField, TimeWindow, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Config;
use crate::error::CliError;
use crate::output::{num, OutDir};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tol: f64,
}

impl Check {
    pub fn pass(&self) -> bool {
        self.value <= self.tol
    }
}

fn random_field(g: FourierGrid, rng: &mut ChaCha8Rng, decay: f64) -> SpectralField {
    SpectralField::from_fn(g, |k| {
        let env = (-decay * k * k).exp();
        C64::new(rng.random_range(-1.0..1.0) * env, rng.random_range(-1.0..1.0) * env)
    })
    .expect("finite coefficients")
}

fn rel(a: &SpectralField, b: &SpectralField) -> Result<f64, CliError> {
    Ok(l2_norm(&a.sub(b)?) / l2_norm(b))
}

pub fn checks(seed: u64) -> Result<Vec<Check>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let g = FourierGrid::new(128, 0.125)?;
    let (mut round, mut parseval, mut unitary, mut group) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..10 {
        let f = random_field(g, &mut rng, 0.02);
        let x = synthesize(&f);
        round = round.max(rel(&analyze(&x, g)?, &f)?);
        let mass: f64 = x.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.dx();
        parseval = parseval.max((mass - l2_norm(&f).powi(2)).abs() / l2_norm(&f).powi(2));
        let (t1, t2) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let u = propagate(&f, t1)?;
        unitary = unitary.max((l2_norm(&u) - l2_norm(&f)).abs() / l2_norm(&f));
        unitary = unitary.max((l2_norm(&schrodinger_propagate(&f, t1)?) - l2_norm(&f)).abs() / l2_norm(&f));
        group = group.max(rel(&propagate(&u, t2)?, &propagate(&f, t1 + t2)?)?);
    }
    out.push(Check { name: "transform round trip", value: round, tol: 1e-12 });
    out.push(Check { name: "Parseval", value: parseval, tol: 1e-12 });
    out.push(Check { name: "propagator unitarity", value: unitary, tol: 1e-12 });
    out.push(Check { name: "propagator group law", value: group, tol: 1e-12 });

    let g = FourierGrid::new(64, 0.25)?;
    let stg = SpaceTimeGrid::uniform(g, 1.0, 33)?;
    let (mut pair, mut cross) = (0.0f64, 0.0f64);
    for _ in 0..3 {
        let f = random_field(g, &mut rng, 0.1);
        let h = random_field(g, &mut rng, 0.1);
        let (lam, n8) = el_map_with_norm(&f, &stg, 4)?;
        pair = pair.max((inner(&f, &lam)? - n8).norm() / n8);
        let q = q_form([&h, &f, &f, &f, &f, &f, &f, &f], &stg, 4)?;
        cross = cross.max((inner(&h, &lam)? - q).norm() / q.norm());
        let direct = window_norm8_pow(&f, &stg, 4)?;
        pair = pair.max((direct - n8).abs() / n8);
    }
    out.push(Check { name: "Euler-Lagrange pairing", value: pair, tol: 1e-8 });
    out.push(Check { name: "Euler-Lagrange vs 8-linear form", value: cross, tol: 1e-8 });

    let g = FourierGrid::new(256, 0.0625)?;
    let stg = SpaceTimeGrid::uniform(g, 1.0, 65)?;
    let f = SpectralField::gaussian(g);
    let mut sym = 0.0f64;
    for e in [SymmetryElement::phase(0.7), SymmetryElement::translation(5.0 * g.dx()), SymmetryElement::scaling(2.0)] {
        sym = sym.max(ratio_invariance(&f, &e, &stg)?);
    }
    out.push(Check { name: "ratio symmetry invariance", value: sym, tol: 1e-6 });

    let f = random_field(FourierGrid::new(32, 0.3)?, &mut rng, 0.05);
    let back = read_field(&write_field(&f))?;
    out.push(Check { name: "field file round trip", value: if back == f { 0.0 } else { 1.0 }, tol: 0.0 });

    let split = frequency_split(&SpectralField::gaussian(FourierGrid::new(256, 0.05)?), 2.0)?;
    let whole = split.low.add(&split.mid)?.add(&split.high)?;
    let gauss = SpectralField::gaussian(*whole.grid());
    out.push(Check { name: "frequency split partition", value: rel(&whole, &gauss)?, tol: 1e-15 });

    let cfg = SamplerConfig::normal(1.5, 20_000, 1e-4, seed);
    let samples = sample_constraint(&cfg)?;
    let off = samples.iter().filter(|s| !s.on_surface()).count();
    out.push(Check { name: "sampler points on surface", value: off as f64, tol: 0.0 });
    let ws: Vec<WeightSpec> = [(0.0, 0.0), (0.1, 0.1), (1.0, 1.0), (10.0, 0.0)]
        .iter()
        .map(|&(m, e)| WeightSpec::new(m, e))
        .collect::<Result<_, _>>()?;
    let mut sub = 0usize;
    for s in &samples {
        for w in &ws {
            sub += usize::from(!sublinearity_check(s, *w)?);
        }
    }
    out.push(Check { name: "pointwise sublinearity", value: sub as f64, tol: 0.0 });
    let ind = Indicator::symmetric(1.0);
    let p: [&dyn Profile; 8] = [&ind; 8];
    let cmp = weighted_comparison(&p, &ws, &SamplerConfig::symmetric(1.0, 20_000, 1e-4, seed.wrapping_add(1)))?;
    let viol: u64 = cmp.weighted.iter().map(|(_, _, v)| v).sum();
    out.push(Check { name: "weighted form domination", value: viol as f64, tol: 0.0 });

    let phi = SpectralField::gaussian(FourierGrid::new(128, 0.125)?);
    let plan = WindowPlan { base: TimeWindow { center: 0.0, half_width: 0.5, step: 0.01 }, grading: 1.0 };
    let moved = BubbleParams::new(1.0, 4.0, 0.2)?;
    let one = l8_additivity_check(&[(phi.clone(), moved)], &plan)?;
    out.push(Check { name: "single bubble additivity", value: one.rel_gap, tol: 1e-10 });
    let id = BubbleParams::identity();
    let two = l8_additivity_check(&[(phi.clone(), id), (phi, id)], &plan)?;
    out.push(Check { name: "coincident bubbles 2^8 - 1", value: (two.rel_gap - 127.0).abs(), tol: 1e-10 });
    Ok(out)
}

pub fn run(cfg: &Config, out: &mut OutDir) -> Result<(), CliError> {
    out.grid(&FourierGrid::new(128, 0.125)?);
    let all = checks(cfg.seed)?;
    let rows: Vec<Vec<String>> = all
        .iter()
        .map(|c| vec![c.name.to_string(), num(c.value), num(c.tol), c.pass().to_string()])
        .collect();
    out.write_csv("selftest.csv", &["check", "value", "tol", "pass"], &rows)?;
    let failed: Vec<&str> = all.iter().filter(|c| !c.pass()).map(|c| c.name).collect();
    for c in &all {
        println!("{:<34} {:>10.3e} <= {:<8.1e} {}", c.name, c.value, c.tol, if c.pass() { "ok" } else { "FAIL" });
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("selftest failures: {}", failed.join(", "))))
    }
}
