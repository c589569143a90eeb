//! One function per subcommand. Each writes its artifacts into the output
//! directory and records flags there; the manifest is written by the caller.

use std::f64::consts::PI;
use std::path::Path;

use airy_core::bilinear::{separation_experiment, SeparationWindow};
use airy_core::decay::{bootstrap_terms, decay_certificate, poly_analysis, tail_norm, BootstrapPoly, TailSpec};
use airy_core::functional::{
    slice_norm8_pows, solve_extremiser, strichartz_ratio, window_diagnostics, StopReason, WindowDiagnostics, ADEQUACY_TOL,
};
use airy_core::io::{read_field, write_field};
use airy_core::multilinear::{
    m_form, q_form, sample_constraint, singular_sweep, sublinearity_check, weighted_comparison,
    weight_f, weighted_scaling_experiment, Gaussian, Indicator, Profile, SamplerConfig, WeightSpec,
};
use airy_core::profile::{decoupling_experiment, BubbleParams, DecouplingRow, WindowPlan};
use airy_core::symmetry::boost_decay_experiment;
use airy_core::{FourierGrid, SolverOptions, SpaceTimeGrid, SpectralField, TimeWindow, C64};
use serde_json::json;

use crate::config::{Config, GridConfig, ProfileKind, WindowConfig};
use crate::error::CliError;
use crate::output::{num, OutDir};
use crate::plot::{render, PlotSpec, Series};

fn grid(g: &GridConfig) -> Result<FourierGrid, CliError> {
    FourierGrid::new(g.n_modes, g.dk).map_err(|e| CliError::Usage(format!("[grid] {e}")))
}

fn window(g: FourierGrid, w: &WindowConfig) -> Result<SpaceTimeGrid, CliError> {
    SpaceTimeGrid::uniform(g, w.t_max, w.n_t).map_err(|e| CliError::Usage(format!("[window] {e}")))
}

fn load_field(path: &Path) -> Result<SpectralField, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read field {}: {e}", path.display())))?;
    read_field(&text).map_err(|e| CliError::Usage(format!("field {}: {e}", path.display())))
}

fn diagnostics_json(d: &WindowDiagnostics) -> serde_json::Value {
    json!({
        "window_norm8_pow": d.window_norm8_pow,
        "boundary_mass": d.boundary_mass,
        "tail_bound": d.tail_bound,
        "tail_fraction": d.tail_fraction,
        "time_refinement_gap": d.time_refinement_gap,
        "window_limited": d.window_limited,
        "time_underresolved": d.time_underresolved,
    })
}

fn flag_diagnostics(out: &mut OutDir, d: &WindowDiagnostics) {
    if d.window_limited {
        out.flags.resolution(format!(
            "window limited: boundary mass {:e}, tail fraction {:e}",
            d.boundary_mass, d.tail_fraction
        ));
    }
    if d.time_underresolved {
        out.flags.resolution(format!("time under-resolved: refinement gap {:e}", d.time_refinement_gap));
    }
}

fn write_plot(out: &mut OutDir, name: &str, series: &Series, spec: &PlotSpec) -> Result<Option<f64>, CliError> {
    match render(series, spec) {
        Ok((svg, slope)) => {
            out.write(name, svg.as_bytes())?;
            Ok(slope)
        }
        Err(e) => {
            out.flags.note(format!("{name} skipped: {e}"));
            Ok(None)
        }
    }
}

fn series(x: &str, y: &str, points: Vec<(f64, f64)>) -> Series {
    Series { x_label: x.into(), y_label: y.into(), points }
}

fn solver_options(cfg: &Config, stg: SpaceTimeGrid) -> SolverOptions {
    let mut opts = SolverOptions::new(stg);
    opts.max_iters = cfg.solver.max_iters;
    opts.residual_tol = cfg.solver.residual_tol;
    opts.ratio_stall_tol = cfg.solver.ratio_stall_tol;
    opts.dealias_pad_factor = cfg.window.pad;
    opts.scale_gauge = cfg.solver.scale_gauge;
    opts
}

fn initial_field(cfg: &Config) -> Result<SpectralField, CliError> {
    match &cfg.solver.init {
        Some(p) => load_field(p),
        None => Ok(SpectralField::gaussian(grid(&cfg.grid)?)),
    }
}

/// Runs the solver and writes the field, trace and report. Returns the report
/// and whether it converged.
fn solve_into(cfg: &Config, out: &mut OutDir) -> Result<(airy_core::ExtremiserReport, bool), CliError> {
    let f0 = initial_field(cfg)?;
    out.grid(f0.grid());
    let opts = solver_options(cfg, window(*f0.grid(), &cfg.window)?);
    let report = solve_extremiser(&f0, &opts)?;
    let ratio = strichartz_ratio(&report.f_star, &opts.stg)?;
    out.write("f_star.field", write_field(&report.f_star).as_bytes())?;
    let rows: Vec<Vec<String>> = report
        .trace
        .iter()
        .map(|r| vec![r.iter.to_string(), num(r.ratio), num(r.omega), num(r.residual)])
        .collect();
    out.write_csv("trace.csv", &["iter", "ratio", "omega", "residual"], &rows)?;
    let pts = report.trace.iter().map(|r| (r.iter as f64, r.residual)).collect();
    let spec = PlotSpec { x: None, y: None, log_x: false, log_y: true, title: "solver residual".into() };
    write_plot(out, "trace.svg", &series("iter", "residual", pts), &spec)?;
    let stop = match report.stop {
        StopReason::Converged => "converged",
        StopReason::Stalled => "stalled",
        StopReason::MaxIters => "max_iters",
    };
    out.write_json(
        "report.json",
        &json!({
            "ratio": ratio,
            "omega": report.omega,
            "residual": report.residual,
            "residual_tol": opts.residual_tol,
            "a_estimate": report.a_estimate,
            "iterations": report.trace.len(),
            "stop": stop,
            "converged": report.converged,
            "monotone": report.monotone,
            "diagnostics": diagnostics_json(&report.diagnostics),
        }),
    )?;
    flag_diagnostics(out, &report.diagnostics);
    if !report.monotone {
        out.flags.note("ratio trace not monotone");
    }
    let converged = report.converged;
    if !converged {
        out.flags.note(format!("solver stopped ({stop}) with residual {:e}", report.residual));
    }
    Ok((report, converged))
}

pub fn solve(cfg: &Config, out: &mut OutDir) -> Result<(), CliError> {
    let (report, converged) = solve_into(cfg, out)?;
    if converged {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "solver did not converge: residual {:e} > {:e}",
            report.residual, cfg.solver.residual_tol
        )))
    }
}

pub fn ratio(cfg: &Config, out: &mut OutDir) -> Result<(), CliError> {
    let f = match &cfg.experiment.ratio.field {
        Some(p) => load_field(p)?,
        None => SpectralField::gaussian(grid(&cfg.grid)?),
    };
    out.grid(f.grid());
    let stg = window(*f.grid(), &cfg.window)?;
    let r = strichartz_ratio(&f, &stg)?;
    let slices = slice_norm8_pows(&f, &stg, cfg.window.pad)?;
    let d = window_diagnostics(&f, &stg, cfg.window.pad)?;
    let rows: Vec<Vec<String>> = stg
        .times()
        .iter()
        .zip(stg.weights())
        .zip(&slices)
        .map(|((t, w), s)| vec![num(*t), num(*w), num(*s)])
        .collect();
    out.write_csv("slices.csv", &["t", "weight", "norm8_pow"], &rows)?;
    out.write_json("ratio.json", &json!({ "ratio": r, "diagnostics": diagnostics_json(&d) }))?;
    flag_diagnostics(out, &d);
    Ok(())
}

pub fn boost(cfg: &Config, out: &mut OutDir) -> Result<(), CliError> {
    let b = &cfg.experiment.boost;
    let g = FourierGrid::new(b.n_modes, b.dk).map_err(|e| CliError::Usage(format!("[experiment.boost] {e}")))?;
    out.grid(&g);
    let stg = SpaceTimeGrid::uniform(g, b.t_prime, b.n_t).map_err(|e| CliError::Usage(format!("[experiment.boost] {e}")))?;
    let exp = boost_decay_experiment(&SpectralField::gaussian(g), &b.n_values, &stg)?;
    let rows: Vec<Vec<String>> =
        exp.points.iter().map(|p| vec![num(p.n), num(p.norm8), p.window_params()]).collect();
    out.write_csv("boost.csv", &["N", "norm8", "window_params"], &rows)?;
    let pts = exp.points.iter().map(|p| (p.n, p.norm8)).collect();
    write_plot(out, "boost.svg", &series("N", "norm8", pts), &PlotSpec::log_log("boost decay"))?;
    out.write_json(
        "summary.json",
        &json!({ "slope": exp.slope(), "intercept": exp.fit.intercept, "r_squared": exp.fit.r_squared }),
    )?;
    for p in &exp.points {
        if p.boundary_mass > ADEQUACY_TOL {
            out.flags.resolution(format!("boost N = {}: boundary mass {:e}", p.n, p.boundary_mass));
        }
    }
    Ok(())
}

pub fn bilinear(cfg: &Config, out: &mut OutDir) -> Result<(), CliError> {
    let b = &cfg.experiment.bilinear;
    let g = FourierGrid::new(b.n_modes, b.dk).map_err(|e| CliError::Usage(format!("[experiment.bilinear] {e}")))?;
    out.grid(&g);
    let win = SeparationWindow {
        t_ref: b.t_ref,
        n_ref: b.n_ref,
        samples_per_period: b.samples_per_period,
        min_nodes: b.min_nodes,
    };
    let seeds: Vec<u64> = (0..b.n_seeds).map(|i| cfg.seed.wrapping_add(i)).collect();
    let res = separation_experiment(g, b.n1, &b.n2_values, win, &seeds, b.reference_slope)?;
    let rows: Vec<Vec<String>> =
        res.rows.iter().map(|r| vec![num(r.n1), num(r.n2), r.seed.to_string(), num(r.ratio)]).collect();
    out.write_csv("bilinear.csv", &["N1", "N2", "seed", "ratio"], &rows)?;
    let med: Vec<Vec<String>> = res.medians.iter().map(|(n, m)| vec![num(*n), num(*m)]).collect();
    out.write_csv("bilinear_medians.csv", &["N2", "median_ratio"], &med)?;
    write_plot(out, "bilinear.svg", &series("N2", "median_ratio", res.medians.clone()), &PlotSpec::log_log("bilinear ratio"))?;
    out.write_json(
        "summary.json",
        &json!({
            "slope": res.fit.slope,
            "intercept": res.fit.intercept,
            "r_squared": res.fit.r_squared,
            "reference_slope": b.reference_slope,
            "steeper_than_reference": res.steeper_than.is_some(),
        }),
    )?;
    if let Some(r) = res.steeper_than {
        out.flags.note(format!("bilinear slope {} steeper than the reference {r}", res.fit.slope));
    }
    Ok(())
}

fn estimate_row(label: &str, e: &airy_core::multilinear::Estimate) -> Vec<String> {
    vec![label.to_string(), num(e.value), num(e.stderr), e.n_samples.to_string(), e.seed.to_string()]
}

pub fn multilinear(cfg: &Config, out: &mut OutDir) -> Result<(), CliError> {
    let m = &cfg.experiment.multilinear;
    let s = &cfg.sampler;
    let usage = |e: airy_core::Error| CliError::Usage(format!("[experiment.multilinear] {e}"));
    if !(m.width > 0.0 && m.width.is_finite()) {
        return Err(CliError::Usage(format!("[experiment.multilinear] width must be positive, got {}", m.width)));
    }
    let (profile, mut sampler): (Box<dyn Profile>, SamplerConfig) = match m.profile {
        ProfileKind::Indicator => (
            Box::new(Indicator::symmetric(m.width)),
            SamplerConfig::symmetric(m.width, s.n_samples, s.singular_cutoff, cfg.seed),
        ),
        ProfileKind::Gaussian => (
            Box::new(Gaussian { amplitude: 1.0, width: m.width }),
            SamplerConfig::normal(m.width, s.n_samples, s.singular_cutoff, cfg.seed),
        ),
    };
    sampler.n_streams = s.n_streams;
    sampler.validate().map_err(|e| CliError::Usage(format!("[sampler] {e}")))?;
    let profiles: [&dyn Profile; 8] = [profile.as_ref(); 8];

    let g = FourierGrid::new(m.oracle_n_modes, m.oracle_dk).map_err(usage)?;
    out.grid(&g);
    let stg = SpaceTimeGrid::uniform(g, m.oracle_t_max, m.oracle_n_t).map_err(usage)?;
    let field = SpectralField::from_fn(g, |k| C64::new(profile.eval(k), 0.0))?;
    let q = q_form([&field; 8], &stg, cfg.window.pad)?.re;
    let est = m_form(&profiles, &sampler)?;
    let q2 = (2.0 * PI).powi(2) * q;
    let rel = (est.value - q2).abs() / q2.abs();
    let sigmas = (est.value - q2).abs() / est.stderr;

    let mut ests = vec![estimate_row("M", &est)];
    let sweep = singular_sweep(&profiles, &sampler, &m.cutoff_sweep)?;
    let sweep_rows: Vec<Vec<String>> = sweep
        .iter()
        .map(|(c, e)| vec![num(*c), num(e.value), num(e.stderr), e.n_samples.to_string(), e.seed.to_string()])
        .collect();
    out.write_csv("singular_sweep.csv", &["cutoff", "value", "stderr", "n_samples", "seed"], &sweep_rows)?;

    let mut weights = Vec::new();
    for &mu in &m.mu_values {
        for &eps in &m.eps_values {
            weights.push(WeightSpec::new(mu, eps).map_err(usage)?);
        }
    }
    let cmp_cfg = SamplerConfig { rng_seed: cfg.seed.wrapping_add(1), ..sampler.clone() };
    let cmp = weighted_comparison(&profiles, &weights, &cmp_cfg)?;
    ests.push(estimate_row("M_base", &cmp.base));
    let rows: Vec<Vec<String>> = cmp
        .weighted
        .iter()
        .map(|(w, e, v)| {
            vec![num(w.mu), num(w.eps), num(e.value), num(e.stderr), e.n_samples.to_string(), e.seed.to_string(), v.to_string()]
        })
        .collect();
    out.write_csv("weighted.csv", &["mu", "eps", "value", "stderr", "n_samples", "seed", "violations"], &rows)?;
    let violations: u64 = cmp.weighted.iter().map(|(_, _, v)| v).sum();

    let dump_cfg = SamplerConfig {
        n_samples: (4 * m.dump_rows as u64).max(1_000).min(s.n_samples.max(1_000)),
        rng_seed: cfg.seed.wrapping_add(3),
        ..sampler.clone()
    };
    let samples = sample_constraint(&dump_cfg)?;
    let mut sub_fail = 0usize;
    for p in &samples {
        for w in &weights {
            if !sublinearity_check(p, *w)? {
                sub_fail += 1;
            }
        }
    }
    let dump: Vec<Vec<String>> = samples
        .iter()
        .take(m.dump_rows)
        .map(|p| p.eta.iter().map(|v| num(*v)).chain(std::iter::once(num(p.weight))).collect())
        .collect();
    let header = ["eta1", "eta2", "eta3", "eta4", "eta5", "eta6", "eta7", "eta8", "weight"];
    out.write_csv("samples.csv", &header, &dump)?;

    let w = WeightSpec::new(m.scaling_mu, m.scaling_eps).map_err(usage)?;
    let exp = weighted_scaling_experiment(
        m.scaling_s,
        &m.scaling_l,
        w,
        s.n_samples,
        s.singular_cutoff,
        cfg.seed.wrapping_add(2),
    )?;
    let rows: Vec<Vec<String>> = exp
        .points
        .iter()
        .map(|p| vec![num(p.l), num(p.m_weighted.value), num(p.m_weighted.stderr), num(p.norm_product), num(p.ratio)])
        .collect();
    out.write_csv("scaling.csv", &["L", "m_weighted", "stderr", "norm_product", "ratio"], &rows)?;
    let pts = exp.points.iter().map(|p| (p.l, p.ratio)).collect();
    write_plot(out, "scaling.svg", &series("L", "ratio", pts), &PlotSpec::log_log("weighted form scaling"))?;
    for p in &exp.points {
        ests.push(estimate_row(&format!("M_F scaling L={}", p.l), &p.m_weighted));
    }
    out.write_csv("estimates.csv", &["quantity", "value", "stderr", "n_samples", "seed"], &ests)?;

    let agree = rel <= 0.05;
    out.write_json(
        "summary.json",
        &json!({
            "m": est.value,
            "m_stderr": est.stderr,
            "q": q,
            "q_scaled": q2,
            "relative_gap": rel,
            "sigmas": sigmas,
            "cross_oracle_within_5_percent": agree,
            "domination_violations": violations,
            "surface_points": cmp.surface_points,
            "sublinearity_failures": sub_fail,
            "sublinearity_checks": samples.len() * weights.len(),
            "scaling_slope": exp.fit.slope,
            "scaling_r_squared": exp.fit.r_squared,
        }),
    )?;
    if !agree {
        out.flags.note(format!("cross-oracle gap {rel:e} exceeds 5%"));
    }
    if violations > 0 {
        out.flags.note(format!("weighted form exceeded the base form on {violations} points"));
    }
    if sub_fail > 0 {
        out.flags.note(format!("sublinearity failed on {sub_fail} checks"));
    }
    if exp.fit.slope < m.reference_slope {
        out.flags.note(format!("scaling slope {} steeper than the reference {}", exp.fit.slope, m.reference_slope));
    }
    Ok(())
}

pub fn decay(cfg: &Config, out: &mut OutDir) -> Result<(), CliError> {
    let d = &cfg.experiment.decay;
    let f = match &d.field {
        Some(p) => {
            let f = load_field(p)?;
            out.grid(f.grid());
            f
        }
        None => {
            let (report, converged) = solve_into(cfg, out)?;
            if !converged {
                return Err(CliError::Failed(format!("solver did not converge: residual {:e}", report.residual)));
            }
            report.f_star
        }
    };
    let cert = decay_certificate(&f, d.floor)?;
    out.write("certificate.txt", cert.to_text().as_bytes())?;

    let mut rows = Vec::new();
    for &s in &d.s_values {
        for &mu in &d.mu_values {
            let mut prev: Option<f64> = None;
            for &eps in &d.eps_values {
                let spec = TailSpec::new(s, WeightSpec::new(mu, eps)?)
                    .map_err(|e| CliError::Usage(format!("[experiment.decay] {e}")))?;
                let t = tail_norm(&f, &spec);
                if t.unresolved {
                    out.flags.resolution(format!("tail norm unresolved at s = {s}, mu = {mu}, eps = {eps}"));
                }
                if prev.is_some_and(|p| t.value < p) {
                    out.flags.note(format!("tail norm decreased along the eps sweep at s = {s}, mu = {mu}, eps = {eps}"));
                }
                prev = Some(t.value);
                rows.push(vec![num(s), num(mu), num(eps), num(t.value), t.unresolved.to_string()]);
            }
        }
    }
    out.write_csv("tail_sweep.csv", &["s", "mu", "eps", "tail_norm", "unresolved"], &rows)?;
    dichotomy(cfg, &f, out)?;

    let g = *f.grid();
    let spectrum: Vec<(f64, f64)> = f.coeffs().iter().enumerate().map(|(i, c)| (g.k(i), c.norm())).collect();
    let rows: Vec<Vec<String>> = spectrum.iter().map(|(k, a)| vec![num(*k), num(*a)]).collect();
    out.write_csv("spectrum.csv", &["k", "modulus"], &rows)?;
    let pos: Vec<(f64, f64)> = spectrum.into_iter().filter(|&(k, a)| k > 0.0 && a > 0.0).collect();
    let spec = PlotSpec { x: None, y: None, log_x: false, log_y: true, title: format!("spectrum, mu_hat {:.3e}", cert.mu_hat) };
    write_plot(out, "spectrum.svg", &series("k", "modulus", pos), &spec)?;
    Ok(())
}

/// Bootstrap terms at `mu = s^-6` and the position of the tail norm relative to
/// the roots `v0 < v1` of `G = G_max/2`, with `C` the measured ratio
/// `M(h_>, h, ..., h) / (|h_>| |h|^7)`. Diagnostic only.
fn dichotomy(cfg: &Config, f: &SpectralField, out: &mut OutDir) -> Result<(), CliError> {
    let d = &cfg.experiment.decay;
    let g = *f.grid();
    let omega = strichartz_ratio(f, &window(g, &cfg.window)?)?.powi(8);
    let mut rows = Vec::new();
    for (i, &s) in d.s_values.iter().enumerate() {
        let w = WeightSpec::new(s.powi(-6), d.bootstrap_eps)?;
        let mut sampler = SamplerConfig::normal(
            d.bootstrap_sigma,
            d.bootstrap_samples,
            cfg.sampler.singular_cutoff,
            cfg.seed.wrapping_add(10 + i as u64),
        );
        sampler.n_streams = cfg.sampler.n_streams;
        let bt = bootstrap_terms(f, s, w, &sampler)?;
        let tail = tail_norm(f, &TailSpec::new(s, w)?).value;
        let h_norm = (f
            .coeffs()
            .iter()
            .enumerate()
            .map(|(j, c)| c.norm_sqr() * (2.0 * weight_f(g.k(j), w)).exp())
            .sum::<f64>()
            * g.dk())
        .sqrt();
        let c = bt.total.value / (tail * h_norm.powi(7));
        let (v0, v1, side) = match BootstrapPoly::new(omega, c) {
            Ok(p) => {
                let a = poly_analysis(&p);
                let side = if tail <= a.v0 {
                    "below_v0"
                } else if tail >= a.v1 {
                    "above_v1"
                } else {
                    "between"
                };
                (num(a.v0), num(a.v1), side)
            }
            Err(_) => (String::new(), String::new(), "undetermined"),
        };
        if bt.unresolved {
            out.flags.resolution(format!("bootstrap split at s = {s} reaches the grid cutoff"));
        }
        rows.push(vec![
            num(s),
            num(w.mu),
            num(w.eps),
            num(bt.a.value),
            num(bt.a.stderr),
            num(bt.b1.value),
            num(bt.b1.stderr),
            num(bt.b2.value),
            num(bt.b2.stderr),
            num(bt.total.value),
            num(bt.total.stderr),
            num(c),
            num(omega),
            num(tail),
            v0,
            v1,
            side.to_string(),
            bt.unresolved.to_string(),
        ]);
    }
    let header = [
        "s", "mu", "eps", "a", "a_stderr", "b1", "b1_stderr", "b2", "b2_stderr", "total", "total_stderr", "c_measured",
        "omega", "tail_norm", "v0", "v1", "side", "unresolved",
    ];
    out.write_csv("bootstrap.csv", &header, &rows)
}

fn decoupling_rows(rows: &[DecouplingRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| vec![num(r.divergence), num(r.cross_l4), num(r.l8_lhs), num(r.l8_rhs)])
        .collect()
}

pub fn profile(cfg: &Config, out: &mut OutDir) -> Result<(), CliError> {
    let p = &cfg.experiment.profile;
    let usage = |e: airy_core::Error| CliError::Usage(format!("[experiment.profile] {e}"));
    let plan = WindowPlan {
        base: TimeWindow { center: 0.0, half_width: p.base_half_width, step: p.base_step },
        grading: p.grading,
    };
    let id = BubbleParams::identity();
    let header = ["divergence", "cross_l4", "l8_lhs", "l8_rhs"];

    let g = FourierGrid::new(p.scale_n_modes, p.scale_dk).map_err(usage)?;
    out.grid(&g);
    let phi = SpectralField::gaussian(g);
    let path = p
        .scale_ratios
        .iter()
        .map(|&h| BubbleParams::new(h, 0.0, 0.0).map(|b| (id, b)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(usage)?;
    let scale = decoupling_experiment(&phi, &phi, &path, &plan)?;
    out.write_csv("profile_scale.csv", &header, &decoupling_rows(&scale))?;

    let g = FourierGrid::new(p.sep_n_modes, p.sep_dk).map_err(usage)?;
    out.grid(&g);
    let phi = SpectralField::gaussian(g);
    let path = p
        .separations
        .iter()
        .map(|&x| BubbleParams::new(1.0, x, 0.0).map(|b| (id, b)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(usage)?;
    let sep = decoupling_experiment(&phi, &phi, &path, &plan)?;
    out.write_csv("profile_separation.csv", &header, &decoupling_rows(&sep))?;

    for (name, rows) in [("profile_scale.svg", &scale), ("profile_separation.svg", &sep)] {
        let pts = rows.iter().map(|r| (r.divergence, r.cross_l4)).collect();
        write_plot(out, name, &series("divergence", "cross_l4", pts), &PlotSpec::log_log("cross term"))?;
    }
    let gaps = |rows: &[DecouplingRow]| -> Vec<f64> { rows.iter().map(|r| (r.l8_lhs - r.l8_rhs).abs() / r.l8_rhs).collect() };
    out.write_json("summary.json", &json!({ "scale_rel_gaps": gaps(&scale), "separation_rel_gaps": gaps(&sep) }))?;
    Ok(())
}
