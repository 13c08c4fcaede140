//! The five commands. Each writes into a locked output directory and
//! returns whether its checks passed.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use exactborn::born::{
    direction_pairs, fibonacci_sphere, first_born_amplitude, format_number, invisibility_report, second_born_amplitude,
    AmplitudeMap, BornOrder, F2Quadrature,
};
use exactborn::em::{free_hamiltonian, projector_pair, varpi_unchecked, DetectorDirection, IncidentWave, Polarization};
use exactborn::lemma_lab::{
    chain_operator_residual, convolution_support_check, make_salpha_sample, product_support_check,
    reciprocal_support_check, SampleShape,
};
use exactborn::linalg::{c, max_abs, norm3, CMat4, Vec2, Vec3};
use exactborn::medium::{support_report, MediumProfile, SupportOptions};
use exactborn::transfer::{
    amplitude_from_t, dyson_second_order_norm, sandwich_identity_residual, solve_t, transfer_first_order, MomentumGrid,
    SolvePath, TransferKernel,
};
use exactborn::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{RunConfig, Suite};
use crate::output::OutputDir;

/// Polar angles of the route-check detectors (degrees), each at phi = 0 and 0.3.
pub const ROUTE_THETAS_DEG: [f64; 8] = [20.0, 40.0, 60.0, 75.0, 105.0, 120.0, 140.0, 160.0];

/// Settings shared by every command.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: RunConfig,
    pub medium: MediumProfile,
    pub expect_compliant: bool,
    pub order: BornOrder,
    /// Physical alpha used to rescale lengths on output.
    pub alpha_out: f64,
}

impl Context {
    fn alpha(&self) -> f64 {
        self.config.medium.alpha
    }

    fn length_unit(&self) -> f64 {
        1.0 / self.alpha_out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub pass: bool,
    pub metric: f64,
    pub tolerance: f64,
    /// Whether the outcome decides the exit code.
    pub gating: bool,
    pub details: Value,
}

fn rel(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

fn suite_projector(ctx: &Context) -> Result<SuiteResult> {
    let k = ctx.config.k();
    let eps = ctx.config.grid.eps_ann;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.config.seed);
    let mut worst = 0.0f64;
    let mut n = 0;
    while n < ctx.config.sampling.projector_samples {
        let p = Vec2::new(rng.random_range(-2.0 * k..2.0 * k), rng.random_range(-2.0 * k..2.0 * k));
        if (p.norm() - k).abs() <= eps * k {
            continue;
        }
        let w = varpi_unchecked(&p, k);
        let [p1, p2] = projector_pair(&p, k, w);
        let h = free_hamiltonian(&p, k);
        let id = CMat4::identity();
        // the eigenvalue scale grows with |p|; compare relative to it
        let scale = w.norm().max(1.0);
        for r in [
            max_abs(&(p1 + p2 - id)),
            max_abs(&(p1 * p1 - p1)),
            max_abs(&(p2 * p2 - p2)),
            max_abs(&(p1 * p2)),
            max_abs(&(h * p1 + p1 * w)) / scale,
            max_abs(&(h * p2 - p2 * w)) / scale,
        ] {
            worst = worst.max(r);
        }
        n += 1;
    }
    let tol = ctx.config.tolerances.projector;
    Ok(SuiteResult {
        pass: worst < tol,
        metric: worst,
        tolerance: tol,
        gating: true,
        details: json!({ "samples": n, "k": k }),
    })
}

fn suite_lemma(ctx: &Context) -> Result<SuiteResult> {
    let seed = ctx.config.seed;
    let c11 = chain_operator_residual(1, 2.0, 1.0, 1.0, seed)?;
    let c12 = chain_operator_residual(2, 1.0, 1.0, 1.0, seed)?;
    let contrast = chain_operator_residual(1, 0.5, 1.0, 1.0, seed)?;
    let f1 = make_salpha_sample(1.0, 1.5, SampleShape::Gaussian, seed)?;
    let f2 = make_salpha_sample(1.0, 1.2, SampleShape::Exponential, seed.wrapping_add(1))?;
    let product = product_support_check(&f1, &f2, 1.0);
    let sup = f1.to_space().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let eta = f1.scaled(c(0.3 / sup, 0.0));
    let recip = reciprocal_support_check(&eta, 1.0, Some(&f2))?;
    let conv = convolution_support_check(1.0, 0.5, seed)?;
    let metric = [
        c11.relative,
        c12.relative,
        product.leak,
        recip.reciprocal.leak,
        conv.leak,
    ]
    .into_iter()
    .chain(recip.quotient.map(|q| q.leak))
    .fold(0.0, f64::max);
    let tol = ctx.config.tolerances.lemma;
    Ok(SuiteResult {
        pass: metric < tol && recip.pass && contrast.relative > 1e-3,
        metric,
        tolerance: tol,
        gating: true,
        details: json!({
            "chain_one_beta_two_alpha": c11.relative,
            "chain_two_beta_alpha": c12.relative,
            "chain_contrast_beta_half_alpha": contrast.relative,
            "product_leak": product.leak,
            "reciprocal_leak": recip.reciprocal.leak,
            "convolution_leak": conv.leak,
            "series": recip.series,
        }),
    })
}

fn suite_support(ctx: &Context) -> Result<SuiteResult> {
    let opts = SupportOptions::for_profile(&ctx.medium);
    let tol = ctx.config.tolerances.support;
    let opts = SupportOptions { tolerance: tol, ..opts };
    let r = support_report(&ctx.medium, ctx.alpha(), &opts)?;
    Ok(SuiteResult {
        pass: r.max_leak < tol,
        metric: r.max_leak,
        tolerance: tol,
        gating: ctx.expect_compliant,
        details: serde_json::to_value(&r)?,
    })
}

fn suite_invisibility(ctx: &Context) -> Result<SuiteResult> {
    let k = 0.5 * ctx.alpha();
    let r = invisibility_report(&ctx.medium, k, &direction_pairs(ctx.config.sampling.pairs), None)?;
    let scale = ctx.medium.peak_fourier_3d() * k * k / (4.0 * PI);
    let metric = rel(r.max_f1, scale);
    let tol = ctx.config.tolerances.invisibility;
    Ok(SuiteResult {
        pass: metric <= tol,
        metric,
        tolerance: tol,
        gating: ctx.expect_compliant,
        details: json!({ "k": k, "max_f1": r.max_f1, "evaluations": r.evaluations, "scale": scale }),
    })
}

fn suite_identity(ctx: &Context) -> Result<SuiteResult> {
    let k = ctx.config.k();
    let g = MomentumGrid::disk_grid(k, ctx.config.grid.n_disk_dense, ctx.config.grid.eps_ann)?;
    let kern = transfer_first_order(&ctx.medium, &g)?;
    let kmax = kern.max_norm()?;
    let id = sandwich_identity_residual(&kern)?;
    let metric = rel(id, kmax * kmax);
    let tol = ctx.config.tolerances.identity;
    Ok(SuiteResult {
        pass: metric < tol,
        metric,
        tolerance: tol,
        gating: ctx.expect_compliant,
        details: json!({ "k": k, "kernel_max": kmax, "residual": id, "disk_points": g.disk_len() }),
    })
}

fn route_directions() -> Vec<DetectorDirection> {
    ROUTE_THETAS_DEG
        .iter()
        .flat_map(|t| [0.0, 0.3].map(|ph| DetectorDirection::new(t.to_radians(), ph)))
        .collect()
}

/// max |F_transfer - F1| and max |F1| over both polarizations of the configured incidence.
fn route_gap(ctx: &Context, kern: &TransferKernel, dirs: &[DetectorDirection]) -> Result<(f64, f64)> {
    let base = ctx.config.incident_wave()?;
    let mut worst = 0.0f64;
    let mut peak = 0.0f64;
    for pol in [Polarization::Te, Polarization::Tm] {
        let w = IncidentWave::linear(base.k(), base.theta0(), base.phi0(), pol)?;
        let sol = solve_t(kern, &w, SolvePath::Fast)?;
        for d in dirs {
            let a = amplitude_from_t(&sol, d)?;
            let b = first_born_amplitude(&ctx.medium, &w, d)?;
            worst = worst.max(norm3(&(a - b)));
            peak = peak.max(norm3(&b));
        }
    }
    Ok((worst, peak))
}

fn suite_route(ctx: &Context) -> Result<SuiteResult> {
    let k = ctx.config.k();
    let g = MomentumGrid::disk_grid(k, ctx.config.grid.n_disk, ctx.config.grid.eps_ann)?;
    let kern = TransferKernel::lazy(&ctx.medium, &g)?;
    let dirs = route_directions();
    let (worst, peak) = route_gap(ctx, &kern, &dirs)?;
    let metric = rel(worst, peak);
    let tol = ctx.config.tolerances.route;
    Ok(SuiteResult {
        pass: metric < tol,
        metric,
        tolerance: tol,
        gating: true,
        details: json!({ "k": k, "n_disk": ctx.config.grid.n_disk, "directions": dirs.len(), "max_f1": peak }),
    })
}

fn suite_exactness(ctx: &Context) -> Result<SuiteResult> {
    let k = ctx.config.k();
    let quad = F2Quadrature::panels(ctx.config.sampling.f2_panels);
    let pol = ctx.config.incident.polarization.into();
    let mut m1 = 0.0f64;
    let mut m2 = 0.0f64;
    for pair in direction_pairs(ctx.config.sampling.pairs) {
        let w = IncidentWave::linear(k, pair.theta0, pair.phi0, pol)?;
        let d = pair.detector();
        m1 = m1.max(norm3(&first_born_amplitude(&ctx.medium, &w, &d)?));
        m2 = m2.max(norm3(&second_born_amplitude(&ctx.medium, &w, &d, &quad)?));
    }
    let metric = rel(m2, m1);
    let tol = ctx.config.tolerances.exactness;
    Ok(SuiteResult {
        pass: metric <= tol,
        metric,
        tolerance: tol,
        gating: ctx.expect_compliant,
        details: json!({ "k": k, "max_f1": m1, "max_f2": m2, "panels": ctx.config.sampling.f2_panels }),
    })
}

fn run_suite(ctx: &Context, s: Suite) -> Result<SuiteResult> {
    match s {
        Suite::Projector => suite_projector(ctx),
        Suite::Lemma => suite_lemma(ctx),
        Suite::Support => suite_support(ctx),
        Suite::Invisibility => suite_invisibility(ctx),
        Suite::Identity => suite_identity(ctx),
        Suite::Route => suite_route(ctx),
        Suite::Exactness => suite_exactness(ctx),
    }
}

/// Runs the selected suites and writes report.json; true iff every gating suite passed.
pub fn cmd_verify(ctx: &Context, out: &OutputDir) -> Result<bool> {
    let mut report = BTreeMap::new();
    let mut suites = ctx.config.suites.clone();
    suites.sort();
    suites.dedup();
    for s in suites {
        let r = run_suite(ctx, s)?;
        println!(
            "{:<13} {} metric={} tolerance={}{}",
            s.name(),
            if r.pass { "pass" } else { "FAIL" },
            format_number(r.metric),
            format_number(r.tolerance),
            if r.gating { "" } else { " (informational)" }
        );
        report.insert(s.name().to_string(), r);
    }
    let ok = report.values().all(|r| !r.gating || r.pass);
    out.write_json("report.json", &json!({ "pass": ok, "suites": report }))?;
    Ok(ok)
}

fn tolerance_context(ctx: &Context) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert(
        "tolerances".into(),
        serde_json::to_value(&ctx.config.tolerances).expect("serializable"),
    );
    m.insert("f2_panels".into(), json!(ctx.config.sampling.f2_panels));
    m.insert("length_unit".into(), json!(ctx.length_unit()));
    m
}

fn sphere_directions(n: usize) -> Vec<DetectorDirection> {
    fibonacci_sphere(n).iter().map(DetectorDirection::from_unit).collect()
}

/// F over a Fibonacci sphere of detectors; amplitudes.csv and amplitudes.json.
pub fn cmd_born(ctx: &Context, out: &OutputDir) -> Result<bool> {
    let w = ctx.config.incident_wave()?;
    let dirs = sphere_directions(ctx.config.sampling.directions);
    let quad = F2Quadrature::panels(ctx.config.sampling.f2_panels);
    let map = AmplitudeMap::compute(&ctx.medium, &w, &dirs, ctx.order, &quad)?;
    map.write_csv_scaled(out.create("amplitudes.csv")?, ctx.length_unit())?;
    let mut side = map.sidecar();
    side.tolerances = tolerance_context(ctx);
    out.write_json("amplitudes.json", &side)?;
    print!("max|F|={}", format_number(map.max_norm() * ctx.length_unit()));
    match map.second_order_ratio() {
        Some(r) => println!(" max|F2|/max|F1|={}", format_number(r)),
        None => println!(),
    }
    Ok(true)
}

/// eta_eps along x through the box center; profile.csv and profile.json.
pub fn cmd_profile(ctx: &Context, out: &OutputDir) -> Result<bool> {
    let a = ctx.config.medium.a.unwrap_or(2.0);
    let n = ctx.config.sampling.profile_samples;
    let (za, zb) = ctx.medium.slab();
    let z = 0.5 * (za + zb);
    let mut csv = String::from("x,ReEta,ImEta\n");
    for i in 0..n {
        let x = -10.0 * a + 20.0 * a * i as f64 / (n - 1) as f64;
        let (e, _) = ctx.medium.eval_eta(&Vec3::new(x, 0.0, z));
        let v = e[(0, 0)];
        csv.push_str(&format!(
            "{},{},{}\n",
            format_number(x * ctx.length_unit()),
            format_number(v.re),
            format_number(v.im)
        ));
    }
    out.write_text("profile.csv", &csv)?;
    let opts = SupportOptions::for_profile(&ctx.medium);
    let r = support_report(&ctx.medium, ctx.alpha(), &opts)?;
    let at = |x: f64| ctx.medium.eval_eta(&Vec3::new(x, 0.0, z)).0[(0, 0)].norm();
    out.write_json(
        "profile.json",
        &json!({
            "support": r,
            "eta_at_center": at(0.0),
            "eta_at_ten_a": at(10.0 * a).max(at(-10.0 * a)),
            "length_unit": ctx.length_unit(),
        }),
    )?;
    println!(
        "support max_leak={} compliant={}",
        format_number(r.max_leak),
        r.compliant
    );
    Ok(!ctx.expect_compliant || r.compliant)
}

/// Far field from the transfer route; transfer.csv and transfer.json.
pub fn cmd_transfer(ctx: &Context, out: &OutputDir) -> Result<bool> {
    let k = ctx.config.k();
    let grid = &ctx.config.grid;
    let g = MomentumGrid::disk_grid(k, grid.n_disk, grid.eps_ann)?;
    let kern = TransferKernel::lazy(&ctx.medium, &g)?;
    let w = ctx.config.incident_wave()?;
    let sol = solve_t(&kern, &w, SolvePath::Fast)?;
    let rim = g.rim() / k;
    let dirs: Vec<DetectorDirection> = sphere_directions(ctx.config.sampling.directions)
        .into_iter()
        .filter(|d| d.theta.sin() < rim)
        .collect();
    let map = sol.amplitude_map(&dirs)?;
    map.write_csv_scaled(out.create("transfer.csv")?, ctx.length_unit())?;
    let mut worst = 0.0f64;
    let mut peak = 0.0f64;
    for e in &map.entries {
        let b = first_born_amplitude(&ctx.medium, &w, &e.direction)?;
        worst = worst.max(norm3(&(e.f - b)));
        peak = peak.max(norm3(&b));
    }
    let gap = rel(worst, peak);
    let mut side = map.sidecar();
    side.tolerances = tolerance_context(ctx);
    side.tolerances.insert("route_gap".into(), json!(gap));
    side.tolerances.insert("n_disk".into(), json!(grid.n_disk));
    if ctx.order == BornOrder::Second {
        let full = MomentumGrid::build(
            k,
            grid.p_max_over_k * k,
            grid.n_disk_dense,
            2 * grid.n_disk_dense,
            grid.eps_ann,
        )?;
        let probes: Vec<_> = full.disk().iter().step_by(4).cloned().collect();
        let d = dyson_second_order_norm(&ctx.medium, &full, &probes)?;
        side.tolerances.insert("dyson".into(), serde_json::to_value(&d)?);
        println!(
            "dyson norm={} kernel_max={}",
            format_number(d.norm),
            format_number(d.kernel_max)
        );
    }
    out.write_json("transfer.json", &side)?;
    println!("directions={} route_gap={}", dirs.len(), format_number(gap));
    Ok(gap < ctx.config.tolerances.route)
}

/// Invisibility over the configured k/alpha list; sweep.csv.
pub fn cmd_sweep(ctx: &Context, out: &OutputDir) -> Result<bool> {
    let pairs = direction_pairs(ctx.config.sampling.pairs);
    let mut f = out.create("sweep.csv")?;
    writeln!(f, "k_over_alpha,max_f1,bound,invisible")?;
    let mut ok = true;
    for &ka in &ctx.config.sampling.sweep_k_over_alpha {
        let k = ka * ctx.alpha();
        let r = invisibility_report(&ctx.medium, k, &pairs, None)?;
        let bound = ctx.config.tolerances.invisibility * ctx.medium.peak_fourier_3d() * k * k / (4.0 * PI);
        let invisible = r.max_f1 <= bound;
        if ka <= 0.5 && ctx.expect_compliant && !invisible {
            ok = false;
        }
        writeln!(
            f,
            "{},{},{},{}",
            format_number(ka),
            format_number(r.max_f1 * ctx.length_unit()),
            format_number(bound * ctx.length_unit()),
            invisible
        )?;
    }
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use exactborn::medium::MediumSpec;

    fn ctx(spec: MediumSpec) -> Context {
        let config = RunConfig::new(spec);
        let medium = config.build_medium(None).unwrap();
        Context {
            config,
            medium,
            expect_compliant: true,
            order: BornOrder::First,
            alpha_out: 1.0,
        }
    }

    #[test]
    fn vacuum_suites_have_zero_metrics() {
        let mut c = ctx(MediumSpec::from_json(r#"{"type": "vacuum"}"#).unwrap());
        c.config.sampling.projector_samples = 200;
        for s in [Suite::Invisibility, Suite::Identity, Suite::Route, Suite::Exactness] {
            let r = run_suite(&c, s).unwrap();
            assert!(r.pass, "{s:?}");
            assert_eq!(r.metric, 0.0, "{s:?}");
        }
        assert!(run_suite(&c, Suite::Projector).unwrap().pass);
    }

    #[test]
    fn lemma_suite_passes_with_contrast() {
        let c = ctx(MediumSpec::reference());
        let r = run_suite(&c, Suite::Lemma).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.details["chain_contrast_beta_half_alpha"].as_f64().unwrap() > 1e-2);
    }

    #[test]
    fn route_directions_cover_both_sides() {
        let d = route_directions();
        assert_eq!(d.len(), 16);
        assert_eq!(d.iter().filter(|d| d.theta < PI / 2.0).count(), 8);
    }
}
