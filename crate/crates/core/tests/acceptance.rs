//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the verdicts are always printed.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use exactborn::born::{
    direction_pairs, first_born_amplitude, invisibility_report, scaling_check, second_born_self_convergence,
    F2Quadrature,
};
use exactborn::em::{
    free_hamiltonian, projector_pair, varpi_unchecked, DetectorDirection, IncidentWave, Polarization, DEFAULT_EPS_ANN,
};
use exactborn::lemma_lab::{
    chain_operator_residual, convolution_support_check, make_salpha_sample, product_support_check,
    reciprocal_support_check, SampleShape,
};
use exactborn::linalg::{c, max_abs, norm3, CMat4, Vec2, Vec3};
use exactborn::medium::{support_report, FourierRoute, MediumProfile, SupportOptions};
use exactborn::transfer::{
    amplitude_from_t, dyson_second_order_norm, sandwich_identity_residual, solve_t, transfer_first_order, MomentumGrid,
    SolvePath, TransferKernel,
};
use exactborn::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    summary: String,
}

fn verdict(pass: bool, summary: String) -> Result<Verdict> {
    Ok(Verdict { pass, summary })
}

fn compliant() -> MediumProfile {
    MediumProfile::reference_gausserf()
}

fn control() -> MediumProfile {
    MediumProfile::gaussian_control(&compliant()).expect("control")
}

fn profile_fidelity() -> Result<Verdict> {
    let m = MediumProfile::reference_rational();
    let expected = 0.01 / 101.0;
    let mut worst = 0.0f64;
    for x in [-20.0, 20.0] {
        let v = m.eval_eta(&Vec3::new(x, 0.0, 0.0)).0[(0, 0)].norm();
        worst = worst.max((v - expected).abs() / expected);
    }
    verdict(
        worst < 1e-12,
        format!("| |eta|(10a) - 0.01/101 | / (0.01/101) = {worst:.2e} (< 1e-12)"),
    )
}

fn support_condition() -> Result<Verdict> {
    let a = support_report(&compliant(), 1.0, &SupportOptions::for_profile(&compliant()))?;
    let b = support_report(&control(), 1.0, &SupportOptions::for_profile(&control()))?;
    verdict(
        a.max_leak < 1e-8 && b.max_leak > 1e-1,
        format!(
            "compliant leak {:.2e} (< 1e-8), control leak {:.2e} (> 1e-1)",
            a.max_leak, b.max_leak
        ),
    )
}

fn invisibility() -> Result<Verdict> {
    let pairs = direction_pairs(64);
    let at = invisibility_report(&compliant(), 0.5, &pairs, None)?;
    let above = invisibility_report(&compliant(), 0.51, &pairs, None)?;
    let ratio = above.max_f1 / above.bound;
    verdict(
        at.max_f1 < at.bound && ratio >= 1e3,
        format!(
            "k = 0.5: max|F1| = {:.2e} (bound {:.2e}); k = 0.51: max|F1|/bound = {ratio:.2e} (>= 1e3)",
            at.max_f1, at.bound
        ),
    )
}

fn exactness() -> Result<Verdict> {
    let k = 0.8;
    let quad = F2Quadrature::panels(64);
    let pairs = direction_pairs(16);
    let ratio = |m: &MediumProfile| -> Result<(f64, f64)> {
        let (mut m1, mut m2, mut conv) = (0.0f64, 0.0f64, 0.0f64);
        for p in &pairs {
            let w = IncidentWave::linear(k, p.theta0, p.phi0, Polarization::Te)?;
            let d = p.detector();
            m1 = m1.max(norm3(&first_born_amplitude(m, &w, &d)?));
            let (a, _, rel) = second_born_self_convergence(m, &w, &d, &quad)?;
            m2 = m2.max(norm3(&a));
            conv = conv.max(rel);
        }
        Ok((m2 / m1, conv))
    };
    let (rc, conv_c) = ratio(&compliant())?;
    let (rn, conv_n) = ratio(&control())?;
    verdict(
        rc <= 1e-6 && conv_c <= 1e-7 && conv_n <= 1e-7 && rn >= 1e-3,
        format!(
            "compliant max|F2|/max|F1| = {rc:.2e} (<= 1e-6), control {rn:.2e} (>= 1e-3), \
             self-convergence 64 vs 128 panels {conv_c:.1e} / {conv_n:.1e} (<= 1e-7)"
        ),
    )
}

fn route_gap(m: &MediumProfile, n_disk: usize) -> Result<f64> {
    let k = 0.8;
    let g = MomentumGrid::disk_grid(k, n_disk, DEFAULT_EPS_ANN)?;
    let kern = TransferKernel::lazy(m, &g)?;
    let w = IncidentWave::linear(k, 60f64.to_radians(), PI, Polarization::Te)?;
    let sol = solve_t(&kern, &w, SolvePath::Fast)?;
    let mut worst = 0.0f64;
    let mut peak = 0.0f64;
    for th in [20.0f64, 40.0, 60.0, 75.0, 105.0, 120.0, 140.0, 160.0] {
        for ph in [0.0, 0.3] {
            let d = DetectorDirection::new(th.to_radians(), ph);
            let a = amplitude_from_t(&sol, &d)?;
            let b = first_born_amplitude(m, &w, &d)?;
            worst = worst.max(norm3(&(a - b)));
            peak = peak.max(norm3(&b));
        }
    }
    Ok(worst / peak)
}

fn route_equivalence() -> Result<Verdict> {
    let m = compliant();
    let coarse = route_gap(&m, 32)?;
    let fine = route_gap(&m, 64)?;
    verdict(
        fine < 5e-3 && fine < coarse,
        format!("n_disk 64: {fine:.2e} (< 5e-3), n_disk 32: {coarse:.2e}"),
    )
}

fn operator_identities() -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut proj = 0.0f64;
    let mut n = 0;
    while n < 10_000 {
        let k = rng.random_range(0.2..2.0);
        let p = Vec2::new(rng.random_range(-k..k), rng.random_range(-k..k));
        if p.norm() >= k * (1.0 - DEFAULT_EPS_ANN) {
            continue;
        }
        let w = varpi_unchecked(&p, k);
        let [p1, p2] = projector_pair(&p, k, w);
        let h = free_hamiltonian(&p, k);
        for r in [
            max_abs(&(p1 + p2 - CMat4::identity())),
            max_abs(&(p1 * p1 - p1)),
            max_abs(&(p2 * p2 - p2)),
            max_abs(&(p1 * p2)),
            max_abs(&(h * p1 + p1 * w)),
            max_abs(&(h * p2 - p2 * w)),
        ] {
            proj = proj.max(r);
        }
        n += 1;
    }
    let m = compliant().with_route(FourierRoute::Spectral);
    let kern = transfer_first_order(&m, &MomentumGrid::disk_grid(0.8, 12, DEFAULT_EPS_ANN)?)?;
    let kmax = kern.max_norm()?;
    let id = sandwich_identity_residual(&kern)? / (kmax * kmax);
    // M - pi is the Dyson series of K; at k = alpha/2 both its terms are measured
    let half = transfer_first_order(&compliant(), &MomentumGrid::disk_grid(0.5, 12, DEFAULT_EPS_ANN)?)?;
    let full = MomentumGrid::build(0.5, 1.25, 12, 16, DEFAULT_EPS_ANN)?;
    let probes: Vec<_> = full.disk().iter().step_by(4).cloned().collect();
    let d2 = dyson_second_order_norm(&compliant(), &full, &probes)?;
    let m_minus_pi = half.max_norm()?.max(d2.norm);
    verdict(
        proj < 1e-12 && id < 1e-6 && m_minus_pi < 1e-10,
        format!(
            "projector residual {proj:.2e} (< 1e-12, {n} samples), K pi2 K / ||K||^2 = {id:.2e} (< 1e-6), \
             ||M - pi|| at k = 0.5: {m_minus_pi:.2e} (< 1e-10)"
        ),
    )
}

fn dyson_vanishing() -> Result<Verdict> {
    let k = 0.8;
    let grid = MomentumGrid::build(k, 2.0, 16, 24, DEFAULT_EPS_ANN)?;
    let probes: Vec<_> = MomentumGrid::disk_grid(k, 8, DEFAULT_EPS_ANN)?
        .disk()
        .iter()
        .step_by(2)
        .cloned()
        .collect();
    let a = dyson_second_order_norm(&compliant().with_route(FourierRoute::Spectral), &grid, &probes)?;
    let b = dyson_second_order_norm(&control(), &grid, &probes)?;
    let (lo, hi) = control().slab();
    let floor = 1e-2 * b.kernel_max * b.kernel_max * (hi - lo);
    verdict(
        a.norm < 1e-6 * a.kernel_max && b.norm >= floor,
        format!(
            "compliant D2/||K|| = {:.2e} (< 1e-6), control D2 = {:.2e} (>= {floor:.2e})",
            a.norm / a.kernel_max,
            b.norm
        ),
    )
}

fn scaling_law() -> Result<Verdict> {
    let w = IncidentWave::linear(0.8, 0.3, 0.0, Polarization::Tm)?;
    let dirs: Vec<_> = direction_pairs(8).iter().map(|p| p.detector()).collect();
    let quad = F2Quadrature::panels(32);
    let (mut e1, mut e2) = (0.0f64, 0.0f64);
    for sigma in [0.5, 2.0, 5.0] {
        let r = scaling_check(&control(), sigma, &w, &dirs, &quad, 1e-10)?;
        e1 = e1.max(r.f1_error);
        e2 = e2.max(r.f2_error);
        let r = scaling_check(&compliant(), sigma, &w, &dirs, &quad, 1e-10)?;
        e1 = e1.max(r.f1_error);
    }
    verdict(
        e1 <= 1e-12 && e2 <= 1e-10,
        format!("F1 scaling error {e1:.2e} (<= 1e-12), F2 scaling error {e2:.2e} (<= 1e-10)"),
    )
}

fn lemma_suite() -> Result<Verdict> {
    let mut worst = 0.0f64;
    let mut contrast = f64::INFINITY;
    for seed in [1u64, 2, 3] {
        worst = worst.max(chain_operator_residual(1, 2.0, 1.0, 1.0, seed)?.relative);
        worst = worst.max(chain_operator_residual(2, 1.0, 1.0, 1.0, seed)?.relative);
        contrast = contrast.min(chain_operator_residual(1, 0.5, 1.0, 1.0, seed)?.relative);
        let f1 = make_salpha_sample(1.0, 1.5, SampleShape::Gaussian, seed)?;
        let f2 = make_salpha_sample(1.0, 1.2, SampleShape::Exponential, seed + 10)?;
        worst = worst.max(product_support_check(&f1, &f2, 1.0).leak);
        let sup = f1.to_space().iter().map(|v| v.norm()).fold(0.0, f64::max);
        let r = reciprocal_support_check(&f1.scaled(c(0.3 / sup, 0.0)), 1.0, Some(&f2))?;
        if !r.pass {
            worst = worst.max(1.0);
        }
        worst = worst.max(r.reciprocal.leak).max(r.quotient.map_or(0.0, |q| q.leak));
        worst = worst.max(convolution_support_check(1.0, 0.5, seed)?.leak);
        worst = worst.max(f1.project(1.0).max_abs());
    }
    verdict(
        worst < 1e-10 && contrast > 1e-2,
        format!("max residual {worst:.2e} (< 1e-10), contrast chain at beta = alpha/2: {contrast:.2e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Verdict>); 9] = [
        ("1 profile fidelity", profile_fidelity),
        ("2 support condition", support_condition),
        ("3 invisibility", invisibility),
        ("4 exactness", exactness),
        ("5 route equivalence", route_equivalence),
        ("6 operator identities", operator_identities),
        ("7 second-order Dyson term", dyson_vanishing),
        ("8 scaling law", scaling_law),
        ("9 lemma suite", lemma_suite),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let t = Instant::now();
        let (pass, summary) = match run() {
            Ok(v) => (v.pass, v.summary),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "[{}] {name}: {summary} ({:.1} s)",
            if pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
