//! Numerical certificates: one-sided Fourier support and the bounds on the 33 entries.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{Kind, MediumProfile};
use crate::error::{Error, Result};
use crate::linalg::{rot_z, Vec3, C64, I};
use crate::spectral::{CayleyLine, CayleyPlan};

/// How the x-transform is taken in a support scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum SupportMethod {
    /// Whole-line rational expansion of the samples, demodulated by alpha.
    Spectral { nodes: usize, scale: f64 },
    /// Rectangle rule over [-half_window, half_window).
    WindowedDft { half_window: f64, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportOptions {
    pub method: SupportMethod,
    /// y samples (FFT length).
    pub ny: usize,
    /// z samples across the slab.
    pub nz: usize,
    /// p_x samples, centered on alpha.
    pub n_px: usize,
    /// Half-width of the scanned p_x range.
    pub px_span: f64,
    /// Leak below which the verdict is compliant.
    pub tolerance: f64,
    /// Largest admissible |eta| at the window edge relative to the peak.
    pub window_tolerance: f64,
}

impl SupportOptions {
    /// Defaults adapted to the profile's length scales.
    pub fn for_profile(profile: &MediumProfile) -> Self {
        let (method, span) = match profile.kind() {
            Kind::Separable(s) => {
                let a = s.shape().length();
                (SupportMethod::Spectral { nodes: 256, scale: a }, 8.0 / a)
            }
            Kind::Sampled(g) => {
                let hx = g.spacing[0];
                let last = g.origin[0] + (g.dims[0] - 1) as f64 * hx;
                let half = g.origin[0].abs().max(last.abs()) + hx;
                (
                    SupportMethod::WindowedDft {
                        half_window: half,
                        n: 2 * g.dims[0],
                    },
                    (PI / hx).min(8.0),
                )
            }
            Kind::Vacuum => (SupportMethod::Spectral { nodes: 64, scale: 1.0 }, 4.0),
        };
        Self {
            method,
            ny: 512,
            nz: 64,
            n_px: 129,
            px_span: span,
            tolerance: 1e-8,
            window_tolerance: 1e-3,
        }
    }

    pub fn with_method(mut self, method: SupportMethod) -> Self {
        self.method = method;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    /// max |eta~| over p_x <= alpha - delta, relative to the global max.
    pub max_leak: f64,
    pub global_max: f64,
    /// p_x grid spacing, used as the margin below alpha.
    pub delta: f64,
    pub alpha: f64,
    pub window: SupportMethod,
    pub compliant: bool,
}

/// Scans |eta~(p_x, p_y, z)| below alpha along the profile's support direction.
pub fn support_report(profile: &MediumProfile, alpha: f64, opts: &SupportOptions) -> Result<SupportReport> {
    if opts.n_px < 3 || opts.ny < 2 || opts.nz < 1 {
        return Err(Error::InvalidResolution("support scan grid is too small".into()));
    }
    let (xs, xrow) = x_transform(opts)?;
    let delta = 2.0 * opts.px_span / (opts.n_px - 1) as f64;
    let pxs: Vec<f64> = (0..opts.n_px)
        .map(|i| alpha - opts.px_span + i as f64 * delta)
        .collect();
    let n_leak = pxs.iter().filter(|&&p| p <= alpha - delta * (1.0 - 1e-9)).count();

    let (ylo, yhi) = y_window(profile);
    let dy = (yhi - ylo) / opts.ny as f64;
    let (za, zb) = profile.slab();
    let hz = (zb - za) / opts.nz as f64;
    let rot = rot_z(profile.angle());

    if let SupportMethod::WindowedDft { half_window, .. } = opts.method {
        check_window(profile, half_window, opts.window_tolerance, &rot)?;
    }

    let fft = FftPlanner::new().plan_fft_forward(opts.ny);
    let per_z: Vec<(f64, f64)> = (0..opts.nz)
        .into_par_iter()
        .map(|iz| {
            let z = za + (iz as f64 + 0.5) * hz;
            // samples[c][ix][iy], with the y-FFT applied
            let mut comps: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); xs.len() * opts.ny]; 18];
            for (ix, &x) in xs.iter().enumerate() {
                let demod = (-I * alpha * x).exp();
                for iy in 0..opts.ny {
                    let y = ylo + (iy as f64 + 0.5) * dy;
                    let r = rot * Vec3::new(x, y, z);
                    let (e, m) = profile.eval_eta(&r);
                    for c in 0..9 {
                        comps[c][ix * opts.ny + iy] = e[(c / 3, c % 3)] * demod;
                        comps[9 + c][ix * opts.ny + iy] = m[(c / 3, c % 3)] * demod;
                    }
                }
            }
            let mut active: Vec<usize> = Vec::new();
            for c in 0..18 {
                if comps[c].iter().all(|v| *v == C64::new(0.0, 0.0)) {
                    continue;
                }
                if active.iter().any(|&d| comps[d] == comps[c]) {
                    continue;
                }
                active.push(c);
            }
            let (mut leak, mut peak) = (0.0f64, 0.0f64);
            for &c in &active {
                let data = &mut comps[c];
                for row in data.chunks_mut(opts.ny) {
                    fft.process(row);
                }
                let spec = complex_product(&xrow, data, xs.len(), opts.ny);
                for (ip, row) in spec.chunks(opts.ny).enumerate() {
                    let m = row.iter().map(|v| v.norm()).fold(0.0, f64::max);
                    peak = peak.max(m);
                    if ip < n_leak {
                        leak = leak.max(m);
                    }
                }
            }
            (leak, peak)
        })
        .collect();
    let leak = per_z.iter().map(|p| p.0).fold(0.0, f64::max);
    // y-FFT magnitudes carry a common factor dy, which cancels in the ratio
    let peak = per_z.iter().map(|p| p.1).fold(0.0, f64::max);
    let max_leak = if peak > 0.0 { leak / peak } else { 0.0 };
    Ok(SupportReport {
        max_leak,
        global_max: peak * dy,
        delta,
        alpha,
        window: opts.method,
        compliant: max_leak < opts.tolerance,
    })
}

fn y_window(profile: &MediumProfile) -> (f64, f64) {
    match profile.kind() {
        Kind::Separable(s) => (-s.footprint.ly, s.footprint.ly),
        Kind::Sampled(g) => {
            let lo = g.origin[1] - g.spacing[1];
            let hi = g.origin[1] + g.dims[1] as f64 * g.spacing[1];
            (lo, hi)
        }
        Kind::Vacuum => (-1.0, 1.0),
    }
}

/// x nodes and the (n_px x nodes) matrix applied to demodulated samples.
fn x_transform(opts: &SupportOptions) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let delta = 2.0 * opts.px_span / (opts.n_px - 1) as f64;
    match opts.method {
        SupportMethod::Spectral { nodes, scale } => {
            if nodes < 4 || nodes % 2 != 0 || !(scale > 0.0) {
                return Err(Error::InvalidResolution(format!(
                    "spectral scan needs an even node count >= 4 and a positive scale, got {nodes}, {scale}"
                )));
            }
            let plan = CayleyPlan::new(scale, nodes);
            let mut m = DMatrix::zeros(opts.n_px, nodes);
            for i in 0..opts.n_px {
                let kappa = -opts.px_span + i as f64 * delta;
                let row = CayleyLine::transform_row(&plan, kappa);
                for (j, v) in row.into_iter().enumerate() {
                    m[(i, j)] = v;
                }
            }
            Ok((plan.nodes().to_vec(), m))
        }
        SupportMethod::WindowedDft { half_window, n } => {
            if n < 4 || !(half_window > 0.0) {
                return Err(Error::InvalidResolution(
                    "windowed scan needs n >= 4 and a positive window".into(),
                ));
            }
            let dx = 2.0 * half_window / n as f64;
            let xs: Vec<f64> = (0..n).map(|j| -half_window + (j as f64 + 0.5) * dx).collect();
            let mut m = DMatrix::zeros(opts.n_px, n);
            for i in 0..opts.n_px {
                let kappa = -opts.px_span + i as f64 * delta;
                for (j, &x) in xs.iter().enumerate() {
                    m[(i, j)] = (-I * kappa * x).exp() * dx;
                }
            }
            Ok((xs, m))
        }
    }
}

fn check_window(profile: &MediumProfile, half: f64, tol: f64, rot: &nalgebra::Matrix3<f64>) -> Result<()> {
    let norm = |r: Vec3| {
        let (e, m) = profile.eval_eta(&(rot * r));
        e.iter().chain(m.iter()).map(|v| v.norm()).fold(0.0, f64::max)
    };
    let z = 0.5 * (profile.slab().0 + profile.slab().1);
    let peak = (-200..=200)
        .map(|i| norm(Vec3::new(half * i as f64 / 200.0, 0.0, z)))
        .fold(0.0, f64::max);
    let edge = norm(Vec3::new(half, 0.0, z)).max(norm(Vec3::new(-half, 0.0, z)));
    if peak > 0.0 && edge > tol * peak {
        return Err(Error::WindowTooSmall {
            boundary: edge / peak,
            tolerance: tol,
        });
    }
    Ok(())
}

/// a (m x k) times b (k x n, row-major) via four real products.
fn complex_product(a: &DMatrix<C64>, b: &[C64], k: usize, n: usize) -> Vec<C64> {
    let ar = a.map(|v| v.re);
    let ai = a.map(|v| v.im);
    let br = DMatrix::from_row_iterator(k, n, b.iter().map(|v| v.re));
    let bi = DMatrix::from_row_iterator(k, n, b.iter().map(|v| v.im));
    let rr = &ar * &br - &ai * &bi;
    let ii = &ar * &bi + &ai * &br;
    let m = a.nrows();
    let mut out = Vec::with_capacity(m * n);
    for i in 0..m {
        for j in 0..n {
            out.push(C64::new(rr[(i, j)], ii[(i, j)]));
        }
    }
    out
}

/// Empirical extremes of the 33 entries of eps and mu over random points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub eps_min_re: f64,
    pub eps_max_abs: f64,
    pub mu_min_re: f64,
    pub mu_max_abs: f64,
    pub pass: bool,
}

impl BoundsReport {
    pub fn min_re(&self) -> f64 {
        self.eps_min_re.min(self.mu_min_re)
    }

    pub fn max_abs(&self) -> f64 {
        self.eps_max_abs.max(self.mu_max_abs)
    }
}

/// Monte-Carlo over a box that covers the slab and the bulk of the profile.
pub fn bounds_check(profile: &MediumProfile, samples: usize, seed: u64) -> BoundsReport {
    let (lx, ly) = match profile.kind() {
        Kind::Separable(s) => (10.0 * s.shape().length(), s.footprint.ly),
        Kind::Sampled(g) => {
            let ext = |d: usize| {
                g.origin[d]
                    .abs()
                    .max((g.origin[d] + (g.dims[d] - 1) as f64 * g.spacing[d]).abs())
            };
            (ext(0), ext(1))
        }
        Kind::Vacuum => (1.0, 1.0),
    };
    let (za, zb) = profile.slab();
    let rot = rot_z(profile.angle());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = BoundsReport {
        eps_min_re: f64::INFINITY,
        eps_max_abs: 0.0,
        mu_min_re: f64::INFINITY,
        mu_max_abs: 0.0,
        pass: false,
    };
    let mut visit = |r: Vec3| {
        let (e, m) = profile.eval_eta(&(rot * r));
        let e33 = C64::new(1.0, 0.0) + e[(2, 2)];
        let m33 = C64::new(1.0, 0.0) + m[(2, 2)];
        rep.eps_min_re = rep.eps_min_re.min(e33.re);
        rep.eps_max_abs = rep.eps_max_abs.max(e33.norm());
        rep.mu_min_re = rep.mu_min_re.min(m33.re);
        rep.mu_max_abs = rep.mu_max_abs.max(m33.norm());
    };
    visit(Vec3::new(0.0, 0.0, 0.5 * (za + zb)));
    for _ in 0..samples {
        let r = Vec3::new(
            rng.random_range(-lx..=lx),
            rng.random_range(-ly..=ly),
            rng.random_range(za..=zb),
        );
        visit(r);
    }
    rep.pass = rep.min_re() > 0.0;
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::medium::{TransverseBox, XShape};

    fn quick(p: &MediumProfile) -> SupportOptions {
        let mut o = SupportOptions::for_profile(p);
        o.ny = 64;
        o.nz = 4;
        o
    }

    #[test]
    fn gausserf_is_compliant() {
        let p = MediumProfile::reference_gausserf();
        let r = support_report(&p, 1.0, &quick(&p)).unwrap();
        assert!(r.max_leak < 1e-8, "{r:?}");
        assert!(r.compliant);
    }

    #[test]
    fn plain_gaussian_is_not() {
        let p = MediumProfile::gaussian_control(&MediumProfile::reference_gausserf()).unwrap();
        let r = support_report(&p, 1.0, &quick(&p)).unwrap();
        assert!(r.max_leak > 0.1, "{r:?}");
        assert!(!r.compliant);
    }

    #[test]
    fn rational_windowed_leak_is_bounded() {
        let p = MediumProfile::reference_rational();
        let mut o = quick(&p).with_method(SupportMethod::WindowedDft {
            half_window: 400.0,
            n: 8000,
        });
        o.n_px = 33;
        let r = support_report(&p, 1.0, &o).unwrap();
        assert!(r.max_leak < 1e-3, "{r:?}");
        let spectral = support_report(&p, 1.0, &quick(&p)).unwrap();
        assert!(spectral.max_leak < 1e-8, "{spectral:?}");
    }

    #[test]
    fn short_window_is_rejected() {
        let p = MediumProfile::reference_rational();
        let o = quick(&p).with_method(SupportMethod::WindowedDft {
            half_window: 10.0,
            n: 400,
        });
        assert!(matches!(support_report(&p, 1.0, &o), Err(Error::WindowTooSmall { .. })));
    }

    #[test]
    fn rotated_profile_scans_along_its_own_axis() {
        let p = MediumProfile::reference_gausserf()
            .rotate_to_x(&crate::linalg::Vec2::new(0.0, -1.0))
            .unwrap();
        let r = support_report(&p, 1.0, &quick(&p)).unwrap();
        assert!(r.max_leak < 1e-8, "{r:?}");
    }

    #[test]
    fn bounds_of_reference_profile() {
        let b = bounds_check(&MediumProfile::reference_rational(), 2000, 7);
        assert!(b.eps_min_re >= 0.99 && b.eps_max_abs <= 1.01, "{b:?}");
        assert!(b.pass);
        let v = bounds_check(&MediumProfile::vacuum(), 100, 7);
        assert_eq!(
            (v.eps_min_re, v.eps_max_abs, v.mu_min_re, v.mu_max_abs),
            (1.0, 1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn gausserf_bound_below_limit() {
        let b0 = 0.5;
        let fp = TransverseBox::new(c(b0, 0.0), 3.0, 4.0).unwrap();
        let p = MediumProfile::separable(XShape::GaussErf { a: 2.0 }, 1.0, fp).unwrap();
        let r = bounds_check(&p, 4000, 1);
        assert!(r.pass);
        assert!(r.eps_min_re >= 1.0 - b0 * PI.sqrt() - 1e-12);
    }
}
