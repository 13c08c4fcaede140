//! First and second terms of the Born series for the far-field amplitude.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::em::{DetectorDirection, IncidentWave};
use crate::error::{Error, Result};
use crate::linalg::{complexify3, re, CVec3, Vec3, C64, I};
use crate::medium::MediumProfile;
use crate::quad::gauss_legendre;

/// Sign of the magnetic term in F1, fixed against the transfer route.
pub const MAGNETIC_SIGN: f64 = -1.0;

/// (k^2/4pi) [(I - r r) P - r x M] for induced densities P, M at k_s.
fn radiate(k: f64, rhat: &Vec3, p: &CVec3, m: &CVec3) -> CVec3 {
    let r = complexify3(rhat);
    let transverse = p - r * r.dot(p);
    (transverse + r.cross(m) * re(MAGNETIC_SIGN)) * re(k * k / (4.0 * PI))
}

/// F1 = (k^2/4pi)[(I - r r) eta_eps~(q) e_i - r x (eta_mu~(q) h_i)], q = k_s - k_i.
pub fn first_born_amplitude(medium: &MediumProfile, w: &IncidentWave, d: &DetectorDirection) -> Result<CVec3> {
    let k = w.k();
    let rhat = d.unit();
    let q = rhat * k - w.wave_vector();
    let (ee, em) = medium.fourier_eta_3d(&q)?;
    Ok(radiate(k, &rhat, &(ee * w.polarization()), &(em * w.magnetic())))
}

/// How the pole of the free propagator at |p| = k is handled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Regularization {
    /// Principal value by a radial rule symmetric about k, plus the i pi delta term.
    PrincipalValue,
    /// Finite i eps with eps = factor k^2, extrapolated to eps -> 0 from eps and eps/2.
    IEpsilon { factor: f64, tolerance: f64 },
}

/// Spherical product rule for the second-order momentum integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F2Quadrature {
    /// Radial nodes on [0, 2k] (even) and on [2k, outer k].
    pub n_inner: usize,
    pub n_outer: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    /// Radius of the integration ball in units of k.
    pub outer: f64,
    pub regularization: Regularization,
}

impl Default for F2Quadrature {
    fn default() -> Self {
        Self::panels(64)
    }
}

impl F2Quadrature {
    /// n radial, n polar and n azimuthal nodes.
    pub fn panels(n: usize) -> Self {
        let n_inner = (n / 2 + 1) & !1;
        Self {
            n_inner,
            n_outer: n - n / 2,
            n_theta: n,
            n_phi: n,
            outer: 6.0,
            regularization: Regularization::PrincipalValue,
        }
    }

    /// Same rule with every node count doubled.
    pub fn refined(&self) -> Self {
        Self {
            n_inner: 2 * self.n_inner,
            n_outer: 2 * self.n_outer,
            n_theta: 2 * self.n_theta,
            n_phi: 2 * self.n_phi,
            ..*self
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_inner < 2 || self.n_inner % 2 != 0 || self.n_outer < 1 || self.n_theta < 2 || self.n_phi < 2 {
            return Err(Error::InvalidResolution(format!(
                "second-order rule needs an even inner radial count and at least two angular nodes: {self:?}"
            )));
        }
        if !(self.outer > 2.0) {
            return Err(Error::InvalidParameter(format!(
                "outer radius {} must exceed 2k",
                self.outer
            )));
        }
        Ok(())
    }
}

/// Second-order fields at intermediate momentum p:
/// numerator A of the pole term and the regular part B, stacked as (electric, magnetic).
struct Chain<'a> {
    medium: &'a MediumProfile,
    k: f64,
    ki: Vec3,
    ks: Vec3,
    e_i: CVec3,
    h_i: CVec3,
    magnetic: bool,
}

impl Chain<'_> {
    fn terms(&self, p: &Vec3) -> Result<(CVec3, CVec3, CVec3)> {
        let k = self.k;
        let (e1, m1) = self.medium.fourier_eta_3d(&(p - self.ki))?;
        let pol = e1 * self.e_i;
        let mag = m1 * self.h_i;
        if pol.iter().all(|v| *v == C64::new(0.0, 0.0)) && mag.iter().all(|v| *v == C64::new(0.0, 0.0)) {
            return Ok((CVec3::zeros(), CVec3::zeros(), CVec3::zeros()));
        }
        let (e2, m2) = self.medium.fourier_eta_3d(&(self.ks - p))?;
        let pc = complexify3(p);
        let src = pol * re(k * k) - pc.cross(&mag) * re(k);
        // (I - p p / k^2) src
        let n = src - pc * (pc.dot(&src) / (k * k));
        let ae = e2 * n;
        let (am, bm) = if self.magnetic {
            (m2 * pc.cross(&n) * re(1.0 / k), -(m2 * mag))
        } else {
            (CVec3::zeros(), CVec3::zeros())
        };
        Ok((ae, am, bm))
    }
}

fn zero_pair() -> (CVec3, CVec3) {
    (CVec3::zeros(), CVec3::zeros())
}

fn add_pair(a: (CVec3, CVec3), b: (CVec3, CVec3)) -> (CVec3, CVec3) {
    (a.0 + b.0, a.1 + b.1)
}

/// F2 by a spherical product rule over |p| <= outer k.
///
/// The integral is (1/(2 pi)^3) int d^3p [A(p)/(|p|^2 - k^2 - i0) + B(p)] and the
/// amplitude follows from the same radiation formula as F1.
pub fn second_born_amplitude(
    medium: &MediumProfile,
    w: &IncidentWave,
    d: &DetectorDirection,
    quad: &F2Quadrature,
) -> Result<CVec3> {
    quad.validate()?;
    let k = w.k();
    let rhat = d.unit();
    if medium.is_vacuum() {
        return Ok(CVec3::zeros());
    }
    let chain = Chain {
        medium,
        k,
        ki: w.wave_vector(),
        ks: rhat * k,
        e_i: *w.polarization(),
        h_i: w.magnetic(),
        magnetic: medium.is_magnetic(),
    };
    let angles = angular_rule(quad.n_theta, quad.n_phi);
    let (xe, xm) = match quad.regularization {
        Regularization::PrincipalValue => principal_value(&chain, quad, &angles)?,
        Regularization::IEpsilon { factor, tolerance } => {
            let a = finite_epsilon(&chain, quad, &angles, factor * k * k)?;
            let b = finite_epsilon(&chain, quad, &angles, 0.5 * factor * k * k)?;
            let est = (a.0 - b.0).norm().max((a.1 - b.1).norm());
            let scale = b.0.norm().max(b.1.norm());
            if est > tolerance * scale.max(f64::MIN_POSITIVE) && est > 0.0 {
                return Err(Error::QuadratureNotConverged {
                    estimate: est / scale.max(f64::MIN_POSITIVE),
                    tolerance,
                });
            }
            (b.0 * re(2.0) - a.0, b.1 * re(2.0) - a.1)
        }
    };
    let norm = 1.0 / (2.0 * PI).powi(3);
    Ok(radiate(k, &rhat, &(xe * re(norm)), &(xm * re(norm))))
}

/// Unit vectors with solid-angle weights: Gauss-Legendre in cos(theta), trapezoid in phi.
fn angular_rule(n_theta: usize, n_phi: usize) -> Vec<(Vec3, f64)> {
    let ct = gauss_legendre(n_theta, -1.0, 1.0);
    let dphi = 2.0 * PI / n_phi as f64;
    let mut out = Vec::with_capacity(n_theta * n_phi);
    for &(c, wc) in &ct {
        let s = (1.0 - c * c).sqrt();
        for j in 0..n_phi {
            let phi = (j as f64 + 0.5) * dphi;
            out.push((Vec3::new(s * phi.cos(), s * phi.sin(), c), wc * dphi));
        }
    }
    out
}

fn shell(chain: &Chain, rho: f64, angles: &[(Vec3, f64)]) -> Result<((CVec3, CVec3), (CVec3, CVec3))> {
    let mut a = zero_pair();
    let mut b = CVec3::zeros();
    for (n, w) in angles {
        let (ae, am, bm) = chain.terms(&(n * rho))?;
        a.0 += ae * re(*w);
        a.1 += am * re(*w);
        b += bm * re(*w);
    }
    Ok((a, (CVec3::zeros(), b)))
}

fn radial_sum(
    chain: &Chain,
    nodes: &[(f64, f64)],
    angles: &[(Vec3, f64)],
    kernel: impl Fn(f64) -> C64 + Sync,
) -> Result<(CVec3, CVec3)> {
    let parts: Vec<Result<(CVec3, CVec3)>> = nodes
        .par_iter()
        .map(|&(rho, wr)| {
            let (a, b) = shell(chain, rho, angles)?;
            let f = kernel(rho) * (rho * rho * wr);
            Ok((a.0 * f + b.0 * re(rho * rho * wr), a.1 * f + b.1 * re(rho * rho * wr)))
        })
        .collect();
    parts.into_iter().try_fold(zero_pair(), |acc, p| Ok(add_pair(acc, p?)))
}

fn principal_value(chain: &Chain, quad: &F2Quadrature, angles: &[(Vec3, f64)]) -> Result<(CVec3, CVec3)> {
    let k = chain.k;
    // symmetric nodes about k make the odd part of 1/(rho - k) cancel
    let inner = gauss_legendre(quad.n_inner, 0.0, 2.0 * k);
    let outer = gauss_legendre(quad.n_outer, 2.0 * k, quad.outer * k);
    let kernel = |rho: f64| re(1.0 / (rho * rho - k * k));
    let pv = add_pair(
        radial_sum(chain, &inner, angles, kernel)?,
        radial_sum(chain, &outer, angles, kernel)?,
    );
    // i pi delta(rho^2 - k^2) = i pi delta(rho - k)/(2k)
    let (on, _) = shell(chain, k, angles)?;
    let f = I * (PI * 0.5 * k);
    Ok((pv.0 + on.0 * f, pv.1 + on.1 * f))
}

fn finite_epsilon(chain: &Chain, quad: &F2Quadrature, angles: &[(Vec3, f64)], eps: f64) -> Result<(CVec3, CVec3)> {
    let k = chain.k;
    // panels graded toward the pole, width of the last pair comparable to eps/k
    let mut breaks = vec![0.0];
    let mut offs = Vec::new();
    let mut h = 0.5 * k;
    while h > 0.25 * eps / k {
        offs.push(h);
        h *= 0.25;
    }
    for &o in &offs {
        breaks.push(k - o);
    }
    breaks.push(k);
    for &o in offs.iter().rev() {
        breaks.push(k + o);
    }
    breaks.push(2.0 * k);
    breaks.push(quad.outer * k);
    let per = (quad.n_inner / 2).max(8);
    let nodes: Vec<(f64, f64)> = breaks
        .windows(2)
        .flat_map(|b| gauss_legendre(per, b[0], b[1]))
        .collect();
    let kernel = |rho: f64| C64::new(rho * rho - k * k, -eps).inv();
    radial_sum(chain, &nodes, angles, kernel)
}

/// F2 at `quad` and at the refined rule, with the relative difference.
pub fn second_born_self_convergence(
    medium: &MediumProfile,
    w: &IncidentWave,
    d: &DetectorDirection,
    quad: &F2Quadrature,
) -> Result<(CVec3, CVec3, f64)> {
    let a = second_born_amplitude(medium, w, d, quad)?;
    let b = second_born_amplitude(medium, w, d, &quad.refined())?;
    let scale = crate::linalg::norm3(&b);
    let diff = crate::linalg::norm3(&(a - b));
    let rel = if scale > 0.0 { diff / scale } else { diff };
    Ok((a, b, rel))
}
