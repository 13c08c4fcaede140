use serde::{Deserialize, Serialize};

use super::free::{projector_with, Mode};
use super::momentum::varpi_unchecked;
use crate::error::{Error, Result};
use crate::linalg::{complexify3, max_abs, CVec3, CVec4, Vec2, Vec3};

const TOL: f64 = 1e-12;

/// Linear polarization relative to the plane of incidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    /// Electric field normal to the plane of incidence.
    Te,
    /// Electric field in the plane of incidence.
    Tm,
}

/// A time-harmonic plane wave incident on the medium.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidentWave {
    k: f64,
    theta0: f64,
    phi0: f64,
    e_i: CVec3,
}

impl IncidentWave {
    /// Builds an incident wave with an arbitrary (possibly elliptic) polarization.
    ///
    /// `e_i` must be transverse to the wave vector and satisfy `e_i . conj(e_i) = 1`.
    pub fn new(k: f64, theta0: f64, phi0: f64, e_i: CVec3) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidParameter(format!("wavenumber must be positive, got {k}")));
        }
        let cos0 = theta0.cos();
        if cos0.abs() < TOL {
            return Err(Error::GrazingIncidence { cos_theta0: cos0 });
        }
        let norm2: f64 = e_i.iter().map(|z| z.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidPolarization(format!("|e_i|^2 = {norm2}, expected 1")));
        }
        let khat = direction(theta0, phi0);
        let along = complexify3(&khat).dot(&e_i);
        if along.norm() > 1e-10 {
            return Err(Error::InvalidPolarization(format!(
                "polarization has a component {along} along the wave vector"
            )));
        }
        Ok(Self { k, theta0, phi0, e_i })
    }

    /// TE or TM polarized wave.
    pub fn linear(k: f64, theta0: f64, phi0: f64, pol: Polarization) -> Result<Self> {
        let (st, ct) = theta0.sin_cos();
        let (sp, cp) = phi0.sin_cos();
        let e = match pol {
            Polarization::Te => Vec3::new(-sp, cp, 0.0),
            Polarization::Tm => Vec3::new(ct * cp, ct * sp, -st),
        };
        Self::new(k, theta0, phi0, complexify3(&e))
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    pub fn polarization(&self) -> &CVec3 {
        &self.e_i
    }

    /// Wave vector k_i.
    pub fn wave_vector(&self) -> Vec3 {
        direction(self.theta0, self.phi0) * self.k
    }

    /// Transverse part of the wave vector.
    pub fn transverse(&self) -> Vec2 {
        let kv = self.wave_vector();
        Vec2::new(kv.x, kv.y)
    }

    /// h_i = (1/k) k_i x e_i.
    pub fn magnetic(&self) -> CVec3 {
        complexify3(&direction(self.theta0, self.phi0)).cross(&self.e_i)
    }

    /// `true` when the source sits at z = -inf.
    pub fn is_left_incident(&self) -> bool {
        self.theta0.cos() > 0.0
    }

    /// Projector branch that leaves the incident state invariant.
    pub fn mode(&self) -> Mode {
        if self.is_left_incident() {
            Mode::Plus
        } else {
            Mode::Minus
        }
    }

    /// Same wave with a rescaled polarization (used for linearity checks).
    pub fn with_polarization(&self, e_i: CVec3) -> Result<Self> {
        Self::new(self.k, self.theta0, self.phi0, e_i)
    }
}

/// Unit vector with spherical angles (theta, phi).
pub fn direction(theta: f64, phi: f64) -> Vec3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vec3::new(st * cp, st * sp, ct)
}

/// The four-component incident state (e_x, e_y, h_x, h_y).
pub fn incident_state(w: &IncidentWave) -> CVec4 {
    let h = w.magnetic();
    CVec4::new(w.e_i.x, w.e_i.y, h.x, h.y)
}

/// Residual of Pi_j(k_i) Upsilon_i = Upsilon_i for the branch selected by the incidence side.
pub fn incident_state_residual(w: &IncidentWave) -> f64 {
    let p = w.transverse();
    let ups = incident_state(w);
    let vp = varpi_unchecked(&p, w.k);
    let own = projector_with(w.mode(), &p, w.k, vp);
    let other_mode = match w.mode() {
        Mode::Plus => Mode::Minus,
        Mode::Minus => Mode::Plus,
    };
    let other = projector_with(other_mode, &p, w.k, vp);
    max_abs(&(own * ups - ups)).max(max_abs(&(other * ups)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{re, C64};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn normal_incidence_from_left() {
        let w = IncidentWave::new(1.0, 0.0, 0.0, complexify3(&Vec3::x())).unwrap();
        let u = incident_state(&w);
        assert_eq!(u, CVec4::new(re(1.0), re(0.0), re(0.0), re(1.0)));
        assert!(incident_state_residual(&w) < 1e-15);
    }

    #[test]
    fn normal_incidence_from_right() {
        let w = IncidentWave::new(1.0, PI, 0.0, complexify3(&Vec3::x())).unwrap();
        let u = incident_state(&w);
        assert!((u - CVec4::new(re(1.0), re(0.0), re(0.0), re(-1.0))).norm() < 1e-15);
        assert_eq!(w.mode(), Mode::Minus);
        assert!(incident_state_residual(&w) < 1e-15);
    }

    #[test]
    fn grazing_and_longitudinal_rejected() {
        let g = IncidentWave::new(1.0, PI / 2.0, 0.0, complexify3(&Vec3::z()));
        assert!(matches!(g, Err(Error::GrazingIncidence { .. })));
        let l = IncidentWave::new(1.0, 0.0, 0.0, complexify3(&Vec3::z()));
        assert!(matches!(l, Err(Error::InvalidPolarization(_))));
        let n = IncidentWave::new(1.0, 0.0, 0.0, complexify3(&(Vec3::x() * 2.0)));
        assert!(matches!(n, Err(Error::InvalidPolarization(_))));
    }

    #[test]
    fn magnetic_vector_unit_for_real_polarization() {
        let w = IncidentWave::linear(0.7, 0.4, 1.1, Polarization::Tm).unwrap();
        let h = w.magnetic();
        let n: f64 = h.iter().map(|z| z.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn incident_state_is_projector_eigenvector(
            theta0 in 0.0..PI, phi0 in 0.0..(2.0 * PI), k in 0.2..2.0f64,
            mix in 0.0..1.0f64, phase in 0.0..(2.0 * PI)
        ) {
            prop_assume!(theta0.cos().abs() > 0.05);
            let te = IncidentWave::linear(k, theta0, phi0, Polarization::Te).unwrap();
            let tm = IncidentWave::linear(k, theta0, phi0, Polarization::Tm).unwrap();
            let a = mix.sqrt();
            let b = (1.0 - mix).sqrt();
            let e = te.polarization() * re(a) + tm.polarization() * (C64::from_polar(b, phase));
            let w = IncidentWave::new(k, theta0, phi0, e).unwrap();
            prop_assert!(incident_state_residual(&w) < 1e-12);
        }
    }
}
