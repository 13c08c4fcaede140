use std::f64::consts::PI;

use super::incident::direction;
use crate::error::{Error, Result, Side};
use crate::linalg::{re, CVec3, CVec4, Vec2, Vec3, C64, I};

/// Direction of a far-field detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorDirection {
    pub theta: f64,
    pub phi: f64,
}

impl DetectorDirection {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    pub fn from_unit(v: &Vec3) -> Self {
        let v = v.normalize();
        Self {
            theta: v.z.clamp(-1.0, 1.0).acos(),
            phi: v.y.atan2(v.x),
        }
    }

    pub fn unit(&self) -> Vec3 {
        direction(self.theta, self.phi)
    }

    /// Right for cos(theta) > 0 (detector at z = +inf), Left otherwise.
    pub fn side(&self) -> Side {
        if self.theta.cos() > 0.0 {
            Side::Right
        } else {
            Side::Left
        }
    }

    /// k_s = k r_hat.
    pub fn scattered_vector(&self, k: f64) -> Vec3 {
        self.unit() * k
    }

    /// Transverse part of k_s.
    pub fn transverse(&self, k: f64) -> Vec2 {
        let v = self.scattered_vector(k);
        Vec2::new(v.x, v.y)
    }
}

/// Far-field contraction F = -(i k |cos theta| / 2 pi) Xi^T T.
///
/// `side` names the half-space the amplitude `t` was computed for; it must match
/// the detector.
pub fn xi_contract(d: &DetectorDirection, k: f64, side: Side, t: &CVec4) -> Result<CVec3> {
    if side != d.side() {
        return Err(Error::SideMismatch {
            expected: d.side(),
            found: side,
        });
    }
    let (st, ct) = d.theta.sin_cos();
    let (sp, cp) = d.phi.sin_cos();
    let xi_t = CVec3::new(t[0], t[1], t[2] * st * sp - t[3] * st * cp);
    let pref: C64 = -I * re(k * ct.abs() / (2.0 * PI));
    Ok(xi_t * pref)
}
