use crate::error::{Error, Result};
use crate::linalg::{Vec2, C64};

/// Default relative half-width of the excluded annulus around |p| = k.
pub const DEFAULT_EPS_ANN: f64 = 1e-3;

/// Longitudinal wavenumber sqrt(k^2 - |p|^2).
///
/// Inside the disk |p| < k the principal (positive) root is returned. Outside,
/// the root is `+i sqrt(|p|^2 - k^2)` so that evanescent modes decay toward
/// z -> +inf. Momenta within `eps_ann * k` of the circle |p| = k are rejected.
pub fn varpi_guarded(p: &Vec2, k: f64, eps_ann: f64) -> Result<C64> {
    let r = p.norm();
    if (r - k).abs() < eps_ann * k {
        return Err(Error::SingularCircle { p_norm: r, k });
    }
    Ok(varpi_unchecked(p, k))
}

/// [`varpi_guarded`] with the default annulus guard.
pub fn varpi(p: &Vec2, k: f64) -> Result<C64> {
    varpi_guarded(p, k, DEFAULT_EPS_ANN)
}

/// Branch rule without the annulus check. Returns 0 on the circle itself.
pub fn varpi_unchecked(p: &Vec2, k: f64) -> C64 {
    // (k - r)(k + r) keeps the rim cancellation accurate.
    let r = p.norm();
    let d = (k - r) * (k + r);
    if d >= 0.0 {
        C64::new(d.sqrt(), 0.0)
    } else {
        C64::new(0.0, (-d).sqrt())
    }
}

/// A transverse momentum together with its longitudinal wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumPoint {
    pub p: Vec2,
    pub varpi: C64,
    pub in_disk: bool,
}

impl MomentumPoint {
    pub fn new(p: Vec2, k: f64, eps_ann: f64) -> Result<Self> {
        let varpi = varpi_guarded(&p, k, eps_ann)?;
        Ok(Self {
            p,
            varpi,
            in_disk: p.norm() < k,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn center_of_disk() {
        assert_eq!(varpi(&Vec2::new(0.0, 0.0), 1.0).unwrap(), C64::new(1.0, 0.0));
    }

    #[test]
    fn inside_disk() {
        let w = varpi(&Vec2::new(0.5, 0.0), 1.0).unwrap();
        assert!((w.re - 0.8660254037844386).abs() < 1e-15);
        assert_eq!(w.im, 0.0);
    }

    #[test]
    fn evanescent_branch_is_positive_imaginary() {
        let w = varpi(&Vec2::new(2.0, 0.0), 1.0).unwrap();
        assert_eq!(w.re, 0.0);
        assert!((w.im - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rim_is_rejected() {
        let err = varpi(&Vec2::new(0.6, 0.8), 1.0).unwrap_err();
        assert!(matches!(err, Error::SingularCircle { .. }));
        assert!(varpi(&Vec2::new(0.9995, 0.0), 1.0).is_err());
        assert!(varpi(&Vec2::new(0.998, 0.0), 1.0).is_ok());
    }

    #[test]
    fn momentum_point_flags_disk() {
        let a = MomentumPoint::new(Vec2::new(0.3, 0.2), 1.0, 1e-3).unwrap();
        let b = MomentumPoint::new(Vec2::new(1.3, 0.2), 1.0, 1e-3).unwrap();
        assert!(a.in_disk && !b.in_disk);
    }

    proptest! {
        #[test]
        fn dispersion_relation_holds(px in -3.0..3.0f64, py in -3.0..3.0f64, k in 0.2..2.0f64) {
            let p = Vec2::new(px, py);
            prop_assume!((p.norm() - k).abs() > 1e-3 * k);
            let w = varpi(&p, k).unwrap();
            let lhs = w * w + C64::new(p.norm_squared(), 0.0);
            prop_assert!((lhs - C64::new(k * k, 0.0)).norm() <= 1e-14 * (k * k).max(p.norm_squared()));
            prop_assert!(w.re >= 0.0 && w.im >= 0.0);
            if p.norm() < k {
                prop_assert!(w.im == 0.0 && w.re > 0.0 && w.re <= k);
            } else {
                prop_assert!(w.re == 0.0);
            }
        }
    }
}
