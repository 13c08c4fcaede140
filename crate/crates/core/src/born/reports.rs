//! Invisibility and scaling checks built on the Born amplitudes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::amplitude::{first_born_amplitude, second_born_amplitude, F2Quadrature};
use super::directions::DirectionPair;
use crate::em::{DetectorDirection, IncidentWave, Polarization};
use crate::error::{Error, Result};
use crate::linalg::{norm3, re};
use crate::medium::{bounds_check, MediumProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvisibilityReport {
    pub k: f64,
    pub evaluations: usize,
    pub max_f1: f64,
    pub max_f2: Option<f64>,
    /// 1e-8 peak|eta~| k^2 / 4 pi.
    pub bound: f64,
    pub invisible: bool,
}

/// Zero threshold for |F| relative to the natural amplitude scale peak|eta~| k^2/4pi.
pub const INVISIBILITY_REL: f64 = 1e-8;

/// max |F1| (and |F2| when a rule is given) over pairs and both linear polarizations.
pub fn invisibility_report(
    medium: &MediumProfile,
    k: f64,
    pairs: &[DirectionPair],
    f2: Option<&F2Quadrature>,
) -> Result<InvisibilityReport> {
    let bound = INVISIBILITY_REL * medium.peak_fourier_3d() * k * k / (4.0 * PI);
    let mut max_f1 = 0.0f64;
    let mut max_f2 = f2.map(|_| 0.0f64);
    let mut n = 0;
    for pair in pairs {
        let d = pair.detector();
        for pol in [Polarization::Te, Polarization::Tm] {
            let w = IncidentWave::linear(k, pair.theta0, pair.phi0, pol)?;
            max_f1 = max_f1.max(norm3(&first_born_amplitude(medium, &w, &d)?));
            if let (Some(q), Some(m2)) = (f2, max_f2.as_mut()) {
                *m2 = m2.max(norm3(&second_born_amplitude(medium, &w, &d, q)?));
            }
            n += 1;
        }
    }
    let invisible = max_f1 <= bound && max_f2.is_none_or(|v| v <= bound);
    Ok(InvisibilityReport {
        k,
        evaluations: n,
        max_f1,
        max_f2,
        bound,
        invisible,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub sigma: f64,
    /// max |F1(sigma eta) - sigma F1(eta)| / max |sigma F1(eta)|.
    pub f1_error: f64,
    /// max |F2(sigma eta) - sigma^2 F2(eta)| / max |sigma^2 F2(eta)|, zero when both vanish.
    pub f2_error: f64,
    pub max_f1: f64,
    pub max_f2: f64,
    pub pass: bool,
}

/// Checks F1 -> sigma F1 and F2 -> sigma^2 F2 under eta -> sigma eta.
pub fn scaling_check(
    medium: &MediumProfile,
    sigma: f64,
    w: &IncidentWave,
    directions: &[DetectorDirection],
    quad: &F2Quadrature,
    f2_tolerance: f64,
) -> Result<ScalingReport> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    let scaled = medium.scaled(sigma);
    for m in [medium, &scaled] {
        let b = bounds_check(m, 2000, 0);
        if !b.pass {
            return Err(Error::BoundsViolated {
                min_re: b.min_re(),
                max_abs: b.max_abs(),
            });
        }
    }
    let (mut e1, mut n1, mut e2, mut n2, mut max_f2) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for d in directions {
        let a = first_born_amplitude(medium, w, d)?;
        let b = first_born_amplitude(&scaled, w, d)?;
        e1 = e1.max(norm3(&(b - a * re(sigma))));
        n1 = n1.max(norm3(&a) * sigma);
        let a2 = second_born_amplitude(medium, w, d, quad)?;
        let b2 = second_born_amplitude(&scaled, w, d, quad)?;
        e2 = e2.max(norm3(&(b2 - a2 * re(sigma * sigma))));
        n2 = n2.max(norm3(&a2) * sigma * sigma);
        max_f2 = max_f2.max(norm3(&a2));
    }
    let rel = |e: f64, n: f64| if n > 0.0 { e / n } else { e };
    let f1_error = rel(e1, n1);
    let f2_error = rel(e2, n2);
    Ok(ScalingReport {
        sigma,
        f1_error,
        f2_error,
        max_f1: n1 / sigma,
        max_f2,
        pass: f1_error <= 1e-12 && f2_error <= f2_tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::born::directions::direction_pairs;

    #[test]
    fn vacuum_is_invisible_everywhere() {
        let m = MediumProfile::vacuum();
        for k in [0.3, 0.9, 2.0] {
            let r = invisibility_report(&m, k, &direction_pairs(8), None).unwrap();
            assert!(r.invisible);
            assert_eq!(r.max_f1, 0.0);
        }
    }

    #[test]
    fn threshold_at_half_alpha() {
        let m = MediumProfile::reference_gausserf();
        let pairs = direction_pairs(64);
        let at = invisibility_report(&m, 0.5, &pairs, None).unwrap();
        assert!(at.invisible, "{at:?}");
        let above = invisibility_report(&m, 0.51, &pairs, None).unwrap();
        assert!(above.max_f1 > 1e3 * above.bound, "{above:?}");
    }

    #[test]
    fn unit_scaling_is_identity() {
        let m = MediumProfile::reference_gausserf();
        let w = IncidentWave::linear(0.8, 1.4, PI, Polarization::Te).unwrap();
        let d = [DetectorDirection::new(1.4, 0.0)];
        let r = scaling_check(&m, 1.0, &w, &d, &F2Quadrature::panels(8), 1e-8).unwrap();
        assert_eq!((r.f1_error, r.f2_error), (0.0, 0.0));
        assert!(r.pass);
    }

    #[test]
    fn oversized_scale_breaks_bounds() {
        let m = MediumProfile::reference_gausserf();
        let w = IncidentWave::linear(0.8, 0.2, 0.0, Polarization::Te).unwrap();
        let d = [DetectorDirection::new(1.0, 0.0)];
        let err = scaling_check(&m, 200.0, &w, &d, &F2Quadrature::panels(8), 1e-8).unwrap_err();
        assert!(matches!(err, Error::BoundsViolated { .. }));
    }
}
