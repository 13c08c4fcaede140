//! Direction sets for amplitude maps and reports.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::em::DetectorDirection;
use crate::error::Side;
use crate::linalg::Vec3;

/// Smallest |cos theta| kept for incidence directions.
const GRAZING: f64 = 0.05;

/// n nearly uniform points on the unit sphere.
pub fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// n detector directions on one hemisphere (Right: cos theta > 0).
pub fn fibonacci_hemisphere(n: usize, side: Side) -> Vec<DetectorDirection> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (i as f64 + 0.5) / n as f64;
            let z = if side == Side::Right { z } else { -z };
            let theta = z.acos();
            let phi = (golden * i as f64).rem_euclid(2.0 * PI);
            DetectorDirection::new(theta, phi)
        })
        .collect()
}

/// An incidence direction and a detector direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionPair {
    pub theta0: f64,
    pub phi0: f64,
    pub theta: f64,
    pub phi: f64,
}

impl DirectionPair {
    pub fn detector(&self) -> DetectorDirection {
        DetectorDirection::new(self.theta, self.phi)
    }
}

/// n pairs: the two extremal near-grazing pairs (largest q_x on each side)
/// followed by Fibonacci-spread pairs.
pub fn direction_pairs(n: usize) -> Vec<DirectionPair> {
    let g = 85f64.to_radians();
    let mut out = vec![
        DirectionPair {
            theta0: g,
            phi0: PI,
            theta: g,
            phi: 0.0,
        },
        DirectionPair {
            theta0: PI - g,
            phi0: PI,
            theta: PI - g,
            phi: 0.0,
        },
    ];
    let m = n.max(3);
    let inc = fibonacci_sphere(m);
    let det = fibonacci_sphere(m);
    let mut i = 0;
    while out.len() < n {
        let a = inc[i % m];
        let b = det[(7 * i + 3) % m];
        i += 1;
        let mut t0 = a.z.clamp(-1.0, 1.0).acos();
        if t0.cos().abs() < GRAZING {
            t0 = if t0 < PI / 2.0 {
                GRAZING.acos()
            } else {
                PI - GRAZING.acos()
            };
        }
        out.push(DirectionPair {
            theta0: t0,
            phi0: a.y.atan2(a.x),
            theta: b.z.clamp(-1.0, 1.0).acos(),
            phi: b.y.atan2(b.x),
        });
    }
    out.truncate(n);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_points_are_unit_and_balanced() {
        let pts = fibonacci_sphere(128);
        assert!(pts.iter().all(|p| (p.norm() - 1.0).abs() < 1e-14));
        let c: Vec3 = pts.iter().sum::<Vec3>() / 128.0;
        assert!(c.norm() < 2e-2);
    }

    #[test]
    fn hemispheres_have_their_side() {
        assert!(fibonacci_hemisphere(64, Side::Right)
            .iter()
            .all(|d| d.side() == Side::Right));
        assert!(fibonacci_hemisphere(64, Side::Left)
            .iter()
            .all(|d| d.side() == Side::Left));
    }

    #[test]
    fn pairs_avoid_grazing_incidence() {
        let p = direction_pairs(64);
        assert_eq!(p.len(), 64);
        assert!(p.iter().all(|d| d.theta0.cos().abs() >= GRAZING - 1e-12));
    }
}
