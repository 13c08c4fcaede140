//! The eighteen material coefficients that enter the reduced Hamiltonian and
//! their transverse Fourier transforms.
//!
//! Layout: A (0, 1), B (2, 3), C (4), K_H (5..9, row-major), D (9),
//! K_E (10..14), E (14, 15), F (16, 17), with
//! A = (e31, e32)/e33, B = (-m23, m13)/m33, C = 1/e33, D = 1/m33,
//! E = (m31, m32)/m33, F = (-e23, e13)/e33,
//! K_H = [[-m21, -m22], [m11, m12]] - (1/m33)(-m23, m13)^T (m31, m32),
//! and K_E the same expression in eps.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::SVector;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::{CMat3, Vec2, C64, ONE, ZERO};
use crate::medium::{Kind, MediumProfile, SampledGrid, Separable, MAX_POWER};

pub const N_COEFF: usize = 18;
pub type Coeffs = SVector<C64, N_COEFF>;

/// Coefficients of the full tensors eps and mu.
pub fn material_coefficients(eps: &CMat3, mu: &CMat3) -> Coeffs {
    let mut c = Coeffs::zeros();
    let (e33, m33) = (eps[(2, 2)], mu[(2, 2)]);
    c[0] = eps[(2, 0)] / e33;
    c[1] = eps[(2, 1)] / e33;
    c[2] = -mu[(1, 2)] / m33;
    c[3] = mu[(0, 2)] / m33;
    c[4] = ONE / e33;
    let kh = k_block(mu);
    c.fixed_rows_mut::<4>(5).copy_from(&kh);
    c[9] = ONE / m33;
    let ke = k_block(eps);
    c.fixed_rows_mut::<4>(10).copy_from(&ke);
    c[14] = mu[(2, 0)] / m33;
    c[15] = mu[(2, 1)] / m33;
    c[16] = -eps[(1, 2)] / e33;
    c[17] = eps[(0, 2)] / e33;
    c
}

fn k_block(t: &CMat3) -> SVector<C64, 4> {
    let t33 = t[(2, 2)];
    let u = [-t[(1, 2)], t[(0, 2)]];
    let v = [t[(2, 0)], t[(2, 1)]];
    let base = [-t[(1, 0)], -t[(1, 1)], t[(0, 0)], t[(0, 1)]];
    SVector::<C64, 4>::from_fn(|i, _| base[i] - u[i / 2] * v[i % 2] / t33)
}

/// Coefficients of vacuum.
pub fn vacuum_coefficients() -> Coeffs {
    material_coefficients(&CMat3::identity(), &CMat3::identity())
}

/// Exact coefficient perturbation for eps = 1 + eta_eps, mu = 1 + eta_mu.
pub fn delta_coefficients(eta_eps: &CMat3, eta_mu: &CMat3) -> Coeffs {
    material_coefficients(&(CMat3::identity() + eta_eps), &(CMat3::identity() + eta_mu)) - vacuum_coefficients()
}

const CONTOUR_POINTS: usize = 64;

/// Taylor coefficients c_1..c_J of s -> delta_coefficients(s E, s M), valid
/// for |s| <= s_max, from a discrete Cauchy integral on a circle.
pub fn taylor_coefficients(e: &CMat3, m: &CMat3, s_max: f64) -> Result<Vec<Coeffs>> {
    let pole = e[(2, 2)].norm().max(m[(2, 2)].norm());
    let radius = if pole > 0.0 { 0.5 / pole } else { 1.0 };
    let ratio = s_max * pole;
    if ratio > 0.15 {
        return Err(Error::Unsupported(format!(
            "coefficient series converges too slowly (|s| |e33| = {ratio:.3})"
        )));
    }
    let n = CONTOUR_POINTS;
    let mut samples: Vec<Vec<C64>> = vec![Vec::with_capacity(n); N_COEFF];
    for l in 0..n {
        let s = C64::from_polar(radius, 2.0 * PI * l as f64 / n as f64);
        let d = delta_coefficients(&(e * s), &(m * s));
        for (col, v) in samples.iter_mut().zip(d.iter()) {
            col.push(*v);
        }
    }
    let fft = FftPlanner::new().plan_fft_forward(n);
    for col in samples.iter_mut() {
        fft.process(col);
    }
    let order = if ratio == 0.0 {
        2
    } else {
        ((-16.0 / ratio.log10()).ceil() as usize).clamp(2, MAX_POWER)
    };
    let scale_all = samples
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0f64, |a, z| a.max(z.norm()))
        / n as f64;
    let mut out = Vec::with_capacity(order);
    for j in 1..=order {
        let inv = radius.powi(-(j as i32)) / n as f64;
        let cj = Coeffs::from_fn(|i, _| {
            let v = samples[i][j];
            if v.norm() / n as f64 <= 1e-15 * scale_all {
                ZERO
            } else {
                v * inv
            }
        });
        out.push(cj);
    }
    Ok(out)
}

/// Transforms of the coefficient perturbation of a medium.
#[derive(Debug, Clone)]
pub enum CoefficientField {
    Vacuum,
    /// Slab-separable medium: sum_j c_j FT[s^j] with a common z box.
    Separable {
        medium: MediumProfile,
        separable: Separable,
        taylor: Vec<Coeffs>,
    },
    /// Sampled medium: pointwise coefficients, transformed by the rectangle rule.
    Sampled {
        medium: MediumProfile,
        grid: Arc<SampledGrid>,
        values: Vec<Coeffs>,
    },
}

impl CoefficientField {
    pub fn new(medium: &MediumProfile) -> Result<Self> {
        match medium.kind() {
            Kind::Vacuum => Ok(Self::Vacuum),
            Kind::Separable(_) => {
                let (sep, e, m) = medium.separable_view().expect("separable");
                let taylor = taylor_coefficients(&e, &m, sep.scalar_peak())?;
                Ok(Self::Separable {
                    medium: medium.clone(),
                    separable: sep,
                    taylor,
                })
            }
            Kind::Sampled(g) => {
                let rot = crate::linalg::rot_z(medium.angle()).map(crate::linalg::re);
                let values = g
                    .eps
                    .iter()
                    .zip(&g.mu)
                    .map(|(e, m)| delta_coefficients(&(rot * e * rot.transpose()), &(rot * m * rot.transpose())))
                    .collect();
                Ok(Self::Sampled {
                    medium: medium.clone(),
                    grid: g.clone(),
                    values,
                })
            }
        }
    }

    pub fn is_vacuum(&self) -> bool {
        matches!(self, Self::Vacuum)
    }

    /// Transform at transverse momentum `dp` of the layer at height z.
    pub fn at_height(&self, dp: &Vec2, z: f64) -> Coeffs {
        match self {
            Self::Vacuum => Coeffs::zeros(),
            Self::Separable { separable, .. } => {
                if separable.footprint.z_inside(z) {
                    self.transverse(dp)
                } else {
                    Coeffs::zeros()
                }
            }
            Self::Sampled { medium, grid, values } => match grid.plane_of(z) {
                None => Coeffs::zeros(),
                Some(iz) => grid.plane_transform(iz, &medium.local_p(dp), |i| values[i], Coeffs::zeros()),
            },
        }
    }

    /// Full transforms at `dp` for several z-frequencies.
    pub fn at_frequencies<const N: usize>(&self, dp: &Vec2, qz: &[C64; N]) -> [Coeffs; N] {
        match self {
            Self::Vacuum => [Coeffs::zeros(); N],
            Self::Separable { separable, .. } => {
                let xy = self.transverse(dp);
                qz.map(|q| xy * separable.footprint.transform_z(q))
            }
            Self::Sampled { medium, grid, values } => {
                let lp = medium.local_p(dp);
                let mut out = [Coeffs::zeros(); N];
                for iz in 0..grid.dims[2] {
                    let plane = grid.plane_transform(iz, &lp, |i| values[i], Coeffs::zeros());
                    for (o, q) in out.iter_mut().zip(qz) {
                        *o += plane * grid.cell_factor(iz, *q);
                    }
                }
                out
            }
        }
    }

    /// Separable media only: the z-independent transverse transform.
    pub fn transverse(&self, dp: &Vec2) -> Coeffs {
        match self {
            Self::Separable { medium, taylor, .. } => {
                let mut acc = Coeffs::zeros();
                for (j, cj) in taylor.iter().enumerate() {
                    let t = medium.scalar_power_xy(j + 1, dp);
                    if t != ZERO {
                        acc += cj * t;
                    }
                }
                acc
            }
            _ => Coeffs::zeros(),
        }
    }

    /// The common z box (lo, hi) of a separable medium.
    pub fn slab_box(&self) -> Option<(f64, f64)> {
        match self {
            Self::Separable { separable, .. } => {
                let h = 0.5 * separable.footprint.lz;
                Some((-h, h))
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs, re};

    fn tensor(seed: f64) -> CMat3 {
        CMat3::from_fn(|i, j| {
            c(
                0.3 * ((i + 2 * j) as f64 + seed).sin(),
                0.1 * ((i * j) as f64 - seed).cos(),
            )
        })
    }

    #[test]
    fn vacuum_values() {
        let v = vacuum_coefficients();
        let expected = [0., 0., 0., 0., 1., 0., -1., 1., 0., 1., 0., -1., 1., 0., 0., 0., 0., 0.];
        for (a, b) in v.iter().zip(expected) {
            assert_eq!(*a, re(b));
        }
    }

    #[test]
    fn taylor_series_reproduces_the_exact_map() {
        let (e, m) = (tensor(0.4), tensor(1.7));
        let s_max = 0.1 / e[(2, 2)].norm().max(m[(2, 2)].norm());
        let t = taylor_coefficients(&e, &m, s_max).unwrap();
        for s in [c(0.3 * s_max, 0.1 * s_max), re(-s_max), c(0.0, 0.9 * s_max)] {
            let mut sum = Coeffs::zeros();
            let mut pow = ONE;
            for cj in &t {
                pow *= s;
                sum += cj * pow;
            }
            let exact = delta_coefficients(&(e * s), &(m * s));
            assert!(max_abs(&(sum - exact)) < 1e-14, "{s}");
        }
    }

    #[test]
    fn isotropic_linear_term() {
        let t = taylor_coefficients(&CMat3::identity(), &CMat3::zeros(), 0.02).unwrap();
        // C = 1/(1+s) - 1 = -s + s^2 - ...; K_E = [[0, -s], [s, 0]].
        assert!((t[0][4] - re(-1.0)).norm() < 1e-13);
        assert!((t[1][4] - re(1.0)).norm() < 1e-13);
        assert!((t[0][11] - re(-1.0)).norm() < 1e-13);
        assert!((t[0][12] - re(1.0)).norm() < 1e-13);
        assert_eq!(t[1][11], ZERO);
        assert_eq!(t[0][9], ZERO);
    }

    #[test]
    fn strong_media_are_rejected() {
        assert!(matches!(
            taylor_coefficients(&CMat3::identity(), &CMat3::zeros(), 0.5),
            Err(Error::Unsupported(_))
        ));
    }
}
