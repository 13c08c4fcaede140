//! Transverse-momentum grids: a polar grid on the propagating disk and a
//! Cartesian grid on the surrounding box for intermediate momenta.

use std::f64::consts::PI;

use crate::em::{varpi_unchecked, MomentumPoint};
use crate::error::{Error, Result};
use crate::linalg::{CVec4, Vec2};
use crate::quad::gauss_legendre;

const MIN_RESOLUTION: usize = 8;
const SUBCELLS: usize = 8;

/// Quadrature grid over transverse momenta.
///
/// The first `disk_len` points form the polar disk grid, ring-major: point
/// `i * n_phi + j` sits at radius `radii[i]` and angle `(j + 1/2) 2 pi / n_phi`.
/// The remaining points cover the box |p_x|, |p_y| <= p_max outside the
/// annulus guard.
#[derive(Debug, Clone)]
pub struct MomentumGrid {
    k: f64,
    p_max: f64,
    eps_ann: f64,
    radii: Vec<f64>,
    n_phi: usize,
    points: Vec<MomentumPoint>,
    weights: Vec<f64>,
    disk_len: usize,
}

/// Polar disk grid plus an outer Cartesian box.
pub fn build_momentum_grid(k: f64, p_max: f64, n_disk: usize, n_box: usize, eps_ann: f64) -> Result<MomentumGrid> {
    MomentumGrid::build(k, p_max, n_disk, n_box, eps_ann)
}

impl MomentumGrid {
    pub fn build(k: f64, p_max: f64, n_disk: usize, n_box: usize, eps_ann: f64) -> Result<Self> {
        if n_box < MIN_RESOLUTION {
            return Err(Error::InvalidResolution(format!(
                "n_box = {n_box} is below {MIN_RESOLUTION}"
            )));
        }
        let mut g = Self::disk_grid(k, n_disk, eps_ann)?;
        let inner = k * (1.0 + eps_ann);
        if !(p_max > inner) {
            return Err(Error::InvalidParameter(format!(
                "p_max = {p_max} must exceed the annulus edge {inner}"
            )));
        }
        g.p_max = p_max;
        let h = 2.0 * p_max / n_box as f64;
        let sub = h / SUBCELLS as f64;
        for ix in 0..n_box {
            for iy in 0..n_box {
                let x0 = -p_max + ix as f64 * h;
                let y0 = -p_max + iy as f64 * h;
                let mut outside = Vec::new();
                for a in 0..SUBCELLS {
                    for b in 0..SUBCELLS {
                        let s = Vec2::new(x0 + (a as f64 + 0.5) * sub, y0 + (b as f64 + 0.5) * sub);
                        if s.norm() > inner {
                            outside.push(s);
                        }
                    }
                }
                if outside.is_empty() {
                    continue;
                }
                let full = outside.len() == SUBCELLS * SUBCELLS;
                let p = if full {
                    Vec2::new(x0 + 0.5 * h, y0 + 0.5 * h)
                } else {
                    let centroid = outside.iter().sum::<Vec2>() / outside.len() as f64;
                    *outside
                        .iter()
                        .min_by(|u, v| (*u - centroid).norm().total_cmp(&(*v - centroid).norm()))
                        .expect("non-empty")
                };
                g.points.push(MomentumPoint::new(p, k, eps_ann)?);
                g.weights
                    .push(h * h * outside.len() as f64 / (SUBCELLS * SUBCELLS) as f64);
            }
        }
        Ok(g)
    }

    /// Disk grid only: Gauss-Legendre rings on [0, k(1 - eps_ann)] times
    /// 2 n_disk uniform angles.
    pub fn disk_grid(k: f64, n_disk: usize, eps_ann: f64) -> Result<Self> {
        if n_disk < MIN_RESOLUTION {
            return Err(Error::InvalidResolution(format!(
                "n_disk = {n_disk} is below {MIN_RESOLUTION}"
            )));
        }
        if !(k > 0.0) {
            return Err(Error::InvalidParameter(format!("wavenumber must be positive, got {k}")));
        }
        if !(eps_ann > 0.0 && eps_ann < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eps_ann must lie in (0, 1), got {eps_ann}"
            )));
        }
        let rim = k * (1.0 - eps_ann);
        let rings = gauss_legendre(n_disk, 0.0, rim);
        let n_phi = 2 * n_disk;
        let dphi = 2.0 * PI / n_phi as f64;
        let mut points = Vec::with_capacity(n_disk * n_phi);
        let mut weights = Vec::with_capacity(n_disk * n_phi);
        for &(r, w) in &rings {
            for j in 0..n_phi {
                let phi = (j as f64 + 0.5) * dphi;
                points.push(MomentumPoint::new(Vec2::new(r * phi.cos(), r * phi.sin()), k, eps_ann)?);
                weights.push(r * w * dphi);
            }
        }
        Ok(Self {
            k,
            p_max: rim,
            eps_ann,
            radii: rings.iter().map(|&(r, _)| r).collect(),
            n_phi,
            disk_len: points.len(),
            points,
            weights,
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn eps_ann(&self) -> f64 {
        self.eps_ann
    }

    /// Number of rings on the disk.
    pub fn n_disk(&self) -> usize {
        self.radii.len()
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn points(&self) -> &[MomentumPoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn disk_len(&self) -> usize {
        self.disk_len
    }

    pub fn disk(&self) -> &[MomentumPoint] {
        &self.points[..self.disk_len]
    }

    pub fn disk_weights(&self) -> &[f64] {
        &self.weights[..self.disk_len]
    }

    /// Largest radius covered by the disk grid.
    pub fn rim(&self) -> f64 {
        self.k * (1.0 - self.eps_ann)
    }

    /// Largest distance from a disk point to its nearest neighbour.
    pub fn max_nearest_spacing(&self) -> f64 {
        let n = self.n_phi;
        let ring = |i: usize| &self.points[i * n..(i + 1) * n];
        let mut worst = 0.0f64;
        for i in 0..self.radii.len() {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(self.radii.len() - 1);
            for (j, a) in ring(i).iter().enumerate() {
                let mut best = f64::INFINITY;
                for r in lo..=hi {
                    for (l, b) in ring(r).iter().enumerate() {
                        if r == i && l == j {
                            continue;
                        }
                        best = best.min((a.p - b.p).norm());
                    }
                }
                worst = worst.max(best);
            }
        }
        worst
    }

    /// Cubic interpolation of disk samples at `p`.
    ///
    /// Lagrange in angle along each ring, then in the radial direction. The
    /// radial variable is |p| (with the ring reflected through the origin)
    /// near the centre and varpi(p) further out, where the samples are smooth
    /// functions of varpi rather than of |p|.
    pub fn interpolate(&self, values: &[CVec4], p: &Vec2) -> Result<CVec4> {
        if values.len() != self.disk_len {
            return Err(Error::InvalidParameter(format!(
                "expected {} disk samples, got {}",
                self.disk_len,
                values.len()
            )));
        }
        let r = p.norm();
        if r > self.rim() {
            return Err(Error::DirectionOnRim { ratio: r / self.k });
        }
        let phi = p.y.atan2(p.x);
        let near_centre = r < 0.5 * self.k;
        let mut nodes: Vec<(f64, usize, bool)> = Vec::with_capacity(2 * self.radii.len());
        for (i, &ri) in self.radii.iter().enumerate() {
            if near_centre {
                nodes.push((ri, i, false));
                nodes.push((-ri, i, true));
            } else {
                nodes.push((varpi_unchecked(&Vec2::new(ri, 0.0), self.k).re, i, false));
            }
        }
        let target = if near_centre { r } else { varpi_unchecked(p, self.k).re };
        nodes.sort_by(|a, b| (a.0 - target).abs().total_cmp(&(b.0 - target).abs()));
        nodes.truncate(4);
        let xs: Vec<f64> = nodes.iter().map(|n| n.0).collect();
        let mut out = CVec4::zeros();
        for (m, &(_, ring, mirrored)) in nodes.iter().enumerate() {
            let angle = if mirrored { phi + PI } else { phi };
            let v = self.along_ring(values, ring, angle);
            out += v * lagrange_weight(&xs, m, target);
        }
        Ok(out)
    }

    fn along_ring(&self, values: &[CVec4], ring: usize, phi: f64) -> CVec4 {
        let n = self.n_phi;
        let t = phi.rem_euclid(2.0 * PI) / (2.0 * PI / n as f64) - 0.5;
        let j0 = t.floor();
        let f = t - j0;
        let w = [
            -f * (f - 1.0) * (f - 2.0) / 6.0,
            (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
            -(f + 1.0) * f * (f - 2.0) / 2.0,
            (f + 1.0) * f * (f - 1.0) / 6.0,
        ];
        let mut out = CVec4::zeros();
        for (o, wo) in w.iter().enumerate() {
            let j = (j0 as i64 - 1 + o as i64).rem_euclid(n as i64) as usize;
            out += values[ring * n + j] * crate::linalg::re(*wo);
        }
        out
    }
}

fn lagrange_weight(xs: &[f64], m: usize, x: f64) -> crate::linalg::C64 {
    let mut w = 1.0;
    for (i, &xi) in xs.iter().enumerate() {
        if i != m {
            w *= (x - xi) / (xs[m] - xi);
        }
    }
    crate::linalg::re(w)
}
