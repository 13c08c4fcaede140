//! Permittivity and permeability profiles and their Fourier transforms.
//!
//! A profile is either separable, eta(r) = zeta w(x') box(y', z) T with a
//! constant tensor T and coordinates x' = R^T r rotated about z, or a sampled
//! tensor grid. The 2D transform follows the e^{-i p.r} convention and the 3D
//! transform adds e^{-i qz z} over the slab.

mod config;
mod sampled;
mod shape;
mod support;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, re, rot_z, sinc, CMat3, Vec2, Vec3, C64};

pub use config::{FootprintSpec, MediumSpec, ProfileKind, TensorSpec};
pub use sampled::SampledGrid;
pub use shape::{rational_u, FourierRoute, ShapeTransforms, XShape, MAX_POWER, SPECTRAL_NODES};
pub use support::{bounds_check, support_report, BoundsReport, SupportMethod, SupportOptions, SupportReport};

/// f(y, z) = zeta on |y| <= ly/2 and |z| <= lz/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransverseBox {
    pub zeta: C64,
    pub ly: f64,
    pub lz: f64,
}

impl TransverseBox {
    pub fn new(zeta: C64, ly: f64, lz: f64) -> Result<Self> {
        if !(ly > 0.0 && lz > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "box sides must be positive, got ly = {ly}, lz = {lz}"
            )));
        }
        Ok(Self { zeta, ly, lz })
    }

    pub fn inside(&self, y: f64, z: f64) -> bool {
        y.abs() <= 0.5 * self.ly && z.abs() <= 0.5 * self.lz
    }

    /// zeta ly sinc(py ly/2), the transform in y.
    pub fn transform_y(&self, py: f64) -> f64 {
        self.ly * sinc(0.5 * py * self.ly)
    }

    /// lz sinc(qz lz/2) for complex qz.
    pub fn transform_z(&self, qz: C64) -> C64 {
        let arg = qz * (0.5 * self.lz);
        if arg.norm() < 1e-6 {
            (C64::new(1.0, 0.0) - arg * arg / 6.0) * self.lz
        } else {
            arg.sin() / arg * self.lz
        }
    }

    pub fn z_inside(&self, z: f64) -> bool {
        z.abs() <= 0.5 * self.lz
    }
}

/// Separable profile eta_eps = s(r) E, eta_mu = s(r) M with s = zeta w(x) box(y, z).
#[derive(Debug, Clone)]
pub struct Separable {
    pub alpha: f64,
    pub footprint: TransverseBox,
    pub eps_tensor: CMat3,
    pub mu_tensor: CMat3,
    transforms: Arc<ShapeTransforms>,
}

impl Separable {
    pub fn shape(&self) -> XShape {
        self.transforms.shape()
    }

    pub fn transforms(&self) -> &ShapeTransforms {
        &self.transforms
    }

    /// Scalar s(r) in the profile's own coordinates.
    pub fn scalar(&self, r: &Vec3) -> C64 {
        if !self.footprint.inside(r.y, r.z) {
            return C64::new(0.0, 0.0);
        }
        self.footprint.zeta * self.shape().eval(r.x, self.alpha)
    }

    /// sup |s|.
    pub fn scalar_peak(&self) -> f64 {
        self.footprint.zeta.norm() * self.shape().peak()
    }
}

#[derive(Debug, Clone)]
pub enum Kind {
    Vacuum,
    Separable(Separable),
    Sampled(Arc<SampledGrid>),
}

/// A medium: eta_eps, eta_mu and the slab that contains them.
#[derive(Debug, Clone)]
pub struct MediumProfile {
    kind: Kind,
    slab: (f64, f64),
    angle: f64,
    route: FourierRoute,
}

impl MediumProfile {
    pub fn vacuum() -> Self {
        Self {
            kind: Kind::Vacuum,
            slab: (-0.5, 0.5),
            angle: 0.0,
            route: FourierRoute::Analytic,
        }
    }

    /// Isotropic nonmagnetic separable profile with the slab set to the box height.
    pub fn separable(shape: XShape, alpha: f64, footprint: TransverseBox) -> Result<Self> {
        Self::separable_tensor(shape, alpha, footprint, CMat3::identity(), CMat3::zeros())
    }

    pub fn separable_tensor(
        shape: XShape,
        alpha: f64,
        footprint: TransverseBox,
        eps_tensor: CMat3,
        mu_tensor: CMat3,
    ) -> Result<Self> {
        let a = shape.length();
        if !(a > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "envelope length must be positive, got {a}"
            )));
        }
        if let XShape::Rational { m, .. } = shape {
            if m == 0 {
                return Err(Error::InvalidParameter("m_exp must be a positive integer".into()));
            }
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter("alpha must be finite".into()));
        }
        let half = 0.5 * footprint.lz;
        Ok(Self {
            kind: Kind::Separable(Separable {
                alpha,
                footprint,
                eps_tensor,
                mu_tensor,
                transforms: Arc::new(ShapeTransforms::new(shape, alpha)),
            }),
            slab: (-half, half),
            angle: 0.0,
            route: FourierRoute::Analytic,
        })
    }

    /// The rational profile with zeta = 0.01, m = 1, a = 2, ly = 3, lz = 4 (alpha = 1).
    pub fn reference_rational() -> Self {
        let fp = TransverseBox::new(c(0.01, 0.0), 3.0, 4.0).expect("valid box");
        Self::separable(XShape::Rational { a: 2.0, m: 1 }, 1.0, fp).expect("valid profile")
    }

    /// GaussErf profile on the same box as [`Self::reference_rational`].
    pub fn reference_gausserf() -> Self {
        let fp = TransverseBox::new(c(0.01, 0.0), 3.0, 4.0).expect("valid box");
        Self::separable(XShape::GaussErf { a: 2.0 }, 1.0, fp).expect("valid profile")
    }

    /// Plain Gaussian control with the same peak |eta| as `like`.
    pub fn gaussian_control(like: &MediumProfile) -> Result<Self> {
        let Kind::Separable(s) = &like.kind else {
            return Err(Error::Unsupported("control needs a separable template".into()));
        };
        let peak = s.scalar_peak();
        let zeta = if s.footprint.zeta.norm() > 0.0 {
            s.footprint.zeta / s.footprint.zeta.norm() * peak
        } else {
            C64::new(0.0, 0.0)
        };
        let fp = TransverseBox::new(zeta, s.footprint.ly, s.footprint.lz)?;
        let mut out = Self::separable_tensor(
            XShape::Gaussian { a: s.shape().length() },
            s.alpha,
            fp,
            s.eps_tensor,
            s.mu_tensor,
        )?;
        out.slab = like.slab;
        out.angle = like.angle;
        out.route = like.route;
        Ok(out)
    }

    pub fn sampled(grid: SampledGrid, slab: (f64, f64)) -> Result<Self> {
        let (lo, hi) = grid.z_range();
        if !(slab.0 < slab.1) || lo < slab.0 - 1e-12 || hi > slab.1 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "sampled z-range [{lo}, {hi}] is not inside the slab [{}, {}]",
                slab.0, slab.1
            )));
        }
        Ok(Self {
            kind: Kind::Sampled(Arc::new(grid)),
            slab,
            angle: 0.0,
            route: FourierRoute::Analytic,
        })
    }

    /// Widens the declared slab; it must contain the profile's z-support.
    pub fn with_slab(mut self, slab: (f64, f64)) -> Result<Self> {
        let (lo, hi) = self.z_support();
        if !(slab.0 < slab.1) || slab.0 > lo + 1e-12 || slab.1 < hi - 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "slab [{}, {}] does not contain the profile's z-support [{lo}, {hi}]",
                slab.0, slab.1
            )));
        }
        self.slab = slab;
        Ok(self)
    }

    pub fn with_route(mut self, route: FourierRoute) -> Self {
        self.route = route;
        self
    }

    pub fn route(&self) -> FourierRoute {
        self.route
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn slab(&self) -> (f64, f64) {
        self.slab
    }

    /// Rotation angle of the profile's own x axis about z.
    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn is_vacuum(&self) -> bool {
        match &self.kind {
            Kind::Vacuum => true,
            Kind::Separable(s) => {
                s.footprint.zeta == C64::new(0.0, 0.0)
                    || (s.eps_tensor == CMat3::zeros() && s.mu_tensor == CMat3::zeros())
            }
            Kind::Sampled(g) => g.eps.iter().chain(g.mu.iter()).all(|m| *m == CMat3::zeros()),
        }
    }

    pub fn is_magnetic(&self) -> bool {
        match &self.kind {
            Kind::Vacuum => false,
            Kind::Separable(s) => s.mu_tensor != CMat3::zeros() && s.footprint.zeta.norm() > 0.0,
            Kind::Sampled(g) => g.mu.iter().any(|m| *m != CMat3::zeros()),
        }
    }

    /// Declared support threshold along the profile's x axis, when compliant by construction.
    pub fn declared_alpha(&self) -> Option<f64> {
        match &self.kind {
            Kind::Separable(s) if s.shape().is_modulated() => Some(s.alpha),
            _ => None,
        }
    }

    /// Unit vector along which the transform is one-sided.
    pub fn support_direction(&self) -> Vec2 {
        Vec2::new(self.angle.cos(), self.angle.sin())
    }

    /// z-interval where the profile can be nonzero.
    pub fn z_support(&self) -> (f64, f64) {
        match &self.kind {
            Kind::Vacuum => self.slab,
            Kind::Separable(s) => (-0.5 * s.footprint.lz, 0.5 * s.footprint.lz),
            Kind::Sampled(g) => g.z_range(),
        }
    }

    /// Points in z where the profile may jump, for panel quadrature.
    pub fn z_breaks(&self) -> Vec<f64> {
        let (a, b) = self.slab;
        let mut v = vec![a, b];
        match &self.kind {
            Kind::Vacuum => {}
            Kind::Separable(s) => {
                v.push(-0.5 * s.footprint.lz);
                v.push(0.5 * s.footprint.lz);
            }
            Kind::Sampled(g) => {
                let h = g.spacing[2];
                let lo = g.z_range().0;
                v.extend((0..=g.dims[2]).map(|i| lo + i as f64 * h));
            }
        }
        v.retain(|z| *z >= a - 1e-12 && *z <= b + 1e-12);
        v.sort_by(f64::total_cmp);
        v.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        v
    }

    /// eta scaled by sigma.
    pub fn scaled(&self, sigma: f64) -> Self {
        let mut out = self.clone();
        match &mut out.kind {
            Kind::Vacuum => {}
            Kind::Separable(s) => s.footprint.zeta *= sigma,
            Kind::Sampled(g) => {
                let mut grid = (**g).clone();
                grid.eps.iter_mut().for_each(|m| *m *= re(sigma));
                grid.mu.iter_mut().for_each(|m| *m *= re(sigma));
                *g = Arc::new(grid);
            }
        }
        out
    }

    /// Re-expresses the profile in coordinates where `e` becomes the x axis.
    pub fn rotate_to_x(&self, e: &Vec2) -> Result<Self> {
        let n = e.norm();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "direction must be a unit vector, |e| = {n}"
            )));
        }
        let mut out = self.clone();
        out.angle = self.angle - e.y.atan2(e.x);
        Ok(out)
    }

    /// (eta_eps(r), eta_mu(r)).
    pub fn eval_eta(&self, r: &Vec3) -> (CMat3, CMat3) {
        let rot = rot_z(self.angle);
        let local = rot.transpose() * r;
        let (e, m) = match &self.kind {
            Kind::Vacuum => return (CMat3::zeros(), CMat3::zeros()),
            Kind::Separable(s) => {
                let v = s.scalar(&local);
                (s.eps_tensor * v, s.mu_tensor * v)
            }
            Kind::Sampled(g) => g.eval(&local),
        };
        self.rotate_tensors(e, m)
    }

    fn rotate_tensors(&self, e: CMat3, m: CMat3) -> (CMat3, CMat3) {
        if self.angle == 0.0 {
            return (e, m);
        }
        let r = rot_z(self.angle).map(re);
        let rt = r.transpose();
        (r * e * rt, r * m * rt)
    }

    /// Lab-frame transverse momentum expressed in the profile's own frame.
    pub fn local_p(&self, p: &Vec2) -> Vec2 {
        let (s, c) = self.angle.sin_cos();
        Vec2::new(c * p.x + s * p.y, -s * p.x + c * p.y)
    }

    /// 2D transform at transverse momentum p and height z.
    pub fn fourier_eta_2d(&self, p: &Vec2, z: f64) -> Result<(CMat3, CMat3)> {
        let lp = self.local_p(p);
        let (e, m) = match &self.kind {
            Kind::Vacuum => return Ok((CMat3::zeros(), CMat3::zeros())),
            Kind::Separable(s) => {
                if !s.footprint.z_inside(z) {
                    return Ok((CMat3::zeros(), CMat3::zeros()));
                }
                let v = s.footprint.zeta * s.transforms.transform(lp.x, self.route) * s.footprint.transform_y(lp.y);
                (s.eps_tensor * v, s.mu_tensor * v)
            }
            Kind::Sampled(g) => match g.plane_of(z) {
                None => (CMat3::zeros(), CMat3::zeros()),
                Some(iz) => {
                    let e = g.plane_transform(iz, &lp, |i| g.eps[i], CMat3::zeros());
                    let m = g.plane_transform(iz, &lp, |i| g.mu[i], CMat3::zeros());
                    (e, m)
                }
            },
        };
        Ok(self.rotate_tensors(e, m))
    }

    /// 3D transform at q (real).
    pub fn fourier_eta_3d(&self, q: &Vec3) -> Result<(CMat3, CMat3)> {
        self.fourier_eta_3d_complex_z(&Vec2::new(q.x, q.y), re(q.z))
    }

    /// 3D transform with a complex z-frequency (used with evanescent phases).
    pub fn fourier_eta_3d_complex_z(&self, p: &Vec2, qz: C64) -> Result<(CMat3, CMat3)> {
        let lp = self.local_p(p);
        let (e, m) = match &self.kind {
            Kind::Vacuum => return Ok((CMat3::zeros(), CMat3::zeros())),
            Kind::Separable(s) => {
                let v = s.footprint.zeta
                    * s.transforms.transform(lp.x, self.route)
                    * s.footprint.transform_y(lp.y)
                    * s.footprint.transform_z(qz);
                (s.eps_tensor * v, s.mu_tensor * v)
            }
            Kind::Sampled(g) => {
                let mut e = CMat3::zeros();
                let mut m = CMat3::zeros();
                for iz in 0..g.dims[2] {
                    let f = g.cell_factor(iz, qz);
                    e += g.plane_transform(iz, &lp, |i| g.eps[i], CMat3::zeros()) * f;
                    m += g.plane_transform(iz, &lp, |i| g.mu[i], CMat3::zeros()) * f;
                }
                (e, m)
            }
        };
        Ok(self.rotate_tensors(e, m))
    }

    /// Upper bound on the entries of the 3D transform.
    pub fn peak_fourier_3d(&self) -> f64 {
        match &self.kind {
            Kind::Vacuum => 0.0,
            Kind::Separable(s) => {
                let t = s
                    .eps_tensor
                    .iter()
                    .chain(s.mu_tensor.iter())
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                s.footprint.zeta.norm() * s.shape().spectral_peak() * s.footprint.ly * s.footprint.lz * t
            }
            Kind::Sampled(g) => {
                let vol = g.spacing.iter().product::<f64>();
                let mut e = 0.0f64;
                for comp in 0..9 {
                    let (i, j) = (comp / 3, comp % 3);
                    let se: f64 = g.eps.iter().map(|m| m[(i, j)].norm()).sum();
                    let sm: f64 = g.mu.iter().map(|m| m[(i, j)].norm()).sum();
                    e = e.max(se).max(sm);
                }
                e * vol
            }
        }
    }

    /// Separable parameters, with tensors expressed in the lab frame.
    pub fn separable_view(&self) -> Option<(Separable, CMat3, CMat3)> {
        match &self.kind {
            Kind::Separable(s) => {
                let (e, m) = self.rotate_tensors(s.eps_tensor, s.mu_tensor);
                Some((s.clone(), e, m))
            }
            _ => None,
        }
    }

    /// Transform of s(r)^j box(y', z), the j-th power of the separable scalar,
    /// at lab-frame momentum p and height z.
    pub fn scalar_power_2d(&self, j: usize, p: &Vec2, z: f64) -> C64 {
        let Kind::Separable(s) = &self.kind else {
            return C64::new(0.0, 0.0);
        };
        if !s.footprint.z_inside(z) {
            return C64::new(0.0, 0.0);
        }
        self.power_xy(s, j, p)
    }

    /// Transverse part of [`Self::scalar_power_2d`], ignoring the z extent.
    pub fn scalar_power_xy(&self, j: usize, p: &Vec2) -> C64 {
        let Kind::Separable(s) = &self.kind else {
            return C64::new(0.0, 0.0);
        };
        self.power_xy(s, j, p)
    }

    /// As [`Self::scalar_power_2d`] with the z-transform at frequency qz.
    pub fn scalar_power_3d(&self, j: usize, p: &Vec2, qz: C64) -> C64 {
        let Kind::Separable(s) = &self.kind else {
            return C64::new(0.0, 0.0);
        };
        self.power_xy(s, j, p) * s.footprint.transform_z(qz)
    }

    fn power_xy(&self, s: &Separable, j: usize, p: &Vec2) -> C64 {
        let lp = self.local_p(p);
        let wx = if j == 1 {
            s.transforms.transform(lp.x, self.route)
        } else {
            s.transforms.power_transform(j, lp.x)
        };
        s.footprint.zeta.powi(j as i32) * wx * s.footprint.transform_y(lp.y)
    }
}
