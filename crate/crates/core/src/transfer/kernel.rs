//! First-order kernel of the transfer matrix on a momentum grid.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use byteorder::{LittleEndian, WriteBytesExt};
use nalgebra::DMatrix;
use rayon::prelude::*;

use super::coefficients::{CoefficientField, Coeffs};
use super::grid::MomentumGrid;
use crate::em::{projector_pair, Mode, MomentumPoint};
use crate::error::{Error, Result};
use crate::linalg::{blocks, complex_matmul, max_abs, re, CMat2, CMat4, CVec2, Vec2, C64, I, ZERO};
use crate::medium::MediumProfile;
use crate::quad::gauss_legendre;

/// Default cap on the dimension 4 n of the dense kernel matrix.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// How the z-integral of the interaction-picture Hamiltonian is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelRoute {
    /// z-Fourier transform of the medium at the phase-matching frequency.
    Transform,
    /// Gauss-Legendre quadrature in z on each panel between the medium's breaks.
    Quadrature { per_panel: usize },
}

/// Assemble V(p, q) from transformed coefficients (already divided by 4 pi^2).
///
/// Left momentum factors are taken at p and right ones at q.
pub fn assemble_block(c: &Coeffs, p: &Vec2, q: &Vec2, k: f64) -> CMat4 {
    let pv = CVec2::new(re(p.x), re(p.y));
    // q^T sigma_2 = (i q_y, -i q_x)
    let qs = CVec2::new(I * q.y, -I * q.x);
    let outer = |u: &CVec2, v: &CVec2| u * v.transpose();
    let pq = outer(&pv, &qs);
    let a = CVec2::new(c[0], c[1]);
    let b = CVec2::new(c[2], c[3]);
    let kh = CMat2::new(c[5], c[6], c[7], c[8]);
    let ke = CMat2::new(c[10], c[11], c[12], c[13]);
    let e = CVec2::new(c[14], c[15]);
    let f = CVec2::new(c[16], c[17]);
    let v11 = outer(&pv, &a) + outer(&b, &qs) * I;
    let v12 = pq * (I * c[4] / k) + kh * re(k);
    let v21 = pq * (-I * c[9] / k) - ke * re(k);
    let v22 = outer(&pv, &e) + outer(&f, &qs) * I;
    blocks(&v11, &v12, &v21, &v22)
}

/// Kernel of pi delta-H(z) pi between momenta p and q.
pub fn delta_h_block(medium: &MediumProfile, k: f64, z: f64, p: &Vec2, q: &Vec2) -> Result<CMat4> {
    let field = CoefficientField::new(medium)?;
    Ok(KernelContext::from_field(field, k).delta_h(z, p, q))
}

/// One first-order kernel block K(p, q).
pub fn firstorder_kernel(medium: &MediumProfile, k: f64, p: &Vec2, q: &Vec2, route: KernelRoute) -> Result<CMat4> {
    let ctx = KernelContext::new(medium, k)?;
    let eps = crate::em::DEFAULT_EPS_ANN;
    let mp = MomentumPoint::new(*p, k, eps)?;
    let mq = MomentumPoint::new(*q, k, eps)?;
    ctx.kernel(&mp, &mq, route)
}

/// Medium data prepared for repeated kernel evaluations.
#[derive(Debug, Clone)]
pub struct KernelContext {
    field: CoefficientField,
    k: f64,
    breaks: Vec<f64>,
}

const FOUR_PI2: f64 = 4.0 * PI * PI;

impl KernelContext {
    pub fn new(medium: &MediumProfile, k: f64) -> Result<Self> {
        let mut ctx = Self::from_field(CoefficientField::new(medium)?, k);
        ctx.breaks = medium.z_breaks();
        Ok(ctx)
    }

    fn from_field(field: CoefficientField, k: f64) -> Self {
        Self {
            field,
            k,
            breaks: Vec::new(),
        }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn field(&self) -> &CoefficientField {
        &self.field
    }

    pub fn is_vacuum(&self) -> bool {
        self.field.is_vacuum()
    }

    /// pi delta-H(z) pi kernel at (p, q).
    pub fn delta_h(&self, z: f64, p: &Vec2, q: &Vec2) -> CMat4 {
        let c = self.field.at_height(&(p - q), z) / re(FOUR_PI2);
        assemble_block(&c, p, q, self.k)
    }

    /// Phase-matching frequencies kappa_jl = (-1)^j varpi(p) - (-1)^l varpi(q),
    /// ordered (1,1), (1,2), (2,1), (2,2).
    pub fn kappas(p: &MomentumPoint, q: &MomentumPoint) -> [C64; 4] {
        let mut out = [ZERO; 4];
        for (a, j) in Mode::BOTH.iter().enumerate() {
            for (b, l) in Mode::BOTH.iter().enumerate() {
                out[2 * a + b] = p.varpi * j.sign() - q.varpi * l.sign();
            }
        }
        out
    }

    /// z-integrated blocks B_jl = int dz e^{i z kappa_jl} delta-H(z; p, q), same order as [`Self::kappas`].
    pub fn integrated_blocks(&self, p: &MomentumPoint, q: &MomentumPoint, route: KernelRoute) -> Result<[CMat4; 4]> {
        if self.is_vacuum() {
            return Ok([CMat4::zeros(); 4]);
        }
        let kappa = Self::kappas(p, q);
        match route {
            KernelRoute::Transform => {
                let c = self.field.at_frequencies(&(p.p - q.p), &kappa.map(|x| -x));
                Ok(c.map(|ci| assemble_block(&(ci / re(FOUR_PI2)), &p.p, &q.p, self.k)))
            }
            KernelRoute::Quadrature { per_panel } => {
                if self.breaks.len() < 2 {
                    return Err(Error::QuadratureNotConverged {
                        estimate: f64::NAN,
                        tolerance: 0.0,
                    });
                }
                let mut out = [CMat4::zeros(); 4];
                for w in self.breaks.windows(2) {
                    for (z, wz) in gauss_legendre(per_panel, w[0], w[1]) {
                        let h = self.delta_h(z, &p.p, &q.p);
                        for (o, kap) in out.iter_mut().zip(kappa) {
                            *o += h * ((I * kap * z).exp() * wz);
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// K(p, q) = -i sum_jl Pi_j(p) B_jl Pi_l(q).
    pub fn kernel(&self, p: &MomentumPoint, q: &MomentumPoint, route: KernelRoute) -> Result<CMat4> {
        if self.is_vacuum() {
            return Ok(CMat4::zeros());
        }
        let b = self.integrated_blocks(p, q, route)?;
        let pp = projector_pair(&p.p, self.k, p.varpi);
        let pq = projector_pair(&q.p, self.k, q.varpi);
        let mut out = CMat4::zeros();
        for j in 0..2 {
            for l in 0..2 {
                out += pp[j] * b[2 * j + l] * pq[l];
            }
        }
        Ok(out * (-I))
    }
}

/// First-order kernel K(p, q) w_q on the disk part of a grid.
///
/// A lazy kernel keeps only the medium and the grid; its blocks are evaluated
/// on demand and no dense matrix is formed.
#[derive(Debug, Clone)]
pub struct TransferKernel {
    grid: MomentumGrid,
    /// Row block p, column block q: K(p, q) w_q, with max |K(p, q)| unweighted.
    dense: Option<(DMatrix<C64>, f64)>,
    ctx: KernelContext,
}

/// Materializes K on disk x disk with the default dimension cap.
pub fn transfer_first_order(medium: &MediumProfile, grid: &MomentumGrid) -> Result<TransferKernel> {
    TransferKernel::build(medium, grid, KernelRoute::Transform, DEFAULT_DIM_CAP)
}

impl TransferKernel {
    pub fn build(medium: &MediumProfile, grid: &MomentumGrid, route: KernelRoute, dim_cap: usize) -> Result<Self> {
        let n = grid.disk_len();
        let dim = 4 * n;
        if dim > dim_cap {
            return Err(Error::MemoryGuard { dim, cap: dim_cap });
        }
        let ctx = KernelContext::new(medium, grid.k())?;
        let disk = grid.disk();
        let w = grid.disk_weights();
        let rows: Vec<(Vec<CMat4>, f64)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut row = Vec::with_capacity(n);
                let mut m = 0.0f64;
                for q in disk {
                    let kb = ctx.kernel(&disk[i], q, route)?;
                    m = m.max(max_abs(&kb));
                    row.push(kb);
                }
                Ok((row, m))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut matrix = DMatrix::zeros(dim, dim);
        let mut kernel_max = 0.0f64;
        for (i, (row, m)) in rows.into_iter().enumerate() {
            kernel_max = kernel_max.max(m);
            for (l, kb) in row.into_iter().enumerate() {
                matrix.view_mut((4 * i, 4 * l), (4, 4)).copy_from(&(kb * re(w[l])));
            }
        }
        Ok(Self {
            grid: grid.clone(),
            dense: Some((matrix, kernel_max)),
            ctx,
        })
    }

    /// Kernel without the dense matrix, for column-only use on large grids.
    pub fn lazy(medium: &MediumProfile, grid: &MomentumGrid) -> Result<Self> {
        Ok(Self {
            grid: grid.clone(),
            dense: None,
            ctx: KernelContext::new(medium, grid.k())?,
        })
    }

    pub fn is_dense(&self) -> bool {
        self.dense.is_some()
    }

    fn dense(&self) -> Result<&(DMatrix<C64>, f64)> {
        self.dense.as_ref().ok_or(Error::MemoryGuard {
            dim: 4 * self.grid.disk_len(),
            cap: 0,
        })
    }

    /// K(p_i, q) for every disk point p_i.
    pub fn column(&self, q: &MomentumPoint) -> Result<Vec<CMat4>> {
        self.grid
            .disk()
            .par_iter()
            .map(|p| self.ctx.kernel(p, q, KernelRoute::Transform))
            .collect()
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn k(&self) -> f64 {
        self.grid.k()
    }

    pub fn context(&self) -> &KernelContext {
        &self.ctx
    }

    /// The weighted matrix of K (dense kernels only).
    pub fn matrix(&self) -> Result<&DMatrix<C64>> {
        Ok(&self.dense()?.0)
    }

    /// ||K||_max over disk pairs, unweighted (dense kernels only).
    pub fn max_norm(&self) -> Result<f64> {
        Ok(self.dense()?.1)
    }

    /// Block K(p_i, q_l), unweighted.
    pub fn block(&self, i: usize, l: usize) -> Result<CMat4> {
        let d = self.grid.disk();
        match &self.dense {
            Some((m, _)) => Ok(m.fixed_view::<4, 4>(4 * i, 4 * l).into_owned() / re(self.grid.disk_weights()[l])),
            None => self.ctx.kernel(&d[i], &d[l], KernelRoute::Transform),
        }
    }

    /// Block-diagonal matrix of Pi_mode over the disk.
    pub fn projector_matrix(&self, mode: Mode) -> DMatrix<C64> {
        let n = self.grid.disk_len();
        let mut m = DMatrix::zeros(4 * n, 4 * n);
        let idx = if mode == Mode::Plus { 0 } else { 1 };
        for (i, p) in self.grid.disk().iter().enumerate() {
            let pr = projector_pair(&p.p, self.k(), p.varpi)[idx];
            m.view_mut((4 * i, 4 * i), (4, 4)).copy_from(&pr);
        }
        m
    }

    /// Columnar dump: header `EBKERN01`, u64 n, f64 k, the n disk momenta
    /// (p_x, p_y, weight), then n*n blocks of 16 complex numbers (row-major,
    /// p slowest) as interleaved (re, im) f64 values of K(p, q) w_q.
    pub fn write_dump<W: Write>(&self, mut out: W) -> Result<()> {
        let matrix = self.matrix()?;
        out.write_all(b"EBKERN01")?;
        let n = self.grid.disk_len();
        out.write_u64::<LittleEndian>(n as u64)?;
        out.write_f64::<LittleEndian>(self.k())?;
        for (m, w) in self.grid.disk().iter().zip(self.grid.disk_weights()) {
            for v in [m.p.x, m.p.y, *w] {
                out.write_f64::<LittleEndian>(v)?;
            }
        }
        for i in 0..n {
            for l in 0..n {
                for r in 0..4 {
                    for c in 0..4 {
                        let z = matrix[(4 * i + r, 4 * l + c)];
                        out.write_f64::<LittleEndian>(z.re)?;
                        out.write_f64::<LittleEndian>(z.im)?;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn save_dump(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_dump(std::io::BufWriter::new(f))
    }
}

/// ||(M - pi) Pi_2 (M - pi)||_max as a kernel, from one matrix product.
pub fn sandwich_identity_residual(kernel: &TransferKernel) -> Result<f64> {
    if kernel.max_norm()? == 0.0 {
        return Ok(0.0);
    }
    let m = kernel.matrix()?;
    let left = complex_matmul(m, &kernel.projector_matrix(Mode::Minus));
    let prod = complex_matmul(&left, m);
    // strip the right-hand weights to report a kernel value
    let w = kernel.grid().disk_weights();
    let mut worst = 0.0f64;
    for (col, wl) in prod.column_iter().enumerate().map(|(c, v)| (v, w[c / 4])) {
        worst = worst.max(col.iter().fold(0.0f64, |a, z| a.max(z.norm())) / wl);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em::{free_hamiltonian, DEFAULT_EPS_ANN};
    use crate::linalg::{c, CMat3};
    use crate::medium::{TransverseBox, XShape};
    use crate::transfer::coefficients::{material_coefficients, vacuum_coefficients};
    use proptest::prelude::*;

    #[test]
    fn vacuum_coefficients_rebuild_the_free_hamiltonian() {
        let v = vacuum_coefficients();
        for p in [Vec2::new(0.1, -0.3), Vec2::new(0.7, 0.2), Vec2::new(1.3, -2.0)] {
            let h = assemble_block(&v, &p, &p, 0.8);
            assert!(max_abs(&(h - free_hamiltonian(&p, 0.8))) < 1e-15);
        }
    }

    #[test]
    fn uniform_medium_dispersion() {
        // constant isotropic eps, mu: eigenvalues of H(p, p) are -+sqrt(k^2 eps mu - |p|^2)
        let (eps, mu, k) = (2.25, 1.44, 0.8);
        let cs = material_coefficients(&(CMat3::identity() * re(eps)), &(CMat3::identity() * re(mu)));
        let p = Vec2::new(0.3, -0.4);
        let h = assemble_block(&cs, &p, &p, k);
        let h2 = h * h;
        let kz2 = k * k * eps * mu - p.norm_squared();
        assert!(max_abs(&(h2 - CMat4::identity() * re(kz2))) < 1e-13);
    }

    fn medium(shape: XShape) -> MediumProfile {
        MediumProfile::separable(shape, 1.0, TransverseBox::new(c(0.01, 0.0), 3.0, 4.0).unwrap()).unwrap()
    }

    #[test]
    fn vacuum_kernel_is_zero() {
        let k = firstorder_kernel(
            &MediumProfile::vacuum(),
            0.8,
            &Vec2::new(0.2, 0.1),
            &Vec2::new(-0.3, 0.0),
            KernelRoute::Transform,
        )
        .unwrap();
        assert_eq!(k, CMat4::zeros());
        assert_eq!(
            delta_h_block(&MediumProfile::vacuum(), 0.8, 0.0, &Vec2::zeros(), &Vec2::zeros()).unwrap(),
            CMat4::zeros()
        );
    }

    #[test]
    fn compliant_kernel_vanishes_below_alpha() {
        let m = medium(XShape::GaussErf { a: 2.0 });
        let k = firstorder_kernel(
            &m,
            0.8,
            &Vec2::new(0.3, 0.1),
            &Vec2::new(-0.6, 0.2),
            KernelRoute::Transform,
        )
        .unwrap();
        assert_eq!(max_abs(&k), 0.0);
        let k = firstorder_kernel(
            &m,
            0.8,
            &Vec2::new(0.6, 0.1),
            &Vec2::new(-0.6, 0.2),
            KernelRoute::Transform,
        )
        .unwrap();
        assert!(max_abs(&k) > 1e-4);
    }

    #[test]
    fn nonmagnetic_isotropic_block_structure() {
        let m = medium(XShape::Gaussian { a: 2.0 });
        let (p, q) = (Vec2::new(0.4, 0.1), Vec2::new(-0.2, 0.3));
        let h = delta_h_block(&m, 0.8, 0.5, &p, &q).unwrap();
        // mu-only blocks: V11 and V22 vanish, V21 has no D term
        assert_eq!(max_abs(&h.fixed_view::<2, 2>(0, 0)), 0.0);
        assert_eq!(max_abs(&h.fixed_view::<2, 2>(2, 2)), 0.0);
        let eta = m.fourier_eta_2d(&(p - q), 0.5).unwrap().0[(0, 0)];
        let ke = h.fixed_view::<2, 2>(2, 0).into_owned();
        // -k delta K_E with delta K_E = [[0, -eta], [eta, 0]] / 4 pi^2 at first order
        let expect = -0.8 * eta / (4.0 * PI * PI);
        assert!((ke[(1, 0)] - expect).norm() < 1e-6 * expect.norm());
    }

    #[test]
    fn routes_agree() {
        let m = medium(XShape::Gaussian { a: 2.0 });
        let ctx = KernelContext::new(&m, 0.8).unwrap();
        let mut rng = 0.37f64;
        let mut next = || {
            rng = (rng * 9301.0 + 0.49297).fract();
            rng
        };
        for _ in 0..20 {
            let pt = |r: f64, t: f64| Vec2::new(0.79 * r.sqrt() * (6.3 * t).cos(), 0.79 * r.sqrt() * (6.3 * t).sin());
            let p = MomentumPoint::new(pt(next(), next()), 0.8, DEFAULT_EPS_ANN).unwrap();
            let q = MomentumPoint::new(pt(next(), next()), 0.8, DEFAULT_EPS_ANN).unwrap();
            let a = ctx.kernel(&p, &q, KernelRoute::Transform).unwrap();
            let b = ctx.kernel(&p, &q, KernelRoute::Quadrature { per_panel: 32 }).unwrap();
            assert!(
                max_abs(&(a - b)) <= 1e-10 * max_abs(&a),
                "{}",
                max_abs(&(a - b)) / max_abs(&a)
            );
        }
    }

    #[test]
    fn weak_medium_is_invisible_at_half_alpha() {
        let m = medium(XShape::GaussErf { a: 2.0 });
        let g = MomentumGrid::disk_grid(0.5, 8, DEFAULT_EPS_ANN).unwrap();
        let k = transfer_first_order(&m, &g).unwrap();
        assert_eq!(k.max_norm().unwrap(), 0.0);
        assert_eq!(sandwich_identity_residual(&k).unwrap(), 0.0);
    }

    #[test]
    fn memory_guard() {
        let g = MomentumGrid::disk_grid(0.5, 32, DEFAULT_EPS_ANN).unwrap();
        let err = TransferKernel::build(&MediumProfile::vacuum(), &g, KernelRoute::Transform, 1024).unwrap_err();
        assert!(matches!(err, Error::MemoryGuard { dim: 8192, cap: 1024 }));
    }

    #[test]
    fn dump_layout() {
        let m = medium(XShape::Gaussian { a: 2.0 });
        let g = MomentumGrid::disk_grid(0.8, 8, DEFAULT_EPS_ANN).unwrap();
        let k = transfer_first_order(&m, &g).unwrap();
        let mut buf = Vec::new();
        k.write_dump(&mut buf).unwrap();
        let n = g.disk_len();
        assert_eq!(&buf[..8], b"EBKERN01");
        assert_eq!(buf.len(), 8 + 8 + 8 + 24 * n + 256 * n * n);
    }

    #[test]
    fn compliant_kernel_is_linear_in_eta() {
        // on the disk at k < alpha only the linear Taylor term survives
        let m = medium(XShape::GaussErf { a: 2.0 });
        let g = MomentumGrid::disk_grid(0.8, 8, DEFAULT_EPS_ANN).unwrap();
        let a = transfer_first_order(&m, &g).unwrap();
        let b = transfer_first_order(&m.scaled(3.0), &g).unwrap();
        assert!(a.max_norm().unwrap() > 0.0);
        let (a, b) = (a.matrix().unwrap(), b.matrix().unwrap());
        let d = max_abs(&(b - a * re(3.0)));
        assert!(d <= 1e-14 * max_abs(b), "{d}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn evolution_matches_dense_exponential(r in 0.0f64..0.79, t in 0.0f64..6.28, z in -3.0f64..3.0) {
            let k = 0.8;
            let p = Vec2::new(r * t.cos(), r * t.sin());
            let h = free_hamiltonian(&p, k) * (I * z);
            let dense = h.exp();
            let e = crate::em::free_evolution(&p, k, z);
            prop_assert!(max_abs(&(dense - e)) < 1e-10);
        }
    }
}
