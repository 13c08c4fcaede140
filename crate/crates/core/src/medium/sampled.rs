//! Tensor-valued profiles given on a regular grid.
//!
//! Binary layout (little-endian): the 8-byte magic `EBGRID01`, three u64
//! dimensions (nx, ny, nz), six f64 values (dx, dy, dz, x0, y0, z0), then 36
//! columns of nx*ny*nz f64 each in C order (x slowest). The columns hold the
//! real and imaginary parts of eta_eps[i][j] followed by eta_mu[i][j], row-major.

use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::linalg::{CMat3, Vec2, Vec3, C64, I};

const MAGIC: &[u8; 8] = b"EBGRID01";

/// Samples of (eta_eps, eta_mu) at the points x0 + i dx, y0 + j dy, z0 + l dz.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGrid {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
    pub eps: Vec<CMat3>,
    pub mu: Vec<CMat3>,
}

impl SampledGrid {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], origin: [f64; 3], eps: Vec<CMat3>, mu: Vec<CMat3>) -> Result<Self> {
        let n = dims.iter().product::<usize>();
        if n == 0 || eps.len() != n || mu.len() != n {
            return Err(Error::Format(format!(
                "grid {dims:?} needs {n} samples, got {} and {}",
                eps.len(),
                mu.len()
            )));
        }
        if spacing.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::Format("grid spacings must be positive".into()));
        }
        Ok(Self {
            dims,
            spacing,
            origin,
            eps,
            mu,
        })
    }

    /// Fills a grid by evaluating `f` at every sample point.
    pub fn from_fn(dims: [usize; 3], spacing: [f64; 3], origin: [f64; 3], f: impl Fn(&Vec3) -> (CMat3, CMat3)) -> Self {
        let mut eps = Vec::with_capacity(dims.iter().product());
        let mut mu = Vec::with_capacity(eps.capacity());
        for ix in 0..dims[0] {
            for iy in 0..dims[1] {
                for iz in 0..dims[2] {
                    let (e, m) = f(&Self::point_of(&origin, &spacing, ix, iy, iz));
                    eps.push(e);
                    mu.push(m);
                }
            }
        }
        Self {
            dims,
            spacing,
            origin,
            eps,
            mu,
        }
    }

    fn point_of(origin: &[f64; 3], h: &[f64; 3], ix: usize, iy: usize, iz: usize) -> Vec3 {
        Vec3::new(
            origin[0] + ix as f64 * h[0],
            origin[1] + iy as f64 * h[1],
            origin[2] + iz as f64 * h[2],
        )
    }

    pub fn point(&self, ix: usize, iy: usize, iz: usize) -> Vec3 {
        Self::point_of(&self.origin, &self.spacing, ix, iy, iz)
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.dims[1] + iy) * self.dims[2] + iz
    }

    /// z-extent covered by the sample cells.
    pub fn z_range(&self) -> (f64, f64) {
        let h = self.spacing[2];
        let lo = self.origin[2] - 0.5 * h;
        (lo, lo + self.dims[2] as f64 * h)
    }

    /// Trilinear interpolation; zero outside the sampled box.
    pub fn eval(&self, r: &Vec3) -> (CMat3, CMat3) {
        let mut idx = [0usize; 3];
        let mut frac = [0.0; 3];
        for d in 0..3 {
            let t = (r[d] - self.origin[d]) / self.spacing[d];
            let n = self.dims[d];
            if n == 1 {
                if t.abs() > 0.5 {
                    return (CMat3::zeros(), CMat3::zeros());
                }
                idx[d] = 0;
                frac[d] = 0.0;
                continue;
            }
            if t < 0.0 || t > (n - 1) as f64 {
                return (CMat3::zeros(), CMat3::zeros());
            }
            let i = (t.floor() as usize).min(n - 2);
            idx[d] = i;
            frac[d] = t - i as f64;
        }
        let mut e = CMat3::zeros();
        let mut m = CMat3::zeros();
        for corner in 0..8 {
            let mut w = 1.0;
            let mut ii = [0usize; 3];
            for d in 0..3 {
                let up = (corner >> d) & 1 == 1;
                if self.dims[d] == 1 {
                    if up {
                        w = 0.0;
                    }
                    ii[d] = idx[d];
                } else {
                    ii[d] = idx[d] + up as usize;
                    w *= if up { frac[d] } else { 1.0 - frac[d] };
                }
            }
            if w == 0.0 {
                continue;
            }
            let k = self.index(ii[0], ii[1], ii[2]);
            e += self.eps[k] * C64::new(w, 0.0);
            m += self.mu[k] * C64::new(w, 0.0);
        }
        (e, m)
    }

    /// z-plane index whose cell contains `z`.
    pub fn plane_of(&self, z: f64) -> Option<usize> {
        let t = ((z - self.origin[2]) / self.spacing[2] + 0.5).floor();
        if t < 0.0 || t >= self.dims[2] as f64 {
            None
        } else {
            Some(t as usize)
        }
    }

    /// In-plane transform by the rectangle rule, generic over the sampled field.
    pub fn plane_transform<T, F>(&self, iz: usize, p: &Vec2, field: F, zero: T) -> T
    where
        F: Fn(usize) -> T,
        T: std::ops::AddAssign + std::ops::Mul<C64, Output = T> + Copy,
    {
        let [nx, ny, _] = self.dims;
        let area = self.spacing[0] * self.spacing[1];
        let mut acc = zero;
        for ix in 0..nx {
            let x = self.origin[0] + ix as f64 * self.spacing[0];
            for iy in 0..ny {
                let y = self.origin[1] + iy as f64 * self.spacing[1];
                let ph = (-I * (p.x * x + p.y * y)).exp() * area;
                acc += field(self.index(ix, iy, iz)) * ph;
            }
        }
        acc
    }

    /// Transform of a z-cell indicator: int_{cell} e^{-i qz z} dz.
    pub fn cell_factor(&self, iz: usize, qz: C64) -> C64 {
        let h = self.spacing[2];
        let zc = self.origin[2] + iz as f64 * h;
        let arg = qz * (0.5 * h);
        let sinc = if arg.norm() < 1e-6 {
            C64::new(1.0, 0.0) - arg * arg / 6.0
        } else {
            arg.sin() / arg
        };
        (-I * qz * zc).exp() * h * sinc
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        for d in self.dims {
            w.write_u64::<LittleEndian>(d as u64)?;
        }
        for v in self.spacing.iter().chain(self.origin.iter()) {
            w.write_f64::<LittleEndian>(*v)?;
        }
        for tensor in [&self.eps, &self.mu] {
            for i in 0..3 {
                for j in 0..3 {
                    for part in 0..2 {
                        for m in tensor.iter() {
                            let z = m[(i, j)];
                            w.write_f64::<LittleEndian>(if part == 0 { z.re } else { z.im })?;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not a sampled-profile file (bad magic)".into()));
        }
        let mut dims = [0usize; 3];
        for d in dims.iter_mut() {
            *d = r.read_u64::<LittleEndian>()? as usize;
        }
        let mut vals = [0.0; 6];
        for v in vals.iter_mut() {
            *v = r.read_f64::<LittleEndian>()?;
        }
        let n: usize = dims.iter().product();
        if n == 0 || n > 1 << 28 {
            return Err(Error::Format(format!("implausible grid dimensions {dims:?}")));
        }
        let mut eps = vec![CMat3::zeros(); n];
        let mut mu = vec![CMat3::zeros(); n];
        for tensor in [&mut eps, &mut mu] {
            for i in 0..3 {
                for j in 0..3 {
                    for part in 0..2 {
                        for m in tensor.iter_mut() {
                            let v = r.read_f64::<LittleEndian>()?;
                            if part == 0 {
                                m[(i, j)].re = v;
                            } else {
                                m[(i, j)].im = v;
                            }
                        }
                    }
                }
            }
        }
        Self::new(dims, [vals[0], vals[1], vals[2]], [vals[3], vals[4], vals[5]], eps, mu)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read(std::io::BufReader::new(f))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;

    fn small() -> SampledGrid {
        SampledGrid::from_fn([4, 3, 2], [0.5, 0.5, 1.0], [-1.0, -0.5, 0.0], |r| {
            (
                CMat3::identity() * C64::new(r.x, r.y),
                CMat3::from_element(re(r.z * 0.1)),
            )
        })
    }

    #[test]
    fn binary_round_trip() {
        let g = small();
        let mut buf = Vec::new();
        g.write(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 24 + 48 + 36 * 24 * 8);
        let back = SampledGrid::read(&buf[..]).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn bad_magic_rejected() {
        let err = SampledGrid::read(&b"NOTAGRID........"[..]).unwrap_err();
        assert!(matches!(err, Error::Format(_)));
    }

    #[test]
    fn trilinear_reproduces_linear_fields() {
        let g = small();
        let (e, m) = g.eval(&Vec3::new(-0.3, 0.2, 0.4));
        assert!((e[(0, 0)] - C64::new(-0.3, 0.2)).norm() < 1e-14);
        assert!((m[(1, 2)] - re(0.04)).norm() < 1e-14);
        let (e, _) = g.eval(&Vec3::new(5.0, 0.0, 0.0));
        assert_eq!(e, CMat3::zeros());
    }

    #[test]
    fn cell_factor_integrates_plane_wave() {
        let g = small();
        let q = C64::new(0.7, 0.0);
        let v = g.cell_factor(1, q);
        // int_{0.5}^{1.5} e^{-i q z} dz
        let exact = ((-I * q * 1.5).exp() - (-I * q * 0.5).exp()) / (-I * q);
        assert!((v - exact).norm() < 1e-14);
    }
}
