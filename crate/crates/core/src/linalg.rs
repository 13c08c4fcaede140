//! Small fixed-size complex linear algebra used throughout the crate.

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector2, Vector3, Vector4};
pub use num_complex::Complex64 as C64;

pub type Vec2 = Vector2<f64>;
pub type Vec3 = Vector3<f64>;
pub type CVec2 = Vector2<C64>;
pub type CVec3 = Vector3<C64>;
pub type CVec4 = Vector4<C64>;
pub type CMat2 = Matrix2<C64>;
pub type CMat3 = Matrix3<C64>;
pub type CMat4 = Matrix4<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Entrywise max-norm of a complex matrix.
pub fn max_abs<R: nalgebra::Dim, Cc: nalgebra::Dim, S>(m: &nalgebra::Matrix<C64, R, Cc, S>) -> f64
where
    S: nalgebra::RawStorage<C64, R, Cc>,
{
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Euclidean norm of a complex 3-vector.
pub fn norm3(v: &CVec3) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Promote a real 3-vector to complex.
pub fn complexify3(v: &Vec3) -> CVec3 {
    CVec3::new(re(v.x), re(v.y), re(v.z))
}

/// Cross product of a real and a complex 3-vector.
pub fn cross_rc(a: &Vec3, b: &CVec3) -> CVec3 {
    complexify3(a).cross(b)
}

/// The Pauli matrix sigma_2 = [[0, -i], [i, 0]].
pub fn sigma2() -> CMat2 {
    CMat2::new(ZERO, -I, I, ZERO)
}

/// 4x4 matrix from four 2x2 blocks.
pub fn blocks(b11: &CMat2, b12: &CMat2, b21: &CMat2, b22: &CMat2) -> CMat4 {
    let mut m = CMat4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(b11);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(b12);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(b21);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(b22);
    m
}

/// Rotation about the z axis by `angle` (radians).
pub fn rot_z(angle: f64) -> nalgebra::Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    nalgebra::Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// sin(x)/x with the removable singularity filled in.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Dense complex product through four real products (uses the optimized real kernel).
pub fn complex_matmul(a: &nalgebra::DMatrix<C64>, b: &nalgebra::DMatrix<C64>) -> nalgebra::DMatrix<C64> {
    let (ar, ai) = (a.map(|v| v.re), a.map(|v| v.im));
    let (br, bi) = (b.map(|v| v.re), b.map(|v| v.im));
    let rr = &ar * &br - &ai * &bi;
    let ii = &ar * &bi + &ai * &br;
    rr.zip_map(&ii, C64::new)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_is_continuous_at_switch() {
        for x in [0.99999e-4f64, 1.00001e-4] {
            let exact = 1.0 - x * x / 6.0 + x.powi(4) / 120.0;
            assert!((sinc(x) - exact).abs() < 1e-12);
        }
        assert_eq!(sinc(0.0), 1.0);
    }

    #[test]
    fn blocks_places_entries() {
        let a = CMat2::from_element(re(1.0));
        let b = CMat2::from_element(re(2.0));
        let m = blocks(&a, &b, &(b * re(2.0)), &a);
        assert_eq!(m[(0, 3)], re(2.0));
        assert_eq!(m[(3, 0)], re(4.0));
        assert_eq!(m[(3, 3)], re(1.0));
    }

    #[test]
    fn complex_matmul_matches_generic_product() {
        let a = nalgebra::DMatrix::from_fn(3, 4, |i, j| c(i as f64 - 0.5 * j as f64, (i * j) as f64 + 1.0));
        let b = nalgebra::DMatrix::from_fn(4, 2, |i, j| c(j as f64 + 0.25, i as f64 - 2.0));
        let d = complex_matmul(&a, &b) - &a * &b;
        assert!(max_abs(&d) < 1e-13);
    }
}
