//! Free (vacuum) propagation in the momentum representation.

use super::momentum::{varpi_guarded, varpi_unchecked, DEFAULT_EPS_ANN};
use crate::error::Result;
use crate::linalg::{blocks, re, CMat2, CMat4, Vec2, C64, I};

/// Spectral branch of the free Hamiltonian.
///
/// `Plus` is the projector Pi_1 (eigenvalue -varpi, waves moving toward +z),
/// `Minus` is Pi_2 (eigenvalue +varpi, waves moving toward -z).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Plus,
    Minus,
}

impl Mode {
    pub const BOTH: [Mode; 2] = [Mode::Plus, Mode::Minus];

    /// The factor (-1)^j, j = 1 for `Plus` and 2 for `Minus`.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Mode::Plus => -1.0,
            Mode::Minus => 1.0,
        }
    }
}

/// The 2x2 block L0(p) = (1/k) [[-px py, px^2 - k^2], [k^2 - py^2, px py]].
pub fn free_block(p: &Vec2, k: f64) -> CMat2 {
    let (px, py) = (p.x, p.y);
    CMat2::new(
        re(-px * py / k),
        re((px * px - k * k) / k),
        re((k * k - py * py) / k),
        re(px * py / k),
    )
}

/// H0(p) = [[0, L0], [-L0, 0]].
pub fn free_hamiltonian(p: &Vec2, k: f64) -> CMat4 {
    let l = free_block(p, k);
    blocks(&CMat2::zeros(), &l, &(-l), &CMat2::zeros())
}

/// Pi_j(p) = (1/2)[I + (-1)^j H0(p)/varpi(p)] with the default annulus guard.
pub fn projector(mode: Mode, p: &Vec2, k: f64) -> Result<CMat4> {
    let w = varpi_guarded(p, k, DEFAULT_EPS_ANN)?;
    Ok(projector_with(mode, p, k, w))
}

/// Projector with a precomputed varpi (no singularity check).
pub fn projector_with(mode: Mode, p: &Vec2, k: f64, varpi: C64) -> CMat4 {
    let h = free_hamiltonian(p, k);
    (CMat4::identity() + h * (re(mode.sign()) / varpi)) * re(0.5)
}

/// Both projectors at once.
pub fn projector_pair(p: &Vec2, k: f64, varpi: C64) -> [CMat4; 2] {
    let h = free_hamiltonian(p, k) / varpi;
    let id = CMat4::identity();
    [(id - h) * re(0.5), (id + h) * re(0.5)]
}

/// exp(i z H0(p)) = e^{-i z varpi} Pi_1 + e^{+i z varpi} Pi_2.
pub fn free_evolution(p: &Vec2, k: f64, z: f64) -> CMat4 {
    let w = varpi_unchecked(p, k);
    let [p1, p2] = projector_pair(p, k, w);
    p1 * (-I * z * w).exp() + p2 * (I * z * w).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::linalg::CVec4;
    use proptest::prelude::*;

    fn disk_point() -> impl Strategy<Value = (Vec2, f64)> {
        (0.3..2.0f64, 0.0..0.998f64, 0.0..std::f64::consts::TAU)
            .prop_map(|(k, s, t)| (Vec2::new(k * s * t.cos(), k * s * t.sin()), k))
    }

    #[test]
    fn free_block_at_origin() {
        let l = free_block(&Vec2::zeros(), 1.0);
        assert_eq!(l, CMat2::new(re(0.0), re(-1.0), re(1.0), re(0.0)));
    }

    #[test]
    fn normal_incidence_eigenvector() {
        let p = Vec2::zeros();
        let ups = CVec4::new(re(1.0), re(0.0), re(0.0), re(1.0));
        let p1 = projector(Mode::Plus, &p, 1.0).unwrap();
        let p2 = projector(Mode::Minus, &p, 1.0).unwrap();
        assert!(max_abs(&(p1 * ups - ups)) < 1e-15);
        assert!(max_abs(&(p2 * ups)) < 1e-15);
    }

    #[test]
    fn projector_rejects_rim() {
        assert!(projector(Mode::Plus, &Vec2::new(0.6, 0.8), 1.0).is_err());
    }

    #[test]
    fn free_hamiltonian_eigenvalues_match_varpi() {
        // dense eigensolve on a deterministic sample
        for (px, py, k) in [(0.1, 0.2, 1.0), (0.5, -0.3, 0.8), (-0.7, 0.6, 1.3)] {
            let p = Vec2::new(px, py);
            let w = varpi_unchecked(&p, k).re;
            let h = free_hamiltonian(&p, k);
            let mut ev: Vec<f64> = h
                .map(|z| z.re)
                .complex_eigenvalues()
                .iter()
                .map(|z| {
                    assert!(z.im.abs() < 1e-10);
                    z.re
                })
                .collect();
            ev.sort_by(f64::total_cmp);
            let expected = [-w, -w, w, w];
            for (a, b) in ev.iter().zip(expected) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn evolution_matches_matrix_exponential() {
        for (px, py, z) in [(0.2, 0.1, 0.7), (-0.5, 0.4, -1.3), (0.0, 0.9, 2.1)] {
            let p = Vec2::new(px, py);
            let h = free_hamiltonian(&p, 1.0);
            let dense = (h * (I * z)).exp();
            let spectral = free_evolution(&p, 1.0, z);
            assert!(max_abs(&(dense - spectral)) < 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]
        #[test]
        fn projector_algebra((p, k) in disk_point()) {
            let w = varpi_unchecked(&p, k);
            let [p1, p2] = projector_pair(&p, k, w);
            let id = CMat4::identity();
            prop_assert!(max_abs(&(p1 + p2 - id)) < 1e-12);
            prop_assert!(max_abs(&(p1 * p1 - p1)) < 1e-12);
            prop_assert!(max_abs(&(p2 * p2 - p2)) < 1e-12);
            prop_assert!(max_abs(&(p1 * p2)) < 1e-12);
            prop_assert!((p1.trace() - re(2.0)).norm() < 1e-12);
            let h = free_hamiltonian(&p, k);
            prop_assert!(max_abs(&(h * p1 + p1 * w)) < 1e-10);
            prop_assert!(max_abs(&(h * p2 - p2 * w)) < 1e-10);
        }
    }
}
