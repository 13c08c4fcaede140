//! The amplitudes T+- for left incidence and the far field they determine.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::kernel::TransferKernel;
use crate::born::{AmplitudeEntry, AmplitudeMap, BornOrder};
use crate::em::{incident_state, projector_pair, xi_contract, DetectorDirection, IncidentWave, MomentumPoint};
use crate::error::{Error, Result, Side};
use crate::linalg::{max_abs, re, CMat4, CVec3, CVec4, C64};

/// Which solver produced a [`TSolution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolvePath {
    /// t+ = Pi_1 K(., k_i) Upsilon, t- = -Pi_2 K(., k_i) Upsilon.
    Fast,
    /// Dense solve of (1 + Pi_2 K W) t- = -Pi_2 K(., k_i) Upsilon, then t+.
    Generic,
}

/// Smooth parts t+- of T+- = 4 pi^2 t+- delta(p - k_i) on the disk grid.
#[derive(Debug, Clone)]
pub struct TSolution {
    pub t_plus: Vec<CVec4>,
    pub t_minus: Vec<CVec4>,
    pub incident: IncidentWave,
    pub path: SolvePath,
    kernel: TransferKernel,
}

/// Solves for t+- on the kernel's disk grid.
pub fn solve_t(kernel: &TransferKernel, w: &IncidentWave, path: SolvePath) -> Result<TSolution> {
    let grid = kernel.grid();
    let k = grid.k();
    if (w.k() - k).abs() > 1e-12 * k {
        return Err(Error::InvalidParameter(format!(
            "incident k = {} differs from the kernel's {k}",
            w.k()
        )));
    }
    if !w.is_left_incident() {
        return Err(Error::Unsupported("only incidence from z = -inf is implemented".into()));
    }
    let ki = w.transverse();
    if ki.norm() >= grid.rim() {
        return Err(Error::IncidenceOutsideDisk);
    }
    let ki = MomentumPoint::new(ki, k, grid.eps_ann())?;
    let ups = incident_state(w);
    let col: Vec<CVec4> = kernel.column(&ki)?.into_iter().map(|m| m * ups).collect();
    let proj: Vec<[CMat4; 2]> = grid.disk().iter().map(|p| projector_pair(&p.p, k, p.varpi)).collect();
    let (t_plus, t_minus) = match path {
        SolvePath::Fast => (
            col.iter().zip(&proj).map(|(c, pr)| pr[0] * c).collect(),
            col.iter().zip(&proj).map(|(c, pr)| -(pr[1] * c)).collect(),
        ),
        SolvePath::Generic => {
            let kw = kernel.matrix()?;
            let n = grid.disk_len();
            let mut a = DMatrix::<C64>::identity(4 * n, 4 * n);
            let mut rhs = DVector::<C64>::zeros(4 * n);
            for (i, pr) in proj.iter().enumerate() {
                let rows = pr[1] * kw.rows(4 * i, 4);
                let mut target = a.rows_mut(4 * i, 4);
                target += &rows;
                rhs.rows_mut(4 * i, 4).copy_from(&(-(pr[1] * col[i])));
            }
            let lu = a.lu();
            let tm = lu.solve(&rhs).ok_or(Error::SingularSystem)?;
            if tm.iter().any(|z| !z.is_finite()) {
                return Err(Error::SingularSystem);
            }
            let ktm = kw * &tm;
            let mut tp = Vec::with_capacity(n);
            let mut tmv = Vec::with_capacity(n);
            for (i, pr) in proj.iter().enumerate() {
                let kt = CVec4::from_iterator(ktm.rows(4 * i, 4).iter().cloned());
                tp.push(pr[0] * (col[i] + kt));
                tmv.push(CVec4::from_iterator(tm.rows(4 * i, 4).iter().cloned()));
            }
            (tp, tmv)
        }
    };
    Ok(TSolution {
        t_plus,
        t_minus,
        incident: w.clone(),
        path,
        kernel: kernel.clone(),
    })
}

impl TSolution {
    /// max |Pi_1 t+ - t+| and |Pi_2 t- - t-| over the disk.
    pub fn projector_residual(&self) -> f64 {
        let grid = self.kernel.grid();
        let mut worst = 0.0f64;
        for ((p, tp), tm) in grid.disk().iter().zip(&self.t_plus).zip(&self.t_minus) {
            let pr = projector_pair(&p.p, grid.k(), p.varpi);
            worst = worst.max(max_abs(&(pr[0] * tp - tp))).max(max_abs(&(pr[1] * tm - tm)));
        }
        worst
    }

    /// max |t+-| over the disk.
    pub fn max_abs(&self) -> f64 {
        self.t_plus.iter().chain(&self.t_minus).map(max_abs).fold(0.0, f64::max)
    }

    pub fn kernel(&self) -> &TransferKernel {
        &self.kernel
    }

    /// F for each direction, in the born module's map layout.
    pub fn amplitude_map(&self, directions: &[DetectorDirection]) -> Result<AmplitudeMap> {
        let entries = directions
            .iter()
            .map(|d| {
                Ok(AmplitudeEntry {
                    direction: *d,
                    f: amplitude_from_t(self, d)?,
                    f2: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AmplitudeMap {
            incident: self.incident.clone(),
            order: BornOrder::First,
            entries,
        })
    }
}

/// F = -(i k |cos theta|/2 pi) Xi^T (4 pi^2 t+-(k_s)), with t interpolated on the disk.
pub fn amplitude_from_t(sol: &TSolution, d: &DetectorDirection) -> Result<CVec3> {
    let grid = sol.kernel.grid();
    let k = grid.k();
    let ks = d.transverse(k);
    if ks.norm() > grid.rim() {
        return Err(Error::DirectionOnRim { ratio: ks.norm() / k });
    }
    let side = d.side();
    let t = if side == Side::Right { &sol.t_plus } else { &sol.t_minus };
    if t.iter().all(|v| v.iter().all(|z| *z == C64::new(0.0, 0.0))) {
        return Ok(CVec3::zeros());
    }
    // varpi t is smooth up to the rim while t itself carries 1/varpi
    let g: Vec<CVec4> = grid.disk().iter().zip(t).map(|(p, v)| v * p.varpi).collect();
    let ws = crate::em::varpi_unchecked(&ks, k);
    let ts = grid.interpolate(&g, &ks)? / ws;
    xi_contract(d, k, side, &(ts * re(4.0 * PI * PI)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em::{Polarization, DEFAULT_EPS_ANN};
    use crate::medium::{FourierRoute, MediumProfile};
    use crate::transfer::grid::MomentumGrid;
    use crate::transfer::kernel::KernelRoute;

    fn wave(k: f64, pol: Polarization) -> IncidentWave {
        IncidentWave::linear(k, 1.0, PI, pol).unwrap()
    }

    fn kernel(m: &MediumProfile, k: f64, n: usize) -> TransferKernel {
        let g = MomentumGrid::disk_grid(k, n, DEFAULT_EPS_ANN).unwrap();
        TransferKernel::build(m, &g, KernelRoute::Transform, 4096).unwrap()
    }

    #[test]
    fn vacuum_gives_nothing() {
        let kern = kernel(&MediumProfile::vacuum(), 0.8, 8);
        let sol = solve_t(&kern, &wave(0.8, Polarization::Te), SolvePath::Generic).unwrap();
        assert_eq!(sol.max_abs(), 0.0);
        let f = amplitude_from_t(&sol, &DetectorDirection::new(2.0, 0.1)).unwrap();
        assert_eq!(f, CVec3::zeros());
    }

    #[test]
    fn compliant_below_half_alpha_gives_nothing() {
        let kern = kernel(&MediumProfile::reference_gausserf(), 0.5, 8);
        let sol = solve_t(&kern, &wave(0.5, Polarization::Tm), SolvePath::Fast).unwrap();
        assert_eq!(sol.max_abs(), 0.0);
    }

    #[test]
    fn generic_path_reduces_to_the_fast_one_for_compliant_media() {
        let m = MediumProfile::reference_gausserf().with_route(FourierRoute::Spectral);
        let kern = kernel(&m, 0.8, 12);
        let w = wave(0.8, Polarization::Te);
        let a = solve_t(&kern, &w, SolvePath::Fast).unwrap();
        let b = solve_t(&kern, &w, SolvePath::Generic).unwrap();
        assert!(a.max_abs() > 0.0);
        for (x, y) in a.t_minus.iter().zip(&b.t_minus).chain(a.t_plus.iter().zip(&b.t_plus)) {
            assert!(max_abs(&(x - y)) < 1e-12 * a.max_abs());
        }
        assert!(a.projector_residual() < 1e-12 * a.max_abs());
        assert!(b.projector_residual() < 1e-10 * a.max_abs());
    }

    #[test]
    fn generic_path_differs_for_the_control() {
        let comp = MediumProfile::reference_gausserf();
        let m = MediumProfile::gaussian_control(&comp).unwrap();
        let kern = kernel(&m, 0.8, 12);
        let w = wave(0.8, Polarization::Te);
        let a = solve_t(&kern, &w, SolvePath::Fast).unwrap();
        let b = solve_t(&kern, &w, SolvePath::Generic).unwrap();
        let d = a
            .t_minus
            .iter()
            .zip(&b.t_minus)
            .map(|(x, y)| max_abs(&(x - y)))
            .fold(0.0, f64::max);
        assert!(d > 1e-6 * a.max_abs());
    }

    #[test]
    fn bad_incidence_is_rejected() {
        let kern = kernel(&MediumProfile::reference_gausserf(), 0.8, 8);
        let w = IncidentWave::linear(0.7, 1.0, 0.0, Polarization::Te).unwrap();
        assert!(matches!(
            solve_t(&kern, &w, SolvePath::Fast),
            Err(Error::InvalidParameter(_))
        ));
        let w = IncidentWave::linear(0.8, 2.5, 0.0, Polarization::Te).unwrap();
        assert!(matches!(
            solve_t(&kern, &w, SolvePath::Fast),
            Err(Error::Unsupported(_))
        ));
        let w = IncidentWave::linear(0.8, PI / 2.0 - 1e-5, 0.0, Polarization::Te).unwrap();
        assert!(matches!(
            solve_t(&kern, &w, SolvePath::Fast),
            Err(Error::IncidenceOutsideDisk)
        ));
    }

    #[test]
    fn rim_directions_are_rejected() {
        let kern = kernel(&MediumProfile::reference_gausserf(), 0.8, 8);
        let sol = solve_t(&kern, &wave(0.8, Polarization::Te), SolvePath::Fast).unwrap();
        let d = DetectorDirection::new(PI / 2.0 - 1e-6, 0.0);
        assert!(matches!(amplitude_from_t(&sol, &d), Err(Error::DirectionOnRim { .. })));
    }
}
