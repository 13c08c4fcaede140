//! Second-order Dyson term of the transfer matrix.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coefficients::CoefficientField;
use super::grid::MomentumGrid;
use super::kernel::{assemble_block, KernelContext, KernelRoute};
use crate::em::{projector_pair, MomentumPoint};
use crate::error::{Error, Result};
use crate::linalg::{max_abs, re, CMat4, C64, ONE};
use crate::medium::MediumProfile;
use crate::quad::gauss_legendre;

/// phi_1(x) = (e^x - 1)/x.
fn phi1(x: C64) -> C64 {
    if x.norm() < 0.5 {
        let mut term = ONE;
        let mut sum = ONE;
        for n in 2..20 {
            term *= x / n as f64;
            sum += term;
        }
        sum
    } else {
        (x.exp() - 1.0) / x
    }
}

/// int_lo^hi dz2 e^{i a z2} int_lo^z2 dz1 e^{i b z1}, for complex a and b.
pub fn ordered_integral(a: C64, b: C64, lo: f64, hi: f64) -> C64 {
    let h = hi - lo;
    let i = C64::i();
    let x = i * a * h;
    let y = i * b * h;
    let core = if y.norm() >= 0.1 {
        (phi1(x + y) - phi1(x)) / y
    } else {
        // (phi1(x + y) - phi1(x))/y = int_0^1 s e^{s x} phi1(s y) ds
        let n = if x.norm() > 10.0 { 64 } else { 24 };
        gauss_legendre(n, 0.0, 1.0)
            .into_iter()
            .map(|(s, w)| (x * s).exp() * phi1(y * s) * (s * w))
            .sum()
    };
    (i * (a + b) * lo).exp() * core * (h * h)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DysonReport {
    /// max over probe pairs of |D(p, q)|.
    pub norm: f64,
    /// max over probe pairs of |K(p, q)|.
    pub kernel_max: f64,
    pub probes: usize,
    pub intermediate: usize,
}

/// || pi int int_{z1 < z2} H(z2) H(z1) pi ||_max on `probe` x `probe`, with
/// intermediate momenta on every point of `grid_full`.
///
/// Uses the closed-form triangle integral, which requires a medium whose
/// z-dependence is a single box.
pub fn dyson_second_order_norm(
    medium: &MediumProfile,
    grid_full: &MomentumGrid,
    probe: &[MomentumPoint],
) -> Result<DysonReport> {
    let k = grid_full.k();
    let ctx = KernelContext::new(medium, k)?;
    if ctx.is_vacuum() {
        return Ok(DysonReport {
            norm: 0.0,
            kernel_max: 0.0,
            probes: probe.len(),
            intermediate: grid_full.points().len(),
        });
    }
    let field = ctx.field();
    let (lo, hi) = field
        .slab_box()
        .ok_or_else(|| Error::Unsupported("second-order Dyson term needs a slab-separable medium".into()))?;
    let inter = grid_full.points();
    let weights = grid_full.weights();
    let four_pi2 = re(4.0 * std::f64::consts::PI * std::f64::consts::PI);
    let block = |f: &CoefficientField, a: &MomentumPoint, b: &MomentumPoint| {
        assemble_block(&(f.transverse(&(a.p - b.p)) / four_pi2), &a.p, &b.p, k)
    };
    let proj = |m: &MomentumPoint| projector_pair(&m.p, k, m.varpi);

    // right factors V(s, q) Pi_m(q)
    let right: Vec<Vec<[CMat4; 2]>> = inter
        .par_iter()
        .map(|s| {
            probe
                .iter()
                .map(|q| {
                    let v = block(field, s, q);
                    let pq = proj(q);
                    [v * pq[0], v * pq[1]]
                })
                .collect()
        })
        .collect();

    let rows: Vec<(f64, f64)> = probe
        .par_iter()
        .map(|p| {
            let pp = proj(p);
            // left factors Pi_j(p) V(p, s) Pi_l(s), with the weight folded in
            let left: Vec<[CMat4; 4]> = inter
                .iter()
                .zip(weights)
                .map(|(s, w)| {
                    let v = block(field, p, s) * re(*w);
                    let ps = proj(s);
                    [
                        pp[0] * v * ps[0],
                        pp[0] * v * ps[1],
                        pp[1] * v * ps[0],
                        pp[1] * v * ps[1],
                    ]
                })
                .collect();
            let mut dmax = 0.0f64;
            let mut kmax = 0.0f64;
            for (iq, q) in probe.iter().enumerate() {
                let mut d = CMat4::zeros();
                for (is, s) in inter.iter().enumerate() {
                    let l = &left[is];
                    if l.iter().all(|m| m.iter().all(|z| *z == C64::new(0.0, 0.0))) {
                        continue;
                    }
                    let r = &right[is][iq];
                    let ka = KernelContext::kappas(p, s);
                    let kb = KernelContext::kappas(s, q);
                    for j in 0..2 {
                        for l_ in 0..2 {
                            for m in 0..2 {
                                let c = ordered_integral(ka[2 * j + l_], kb[2 * l_ + m], lo, hi);
                                d += l[2 * j + l_] * r[m] * c;
                            }
                        }
                    }
                }
                dmax = dmax.max(max_abs(&d));
                let kq = ctx
                    .kernel(p, q, KernelRoute::Transform)
                    .map(|m| max_abs(&m))
                    .unwrap_or(0.0);
                kmax = kmax.max(kq);
            }
            (dmax, kmax)
        })
        .collect();
    // (-i)^2 = -1 does not change the norm
    let norm = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let kernel_max = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(DysonReport {
        norm,
        kernel_max,
        probes: probe.len(),
        intermediate: inter.len(),
    })
}
