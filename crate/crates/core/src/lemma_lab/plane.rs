//! Two-dimensional toy momentum grid: convolution operators with one-sided
//! symbols, bounded multipliers and the projected operator chain.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::line::SupportCheck;
use super::LEAK_TOL;
use crate::error::{Error, Result};
use crate::linalg::{c, C64, ZERO};

/// Points per axis.
pub const PLANE_POINTS: usize = 128;
/// Momentum spacing per axis.
pub const PLANE_DP: f64 = 0.125;

/// Square momentum grid p = ((i - M/2) dp, (j - M/2) dp), row-major in (i, j).
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneField {
    pub values: Vec<C64>,
}

fn coord(i: usize) -> f64 {
    (i as f64 - (PLANE_POINTS / 2) as f64) * PLANE_DP
}

fn check_grid(x: f64, what: &str) -> Result<()> {
    let t = x / PLANE_DP;
    if (t - t.round()).abs() > 1e-9 || x.abs() >= 0.5 * PLANE_POINTS as f64 * PLANE_DP {
        return Err(Error::InvalidParameter(format!("{what} = {x} is not a grid momentum")));
    }
    Ok(())
}

impl PlaneField {
    pub fn from_fn(f: impl Fn(f64, f64) -> C64) -> Self {
        let m = PLANE_POINTS;
        let values = (0..m * m).map(|n| f(coord(n / m), coord(n % m))).collect();
        Self { values }
    }

    pub fn zeros() -> Self {
        Self {
            values: vec![ZERO; PLANE_POINTS * PLANE_POINTS],
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Relative size of the field on p_x <= threshold - dp.
    pub fn leak_below(&self, threshold: f64) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let m = PLANE_POINTS;
        let worst = self
            .values
            .iter()
            .enumerate()
            .filter(|(n, _)| coord(n / m) <= threshold - PLANE_DP + 1e-12)
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max);
        worst / peak
    }

    /// Smallest p_x carrying more than `tol` of the peak.
    pub fn support_edge(&self, tol: f64) -> Option<f64> {
        let peak = self.max_abs();
        if peak == 0.0 {
            return None;
        }
        let m = PLANE_POINTS;
        self.values
            .iter()
            .position(|v| v.norm() > tol * peak)
            .map(|n| coord(n / m))
    }

    pub fn multiply(&mut self, g: &PlaneField) {
        for (a, b) in self.values.iter_mut().zip(&g.values) {
            *a *= b;
        }
    }
}

/// Symbol theta(p_x - beta) (c0 + c1 (p_x - beta)) e^{-((p_x - beta - 1/2)^2 + p_y^2)/2 s^2}.
pub fn one_sided_symbol(beta: f64, seed: u64) -> Result<PlaneField> {
    check_grid(beta, "beta")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c0 = c(rng.random_range(0.5..1.0), rng.random_range(-0.5..0.5));
    let c1 = c(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
    let s2 = 2.0 * 0.6 * 0.6;
    Ok(PlaneField::from_fn(|px, py| {
        let t = px - beta;
        if t < -1e-12 {
            ZERO
        } else {
            (c0 + c1 * t) * (-((t - 0.5) * (t - 0.5) + py * py) / s2).exp()
        }
    }))
}

/// Bounded multiplier c0 + c1 cos(a p_x + b p_y).
pub fn bounded_multiplier(seed: u64) -> PlaneField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c0 = c(rng.random_range(0.5..1.5), rng.random_range(-0.5..0.5));
    let c1 = c(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
    let a = rng.random_range(0.5..2.0);
    let b = rng.random_range(0.5..2.0);
    PlaneField::from_fn(|px, py| c0 + c1 * (a * px + b * py).cos())
}

/// Linear convolution on the grid: (v psi)(p) = (dp^2/4 pi^2) sum_q v(p - q) psi(q).
pub struct Convolver {
    planner: FftPlanner<f64>,
    symbol_hat: Vec<C64>,
}

const PAD: usize = 2 * PLANE_POINTS;

fn fft2(planner: &mut FftPlanner<f64>, buf: &mut [C64], inverse: bool) {
    let fft = if inverse {
        planner.plan_fft_inverse(PAD)
    } else {
        planner.plan_fft_forward(PAD)
    };
    for row in buf.chunks_mut(PAD) {
        fft.process(row);
    }
    let mut col = vec![ZERO; PAD];
    for j in 0..PAD {
        for i in 0..PAD {
            col[i] = buf[i * PAD + j];
        }
        fft.process(&mut col);
        for i in 0..PAD {
            buf[i * PAD + j] = col[i];
        }
    }
}

fn padded(f: &PlaneField) -> Vec<C64> {
    let m = PLANE_POINTS;
    let mut buf = vec![ZERO; PAD * PAD];
    for i in 0..m {
        buf[i * PAD..i * PAD + m].copy_from_slice(&f.values[i * m..(i + 1) * m]);
    }
    buf
}

impl Convolver {
    pub fn new(symbol: &PlaneField) -> Self {
        let mut planner = FftPlanner::new();
        let mut symbol_hat = padded(symbol);
        fft2(&mut planner, &mut symbol_hat, false);
        Self { planner, symbol_hat }
    }

    pub fn apply(&mut self, psi: &PlaneField) -> PlaneField {
        let m = PLANE_POINTS;
        let mut buf = padded(psi);
        fft2(&mut self.planner, &mut buf, false);
        for (a, b) in buf.iter_mut().zip(&self.symbol_hat) {
            *a *= b;
        }
        fft2(&mut self.planner, &mut buf, true);
        let scale = PLANE_DP * PLANE_DP / (4.0 * PI * PI) / (PAD * PAD) as f64;
        let h = m / 2;
        let mut out = PlaneField::zeros();
        for i in 0..m {
            for j in 0..m {
                out.values[i * m + j] = buf[(i + h) * PAD + j + h] * scale;
            }
        }
        out
    }
}

/// Support of v psi for psi supported above alpha and v above beta, against alpha + beta.
pub fn convolution_support_check(alpha: f64, beta: f64, seed: u64) -> Result<SupportCheck> {
    let psi = one_sided_symbol(alpha, seed)?;
    let v = one_sided_symbol(beta, seed.wrapping_add(1))?;
    let out = Convolver::new(&v).apply(&psi);
    let threshold = alpha + beta;
    let leak = out.leak_below(threshold);
    Ok(SupportCheck {
        threshold,
        leak,
        edge: out.support_edge(LEAK_TOL),
        pass: leak < LEAK_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    /// max |pi xi_n V_n .. V_1 xi_0 pi| over disk x disk.
    pub residual: f64,
    /// The same chain without the outer projection, over the whole grid.
    pub reference: f64,
    pub relative: f64,
}

/// Assembles pi xi_n V_n ... V_1 xi_0 pi column by column for |q| < k.
pub fn chain_operator_residual(n: usize, beta: f64, alpha: f64, k: f64, seed: u64) -> Result<ChainReport> {
    if !(1..=2).contains(&n) {
        return Err(Error::InvalidParameter(format!("chain length {n} must be 1 or 2")));
    }
    if k > alpha {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds alpha = {alpha}")));
    }
    let mut convs = Vec::with_capacity(n);
    for j in 0..n {
        convs.push(Convolver::new(&one_sided_symbol(
            beta,
            seed.wrapping_add(2 * j as u64),
        )?));
    }
    let xis: Vec<PlaneField> = (0..=n)
        .map(|j| bounded_multiplier(seed.wrapping_add(2 * j as u64 + 1)))
        .collect();
    let m = PLANE_POINTS;
    let inside = |idx: usize| coord(idx / m).hypot(coord(idx % m)) < k;
    let disk: Vec<usize> = (0..m * m).filter(|&i| inside(i)).collect();
    let mut residual = 0.0f64;
    let mut reference = 0.0f64;
    for &q in &disk {
        let mut psi = PlaneField::zeros();
        psi.values[q] = xis[0].values[q];
        for (conv, xi) in convs.iter_mut().zip(&xis[1..]) {
            psi = conv.apply(&psi);
            psi.multiply(xi);
        }
        reference = reference.max(psi.max_abs());
        for &p in &disk {
            residual = residual.max(psi.values[p].norm());
        }
    }
    let relative = if reference > 0.0 { residual / reference } else { 0.0 };
    Ok(ChainReport {
        residual,
        reference,
        relative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convolution_matches_direct_sum() {
        let v = one_sided_symbol(0.5, 3).unwrap();
        let psi = one_sided_symbol(-1.0, 4).unwrap();
        let out = Convolver::new(&v).apply(&psi);
        let m = PLANE_POINTS;
        let scale = PLANE_DP * PLANE_DP / (4.0 * PI * PI);
        for &(i, j) in &[(64usize, 64usize), (80, 60), (100, 70)] {
            let mut direct = ZERO;
            for a in 0..m {
                for b in 0..m {
                    let (di, dj) = (i as i64 - a as i64 + 64, j as i64 - b as i64 + 64);
                    if (0..m as i64).contains(&di) && (0..m as i64).contains(&dj) {
                        direct += v.values[di as usize * m + dj as usize] * psi.values[a * m + b];
                    }
                }
            }
            direct *= scale;
            assert!((direct - out.values[i * m + j]).norm() < 1e-13 * out.max_abs().max(1e-300));
        }
    }

    #[test]
    fn convolution_adds_edges() {
        let r = convolution_support_check(1.0, 0.5, 9).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.edge.unwrap() >= 1.5 - 1e-12);
    }

    #[test]
    fn compliant_chain_points_vanish() {
        let r = chain_operator_residual(1, 2.0, 1.0, 1.0, 11).unwrap();
        assert!(r.reference > 0.0);
        assert!(r.relative < 1e-10, "{r:?}");
        let r = chain_operator_residual(2, 1.0, 1.0, 1.0, 12).unwrap();
        assert!(r.relative < 1e-10, "{r:?}");
    }

    #[test]
    fn violated_condition_leaves_a_residual() {
        let r = chain_operator_residual(1, 0.5, 1.0, 1.0, 13).unwrap();
        assert!(r.relative > 1e-2, "{r:?}");
    }

    #[test]
    fn seeds_reproduce() {
        let a = chain_operator_residual(1, 0.5, 1.0, 1.0, 5).unwrap();
        let b = chain_operator_residual(1, 0.5, 1.0, 1.0, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_parameters() {
        assert!(chain_operator_residual(3, 1.0, 1.0, 1.0, 0).is_err());
        assert!(chain_operator_residual(1, 1.0, 1.0, 1.5, 0).is_err());
        assert!(one_sided_symbol(0.3, 0).is_err());
    }
}
