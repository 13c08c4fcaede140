//! One-dimensional functions with one-sided spectra and the support checks
//! for products, reciprocals and quotients.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::LEAK_TOL;
use crate::error::{Error, Result};
use crate::linalg::{c, C64, ONE, ZERO};

/// Number of samples on the line.
pub const LINE_POINTS: usize = 1024;
/// Momentum spacing on the line.
pub const LINE_DP: f64 = 0.1;

/// Spectral shape of the envelope u(K), K >= 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleShape {
    Gaussian,
    Exponential,
    Zero,
}

/// Samples of f^(p) on p_j = (j - N/2) dp, with the threshold it is meant to clear.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfLineSpectrumFunction {
    pub alpha: f64,
    pub dp: f64,
    pub spectrum: Vec<C64>,
}

fn grid_index(p: f64, dp: f64, n: usize) -> Result<usize> {
    let t = p / dp + (n / 2) as f64;
    let r = t.round();
    if (t - r).abs() > 1e-9 || r < 0.0 || r >= n as f64 {
        return Err(Error::InvalidParameter(format!(
            "{p} is not a grid momentum for dp = {dp}"
        )));
    }
    Ok(r as usize)
}

/// f(x) = e^{i beta x} g(x) with g^ = u supported on K >= 0, so f^ vanishes below beta.
pub fn make_salpha_sample(alpha: f64, beta: f64, shape: SampleShape, seed: u64) -> Result<HalfLineSpectrumFunction> {
    if beta < alpha {
        return Err(Error::InvalidParameter(format!(
            "beta = {beta} must not be below alpha = {alpha}"
        )));
    }
    let (n, dp) = (LINE_POINTS, LINE_DP);
    let start = grid_index(beta, dp, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a0 = c(rng.random_range(0.5..1.0), rng.random_range(-0.5..0.5));
    let a1 = c(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
    let mut spectrum = vec![ZERO; n];
    for (j, s) in spectrum.iter_mut().enumerate().skip(start) {
        let kk = (j - start) as f64 * dp;
        let u = match shape {
            SampleShape::Gaussian => (-(kk - 0.5) * (kk - 0.5) / (2.0 * 0.16)).exp(),
            SampleShape::Exponential => (-kk / 0.3).exp(),
            SampleShape::Zero => 0.0,
        };
        *s = (a0 + a1 * kk) * u;
    }
    Ok(HalfLineSpectrumFunction { alpha, dp, spectrum })
}

impl HalfLineSpectrumFunction {
    pub fn len(&self) -> usize {
        self.spectrum.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spectrum.is_empty()
    }

    pub fn momentum(&self, j: usize) -> f64 {
        (j as f64 - (self.len() / 2) as f64) * self.dp
    }

    /// Sample spacing in x.
    pub fn dx(&self) -> f64 {
        2.0 * PI / (self.len() as f64 * self.dp)
    }

    /// f(x_m) = (dp/2 pi) sum_j f^_j e^{i p_j x_m}, x_m = m dx.
    pub fn to_space(&self) -> Vec<C64> {
        let n = self.len();
        let mut buf = self.spectrum.clone();
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        let scale = self.dp / (2.0 * PI);
        buf.iter()
            .enumerate()
            .map(|(m, v)| if m % 2 == 0 { v * scale } else { -v * scale })
            .collect()
    }

    /// Inverse of [`Self::to_space`].
    pub fn from_space(alpha: f64, dp: f64, samples: &[C64]) -> Self {
        let n = samples.len();
        let dx = 2.0 * PI / (n as f64 * dp);
        let mut buf: Vec<C64> = samples
            .iter()
            .enumerate()
            .map(|(m, v)| if m % 2 == 0 { *v } else { -v })
            .collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        Self {
            alpha,
            dp,
            spectrum: buf.into_iter().map(|v| v * dx).collect(),
        }
    }

    /// Same function multiplied by `s`.
    pub fn scaled(&self, s: C64) -> Self {
        Self {
            spectrum: self.spectrum.iter().map(|v| v * s).collect(),
            ..self.clone()
        }
    }

    /// Modulation by e^{i delta x}: the spectrum moves up by delta.
    pub fn modulated(&self, delta: f64) -> Result<Self> {
        let shift = grid_index(delta, self.dp, self.len())? as i64 - (self.len() / 2) as i64;
        let n = self.len() as i64;
        let mut spectrum = vec![ZERO; self.len()];
        for (j, v) in self.spectrum.iter().enumerate() {
            let t = j as i64 + shift;
            if (0..n).contains(&t) {
                spectrum[t as usize] = *v;
            } else if *v != ZERO {
                return Err(Error::InvalidParameter(
                    "modulation pushes the spectrum off the grid".into(),
                ));
            }
        }
        Ok(Self {
            alpha: self.alpha + delta,
            spectrum,
            ..self.clone()
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.spectrum.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// max |f^(p)| / max |f^| over p <= threshold - dp (zero for the zero function).
    pub fn leak_below(&self, threshold: f64) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for (j, v) in self.spectrum.iter().enumerate() {
            if self.momentum(j) <= threshold - self.dp + 1e-12 {
                worst = worst.max(v.norm());
            }
        }
        worst / peak
    }

    /// Smallest momentum where |f^| exceeds `tol` max |f^|.
    pub fn support_edge(&self, tol: f64) -> Option<f64> {
        let peak = self.max_abs();
        if peak == 0.0 {
            return None;
        }
        self.spectrum
            .iter()
            .position(|v| v.norm() > tol * peak)
            .map(|j| self.momentum(j))
    }

    /// pi_k: keep |p| < k.
    pub fn project(&self, k: f64) -> Self {
        let spectrum = self
            .spectrum
            .iter()
            .enumerate()
            .map(|(j, v)| if self.momentum(j).abs() < k { *v } else { ZERO })
            .collect();
        Self {
            spectrum,
            ..self.clone()
        }
    }

    /// Pointwise product with a bounded momentum-space function.
    pub fn times_symbol(&self, g: impl Fn(f64) -> C64) -> Self {
        let spectrum = self
            .spectrum
            .iter()
            .enumerate()
            .map(|(j, v)| v * g(self.momentum(j)))
            .collect();
        Self {
            spectrum,
            ..self.clone()
        }
    }
}

/// Outcome of a support measurement against a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportCheck {
    pub threshold: f64,
    pub leak: f64,
    pub edge: Option<f64>,
    pub pass: bool,
}

impl SupportCheck {
    pub fn measure(f: &HalfLineSpectrumFunction, threshold: f64) -> Self {
        let leak = f.leak_below(threshold);
        Self {
            threshold,
            leak,
            edge: f.support_edge(LEAK_TOL),
            pass: leak < LEAK_TOL,
        }
    }
}

fn space_product(f1: &HalfLineSpectrumFunction, f2: &HalfLineSpectrumFunction, alpha: f64) -> HalfLineSpectrumFunction {
    let a = f1.to_space();
    let b = f2.to_space();
    let prod: Vec<C64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    HalfLineSpectrumFunction::from_space(alpha, f1.dp, &prod)
}

/// Support of the transform of the pointwise product in x, against 2 alpha.
pub fn product_support_check(f1: &HalfLineSpectrumFunction, f2: &HalfLineSpectrumFunction, alpha: f64) -> SupportCheck {
    SupportCheck::measure(&space_product(f1, f2, 2.0 * alpha), 2.0 * alpha)
}

/// Product of f^ with a bounded momentum-space function, against alpha.
pub fn bounded_product_check(f: &HalfLineSpectrumFunction, g: impl Fn(f64) -> C64, alpha: f64) -> SupportCheck {
    SupportCheck::measure(&f.times_symbol(g), alpha)
}

/// Truncated geometric series against the exact reciprocal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesGap {
    pub terms: usize,
    pub gap: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReciprocalCheck {
    /// min Re f and max |f| over the window.
    pub min_re: f64,
    pub max_abs: f64,
    pub eta_sup: f64,
    pub reciprocal: SupportCheck,
    pub quotient: Option<SupportCheck>,
    /// Only when sup |eta| < 1.
    pub series: Vec<SeriesGap>,
    pub pass: bool,
}

/// Support of eta_{1/f} = 1/f - 1 for f = 1 + eta, and of g/f when g is given.
pub fn reciprocal_support_check(
    eta: &HalfLineSpectrumFunction,
    alpha: f64,
    g: Option<&HalfLineSpectrumFunction>,
) -> Result<ReciprocalCheck> {
    let x = eta.to_space();
    let f: Vec<C64> = x.iter().map(|e| ONE + e).collect();
    let min_re = f.iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
    let max_abs = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !(min_re > 0.0) {
        return Err(Error::BoundsViolated { min_re, max_abs });
    }
    let inv: Vec<C64> = f.iter().map(|v| ONE / v - ONE).collect();
    let reciprocal = SupportCheck::measure(&HalfLineSpectrumFunction::from_space(alpha, eta.dp, &inv), alpha);
    let quotient = g.map(|g| {
        let gx = g.to_space();
        let h: Vec<C64> = gx.iter().zip(&f).map(|(a, b)| a / b).collect();
        SupportCheck::measure(&HalfLineSpectrumFunction::from_space(alpha, eta.dp, &h), alpha)
    });
    let eta_sup = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut series = Vec::new();
    if eta_sup < 1.0 {
        for terms in [1usize, 2, 4, 8, 16] {
            let mut gap = 0.0f64;
            for (e, exact) in x.iter().zip(&inv) {
                let mut sum = ZERO;
                let mut pow = ONE;
                for _ in 0..terms {
                    pow *= -e;
                    sum += pow;
                }
                gap = gap.max((sum - exact).norm());
            }
            let bound = eta_sup.powi(terms as i32 + 1) / (1.0 - eta_sup);
            series.push(SeriesGap { terms, gap, bound });
        }
    }
    let pass = reciprocal.pass
        && quotient.is_none_or(|q| q.pass)
        && series.iter().all(|s| s.gap <= s.bound * (1.0 + 1e-9) + 1e-15);
    Ok(ReciprocalCheck {
        min_re,
        max_abs,
        eta_sup,
        reciprocal,
        quotient,
        series,
        pass,
    })
}
