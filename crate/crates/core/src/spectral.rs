//! Whole-line Fourier transforms of slowly decaying functions.
//!
//! [`CayleyLine`] expands g(x) = e^{-i s0 x} f(x) in the Malmquist-Takenaka
//! basis psi_n(x) = sqrt(s/pi) (x - i s)^n / (x + i s)^{n+1}, n in Z. The map
//! x = s tan(theta/2) turns the expansion into a Fourier series in theta, so
//! the coefficients come from one FFT. Each basis function has a closed-form
//! transform supported on a half-line: K > 0 for n >= 0 and K < 0 for n < 0.
//! This gives transforms of algebraically decaying functions with no
//! truncation window.

use std::f64::consts::PI;

use rustfft::FftPlanner;

use crate::linalg::{C64, I};

/// e^{-x/2} L_n(x) for n = 0..len by forward recurrence.
pub fn scaled_laguerre(x: f64, len: usize, out: &mut Vec<f64>) {
    out.clear();
    if len == 0 {
        return;
    }
    let e = (-0.5 * x).exp();
    out.push(e);
    if len == 1 {
        return;
    }
    out.push((1.0 - x) * e);
    for n in 1..len - 1 {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0 - x) * out[n] - nf * out[n - 1]) / (nf + 1.0);
        out.push(next);
    }
}

/// Node layout and coefficient extraction for a given scale and size.
#[derive(Debug, Clone)]
pub struct CayleyPlan {
    scale: f64,
    n: usize,
    nodes: Vec<f64>,
}

impl CayleyPlan {
    /// `n` must be even; `scale` sets where the nodes concentrate.
    pub fn new(scale: f64, n: usize) -> Self {
        assert!(n >= 2 && n % 2 == 0, "node count must be even");
        assert!(scale > 0.0);
        let nodes = (0..n)
            .map(|j| {
                let theta = -PI + 2.0 * PI * (j as f64 + 0.5) / n as f64;
                scale * (0.5 * theta).tan()
            })
            .collect();
        Self { scale, n, nodes }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Expansion coefficients of samples g(x_j) taken at [`Self::nodes`].
    pub fn coefficients(&self, samples: &[C64]) -> CayleyLine {
        assert_eq!(samples.len(), self.n);
        let s = self.scale;
        let w = (PI / s).sqrt();
        let mut h: Vec<C64> = samples
            .iter()
            .zip(&self.nodes)
            .map(|(g, &x)| g * C64::new(x, s) * w)
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(self.n);
        fft.process(&mut h);
        let half = self.n / 2;
        let nf = self.n as f64;
        let coef = |m: i64| {
            let idx = m.rem_euclid(self.n as i64) as usize;
            h[idx] * C64::from_polar(1.0 / nf, -PI * m as f64 / nf)
        };
        let pos = (0..half as i64).map(coef).collect();
        let neg = (0..half as i64).map(|m| coef(-m - 1)).collect();
        CayleyLine {
            scale: s,
            shift: 0.0,
            pos,
            neg,
        }
    }
}

/// A function on the real line represented by its Malmquist-Takenaka coefficients.
#[derive(Debug, Clone)]
pub struct CayleyLine {
    scale: f64,
    shift: f64,
    /// c_n for n >= 0.
    pos: Vec<C64>,
    /// c_{-m-1} for m >= 0.
    neg: Vec<C64>,
}

impl CayleyLine {
    /// Expands `f` after demodulating by `shift`, i.e. the transform of `f`
    /// at K is the transform of e^{-i shift x} f(x) at K - shift.
    pub fn from_fn(f: impl Fn(f64) -> C64, shift: f64, scale: f64, n: usize) -> Self {
        let plan = CayleyPlan::new(scale, n);
        let samples: Vec<C64> = plan.nodes().iter().map(|&x| f(x) * (-I * shift * x).exp()).collect();
        let mut line = plan.coefficients(&samples);
        line.shift = shift;
        line
    }

    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift = shift;
        self
    }

    /// Drops the negative-index part, which makes the transform vanish
    /// identically for K <= shift.
    pub fn one_sided(mut self) -> Self {
        self.neg.iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
        self
    }

    /// Largest coefficient magnitude on the negative side relative to the positive side.
    pub fn negative_weight(&self) -> f64 {
        let n = self.neg.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let p = self.pos.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if p == 0.0 {
            if n == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            n / p
        }
    }

    /// Value of the expansion at x.
    pub fn eval(&self, x: f64) -> C64 {
        let s = self.scale;
        let z = C64::new(x, -s) / C64::new(x, s);
        let base = (s / PI).sqrt() / C64::new(x, s);
        let mut acc = C64::new(0.0, 0.0);
        let mut zn = C64::new(1.0, 0.0);
        for c in &self.pos {
            acc += c * zn;
            zn *= z;
        }
        let zi = z.inv();
        let mut zm = zi;
        for c in &self.neg {
            acc += c * zm;
            zm *= zi;
        }
        acc * base * (I * self.shift * x).exp()
    }

    /// Fourier transform with the e^{-iKx} convention.
    pub fn transform(&self, k: f64) -> C64 {
        let kappa = k - self.shift;
        let pref = 2.0 * (PI * self.scale).sqrt();
        let mut buf = Vec::with_capacity(self.pos.len());
        let side = |coeffs: &[C64], buf: &mut Vec<f64>| {
            scaled_laguerre(2.0 * self.scale * kappa.abs(), coeffs.len(), buf);
            coeffs
                .iter()
                .zip(buf.iter())
                .fold(C64::new(0.0, 0.0), |acc, (c, l)| acc + c * *l)
        };
        if kappa > 0.0 {
            -I * pref * side(&self.pos, &mut buf)
        } else if kappa < 0.0 {
            I * pref * side(&self.neg, &mut buf)
        } else {
            let p = -I * pref * side(&self.pos, &mut buf);
            let n = I * pref * side(&self.neg, &mut buf);
            (p + n) * 0.5
        }
    }

    /// Row vector mapping node samples of g to transform values at `kappa`
    /// (already demodulated). Used to batch many transforms sharing the same plan.
    pub fn transform_row(plan: &CayleyPlan, kappa: f64) -> Vec<C64> {
        // Linear functional: samples -> h -> FFT -> coefficients -> transform.
        let n = plan.len();
        let s = plan.scale();
        let half = n / 2;
        let pref = 2.0 * (PI * s).sqrt();
        let mut lag = Vec::new();
        scaled_laguerre(2.0 * s * kappa.abs(), half, &mut lag);
        // weights on coefficients c_m, m in [-half, half)
        let mut coef_w = vec![C64::new(0.0, 0.0); n];
        for (m, l) in lag.iter().enumerate() {
            if kappa > 0.0 {
                coef_w[m] = -I * pref * *l;
            } else if kappa < 0.0 {
                coef_w[n - 1 - m] = I * pref * *l;
            } else {
                coef_w[m] = -I * pref * *l * 0.5;
                coef_w[n - 1 - m] = I * pref * *l * 0.5;
            }
        }
        // index i in coef_w corresponds to m = i for i < half, m = i - n otherwise
        let w = (PI / s).sqrt();
        let nf = n as f64;
        plan.nodes()
            .iter()
            .enumerate()
            .map(|(j, &x)| {
                let mut acc = C64::new(0.0, 0.0);
                for (i, cw) in coef_w.iter().enumerate() {
                    if cw.re == 0.0 && cw.im == 0.0 {
                        continue;
                    }
                    let m = if i < half { i as i64 } else { i as i64 - n as i64 };
                    // c_m = e^{-i pi m / n} / n * sum_j h_j e^{-2 pi i m j / n}
                    let phase = -PI * m as f64 / nf - 2.0 * PI * (m as f64) * (j as f64) / nf;
                    acc += cw * C64::from_polar(1.0 / nf, phase);
                }
                acc * C64::new(x, s) * w
            })
            .collect()
    }
}

/// Rectangle-rule transform of `f` truncated to [-half_window, half_window).
pub fn truncated_dft(f: impl Fn(f64) -> C64, half_window: f64, n: usize, k: &[f64]) -> Vec<C64> {
    let dx = 2.0 * half_window / n as f64;
    let samples: Vec<(f64, C64)> = (0..n)
        .map(|j| {
            let x = -half_window + (j as f64 + 0.5) * dx;
            (x, f(x))
        })
        .collect();
    k.iter()
        .map(|&kk| {
            samples
                .iter()
                .fold(C64::new(0.0, 0.0), |acc, (x, v)| acc + v * (-I * kk * x).exp())
                * dx
        })
        .collect()
}
