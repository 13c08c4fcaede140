//! One-dimensional x-envelopes and their Fourier transforms.

use std::f64::consts::PI;
use std::sync::OnceLock;

use errorfunctions::RealErrorFunctions;
use serde::{Deserialize, Serialize};

use crate::linalg::{re, C64, I};
use crate::spectral::CayleyLine;

/// Node count for whole-line spectral transforms.
pub const SPECTRAL_NODES: usize = 256;

/// Highest power of the envelope kept in coefficient series.
pub const MAX_POWER: usize = 16;

/// Shape of the x-dependence of a separable profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum XShape {
    /// e^{i alpha x} / (1 - i x/a)^{m+1}.
    Rational { a: f64, m: u32 },
    /// sqrt(pi) e^{i alpha x} e^{-x^2/a^2} [1 + erf(i x/a)].
    GaussErf { a: f64 },
    /// e^{-x^2/a^2} with no modulation (noncompliant control).
    Gaussian { a: f64 },
}

impl XShape {
    pub fn length(&self) -> f64 {
        match *self {
            XShape::Rational { a, .. } | XShape::GaussErf { a } | XShape::Gaussian { a } => a,
        }
    }

    /// Whether the envelope carries the e^{i alpha x} factor.
    pub fn is_modulated(&self) -> bool {
        !matches!(self, XShape::Gaussian { .. })
    }

    /// Envelope without the modulation factor.
    pub fn base(&self, x: f64) -> C64 {
        match *self {
            XShape::Rational { a, m } => C64::new(1.0, -x / a).powi(-(m as i32 + 1)),
            XShape::GaussErf { a } => {
                // sqrt(pi) e^{-t^2} erf(i t) = 2 i D(t)
                let t = x / a;
                C64::new(PI.sqrt() * (-t * t).exp(), 2.0 * t.dawson())
            }
            XShape::Gaussian { a } => re((-(x / a).powi(2)).exp()),
        }
    }

    /// w(x), including e^{i alpha x} for modulated shapes.
    pub fn eval(&self, x: f64, alpha: f64) -> C64 {
        if self.is_modulated() {
            self.base(x) * (I * alpha * x).exp()
        } else {
            self.base(x)
        }
    }

    /// sup_x |w(x)|.
    pub fn peak(&self) -> f64 {
        match self {
            XShape::Rational { .. } => 1.0,
            XShape::GaussErf { .. } => PI.sqrt(),
            XShape::Gaussian { .. } => 1.0,
        }
    }

    /// sup_K |FT w(K)|.
    pub fn spectral_peak(&self) -> f64 {
        match *self {
            XShape::Rational { a, m } => {
                if m == 0 {
                    2.0 * PI * a
                } else {
                    let mf = m as f64;
                    2.0 * PI * a * (mf.ln() * mf - mf - ln_factorial(m)).exp()
                }
            }
            XShape::GaussErf { a } => 2.0 * PI * a,
            XShape::Gaussian { a } => PI.sqrt() * a,
        }
    }
}

fn ln_factorial(m: u32) -> f64 {
    (2..=m).map(|i| (i as f64).ln()).sum()
}

/// (a/m!) (a kappa)^m e^{-a kappa} for kappa > 0, zero otherwise.
pub fn rational_u(a: f64, m: u32, kappa: f64) -> f64 {
    if kappa <= 0.0 {
        return 0.0;
    }
    let x = a * kappa;
    if m == 0 {
        return a * (-x).exp();
    }
    a * (m as f64 * x.ln() - x - ln_factorial(m)).exp()
}

/// Method used for the x-transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FourierRoute {
    /// Closed-form transforms.
    #[default]
    Analytic,
    /// Whole-line spectral transform of sampled real-space values.
    Spectral,
}

/// Transforms of the powers w^j, cached per envelope.
#[derive(Debug)]
pub struct ShapeTransforms {
    shape: XShape,
    alpha: f64,
    spectral: OnceLock<CayleyLine>,
    powers: Vec<OnceLock<CayleyLine>>,
}

impl ShapeTransforms {
    pub fn new(shape: XShape, alpha: f64) -> Self {
        Self {
            shape,
            alpha,
            spectral: OnceLock::new(),
            powers: (0..=MAX_POWER).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn shape(&self) -> XShape {
        self.shape
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// FT of w at K.
    pub fn transform(&self, k: f64, route: FourierRoute) -> C64 {
        match route {
            FourierRoute::Analytic => self.power_transform(1, k),
            FourierRoute::Spectral => self.spectral_line().transform(k),
        }
    }

    /// The spectral expansion of w sampled in real space (both sides kept).
    pub fn spectral_line(&self) -> &CayleyLine {
        self.spectral.get_or_init(|| {
            let (shape, alpha) = (self.shape, self.alpha);
            let shift = if shape.is_modulated() { alpha } else { 0.0 };
            CayleyLine::from_fn(|x| shape.eval(x, alpha), shift, shape.length(), SPECTRAL_NODES)
        })
    }

    /// FT of w^j at K (j >= 1).
    pub fn power_transform(&self, j: usize, k: f64) -> C64 {
        assert!(j >= 1 && j <= MAX_POWER);
        let jf = j as f64;
        match self.shape {
            XShape::Rational { a, m } => {
                let mj = j as u32 * (m + 1) - 1;
                re(2.0 * PI * rational_u(a, mj, k - jf * self.alpha))
            }
            XShape::GaussErf { a } => {
                let kappa = k - jf * self.alpha;
                if kappa <= 0.0 {
                    return C64::new(0.0, 0.0);
                }
                if j == 1 {
                    return re(2.0 * PI * a * (-a * a * kappa * kappa / 4.0).exp());
                }
                let line = self.powers[j].get_or_init(|| {
                    let shape = self.shape;
                    // the demodulated envelope is analytic in the upper half plane
                    CayleyLine::from_fn(|x| shape.base(x).powi(j as i32), 0.0, a, SPECTRAL_NODES).one_sided()
                });
                line.transform(kappa)
            }
            XShape::Gaussian { a } => re((PI / jf).sqrt() * a * (-a * a * k * k / (4.0 * jf)).exp()),
        }
    }

    /// Lower edge of the support of FT(w^j), if one-sided.
    pub fn power_support_edge(&self, j: usize) -> Option<f64> {
        if self.shape.is_modulated() {
            Some(j as f64 * self.alpha)
        } else {
            None
        }
    }
}
