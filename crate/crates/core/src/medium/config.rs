//! JSON description of a medium.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FourierRoute, MediumProfile, SampledGrid, TransverseBox, XShape};
use crate::error::{Error, Result};
use crate::linalg::{c, CMat3, Vec2, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Vacuum,
    Rational,
    Gausserf,
    Gaussian,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum FootprintSpec {
    Box { zeta: [f64; 2], ly: f64, lz: f64 },
}

/// Constant tensor written as rows of [re, im] pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorSpec(pub [[[f64; 2]; 3]; 3]);

impl TensorSpec {
    pub fn to_matrix(&self) -> CMat3 {
        CMat3::from_fn(|i, j| c(self.0[i][j][0], self.0[i][j][1]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediumSpec {
    #[serde(rename = "type")]
    pub kind: ProfileKind,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_exp: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub footprint: Option<FootprintSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slab: Option<[f64; 2]>,
    /// Binary grid file for sampled profiles, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_tensor: Option<TensorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_tensor: Option<TensorSpec>,
    /// Direction e, in the x-y plane, along which the support is one-sided.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_direction: Option<[f64; 2]>,
    #[serde(default)]
    pub route: FourierRoute,
}

fn one() -> f64 {
    1.0
}

impl MediumSpec {
    /// The reference rational profile (zeta = 0.01, m = 1, a = 2, ly = 3, lz = 4).
    pub fn reference() -> Self {
        Self {
            kind: ProfileKind::Rational,
            alpha: 1.0,
            a: Some(2.0),
            m_exp: Some(1),
            footprint: Some(FootprintSpec::Box {
                zeta: [0.01, 0.0],
                ly: 3.0,
                lz: 4.0,
            }),
            slab: Some([-2.0, 2.0]),
            path: None,
            eps_tensor: None,
            mu_tensor: None,
            support_direction: None,
            route: FourierRoute::Analytic,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("medium description serializes")
    }

    /// Builds the profile; `base` resolves relative grid paths.
    pub fn build(&self, base: Option<&Path>) -> Result<MediumProfile> {
        let mut profile = match self.kind {
            ProfileKind::Vacuum => MediumProfile::vacuum(),
            ProfileKind::Sampled => {
                let rel = self
                    .path
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameter("sampled profile needs a path".into()))?;
                let path = match base {
                    Some(b) => b.join(rel),
                    None => rel.into(),
                };
                let grid = SampledGrid::load(&path)?;
                let slab = self.slab.map(|s| (s[0], s[1])).unwrap_or_else(|| grid.z_range());
                MediumProfile::sampled(grid, slab)?
            }
            ProfileKind::Rational | ProfileKind::Gausserf | ProfileKind::Gaussian => {
                let a = self
                    .a
                    .ok_or_else(|| Error::InvalidParameter("envelope length a is required".into()))?;
                let shape = match self.kind {
                    ProfileKind::Rational => XShape::Rational {
                        a,
                        m: self
                            .m_exp
                            .ok_or_else(|| Error::InvalidParameter("m_exp is required".into()))?,
                    },
                    ProfileKind::Gausserf => XShape::GaussErf { a },
                    _ => XShape::Gaussian { a },
                };
                let Some(FootprintSpec::Box { zeta, ly, lz }) = self.footprint else {
                    return Err(Error::InvalidParameter("footprint is required".into()));
                };
                let fp = TransverseBox::new(C64::new(zeta[0], zeta[1]), ly, lz)?;
                let eps = self
                    .eps_tensor
                    .as_ref()
                    .map(TensorSpec::to_matrix)
                    .unwrap_or_else(CMat3::identity);
                let mu = self
                    .mu_tensor
                    .as_ref()
                    .map(TensorSpec::to_matrix)
                    .unwrap_or_else(CMat3::zeros);
                let p = MediumProfile::separable_tensor(shape, self.alpha, fp, eps, mu)?;
                match self.slab {
                    Some(s) => p.with_slab((s[0], s[1]))?,
                    None => p,
                }
            }
        };
        if let Some(e) = self.support_direction {
            let e = Vec2::new(e[0], e[1]);
            // the profile's own x axis is mapped onto e
            profile = profile.rotate_to_x(&Vec2::new(e.x, -e.y))?;
        }
        Ok(profile.with_route(self.route))
    }
}
