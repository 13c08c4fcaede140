//! Run configuration: medium, incidence, grid, suites and tolerances.

use std::path::Path;

use exactborn::em::{IncidentWave, Polarization};
use exactborn::medium::{MediumProfile, MediumSpec};
use exactborn::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolarizationSpec {
    Te,
    Tm,
}

impl From<PolarizationSpec> for Polarization {
    fn from(p: PolarizationSpec) -> Self {
        match p {
            PolarizationSpec::Te => Polarization::Te,
            PolarizationSpec::Tm => Polarization::Tm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidentSpec {
    pub k_over_alpha: f64,
    pub theta0_deg: f64,
    pub phi0_deg: f64,
    pub polarization: PolarizationSpec,
}

impl Default for IncidentSpec {
    fn default() -> Self {
        Self {
            k_over_alpha: 0.8,
            theta0_deg: 0.0,
            phi0_deg: 0.0,
            polarization: PolarizationSpec::Te,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Disk resolution of the lazily evaluated kernel (route check, transfer export).
    pub n_disk: usize,
    /// Disk resolution of the dense kernel (operator identity).
    pub n_disk_dense: usize,
    pub p_max_over_k: f64,
    pub eps_ann: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_disk: 32,
            n_disk_dense: 12,
            p_max_over_k: 2.5,
            eps_ann: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Projector,
    Lemma,
    Support,
    Invisibility,
    Identity,
    Route,
    Exactness,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Projector,
        Suite::Lemma,
        Suite::Support,
        Suite::Invisibility,
        Suite::Identity,
        Suite::Route,
        Suite::Exactness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Projector => "projector",
            Suite::Lemma => "lemma",
            Suite::Support => "support",
            Suite::Invisibility => "invisibility",
            Suite::Identity => "identity",
            Suite::Route => "route",
            Suite::Exactness => "exactness",
        }
    }

    /// Suites whose outcome depends on the medium being compliant.
    pub fn needs_compliance(self) -> bool {
        matches!(
            self,
            Suite::Support | Suite::Invisibility | Suite::Identity | Suite::Exactness
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub projector: f64,
    pub lemma: f64,
    pub support: f64,
    /// Relative to peak|eta~| k^2/4pi.
    pub invisibility: f64,
    /// Relative to ||K||_max^2.
    pub identity: f64,
    pub route: f64,
    /// max|F2| / max|F1|.
    pub exactness: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            projector: 1e-12,
            lemma: 1e-10,
            support: 1e-8,
            invisibility: 1e-8,
            identity: 1e-6,
            route: 5e-3,
            exactness: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    /// Detector directions in amplitude maps and the route check.
    pub directions: usize,
    /// Incidence/detector pairs in the invisibility and exactness suites.
    pub pairs: usize,
    /// Random momenta in the projector suite.
    pub projector_samples: usize,
    /// Panels per dimension of the second-order rule.
    pub f2_panels: usize,
    /// Samples along x in profile exports.
    pub profile_samples: usize,
    /// k/alpha values for the sweep command.
    pub sweep_k_over_alpha: Vec<f64>,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        Self {
            directions: 16,
            pairs: 16,
            projector_samples: 10_000,
            f2_panels: 32,
            profile_samples: 401,
            sweep_k_over_alpha: vec![0.3, 0.4, 0.5, 0.51, 0.6, 0.8, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub medium: MediumSpec,
    #[serde(default)]
    pub incident: IncidentSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "all_suites")]
    pub suites: Vec<Suite>,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub sampling: SamplingSpec,
    #[serde(default)]
    pub seed: u64,
}

fn all_suites() -> Vec<Suite> {
    Suite::ALL.to_vec()
}

impl RunConfig {
    pub fn new(medium: MediumSpec) -> Self {
        Self {
            medium,
            incident: IncidentSpec::default(),
            grid: GridSpec::default(),
            suites: all_suites(),
            output: None,
            tolerances: Tolerances::default(),
            sampling: SamplingSpec::default(),
            seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.incident.k_over_alpha > 0.0) {
            return bad(format!(
                "k_over_alpha must be positive, got {}",
                self.incident.k_over_alpha
            ));
        }
        if self.grid.n_disk < 8 || self.grid.n_disk_dense < 8 {
            return bad(format!("disk resolutions must be at least 8, got {:?}", self.grid));
        }
        if !(self.grid.p_max_over_k > 1.0) {
            return bad("p_max_over_k must exceed 1".into());
        }
        if !(self.grid.eps_ann > 0.0 && self.grid.eps_ann < 0.5) {
            return bad(format!("eps_ann must lie in (0, 0.5), got {}", self.grid.eps_ann));
        }
        let s = &self.sampling;
        if s.directions == 0 || s.pairs == 0 || s.projector_samples == 0 || s.profile_samples < 2 {
            return bad("sampling counts must be positive".into());
        }
        if s.f2_panels < 4 {
            return bad(format!("f2_panels must be at least 4, got {}", s.f2_panels));
        }
        if s.sweep_k_over_alpha.iter().any(|k| !(*k > 0.0)) {
            return bad("sweep wavenumbers must be positive".into());
        }
        if !(self.medium.alpha > 0.0) {
            return bad("alpha must be positive".into());
        }
        Ok(())
    }

    /// The medium, with grid paths resolved against `base`.
    pub fn build_medium(&self, base: Option<&Path>) -> Result<MediumProfile> {
        self.medium.build(base)
    }

    /// Wavenumber in the library's units (alpha = 1 for the reference media).
    pub fn k(&self) -> f64 {
        self.incident.k_over_alpha * self.medium.alpha
    }

    pub fn incident_wave(&self) -> Result<IncidentWave> {
        IncidentWave::linear(
            self.k(),
            self.incident.theta0_deg.to_radians(),
            self.incident.phi0_deg.to_radians(),
            self.incident.polarization.into(),
        )
    }
}
