use thiserror::Error;

/// Errors raised by the scattering library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("momentum |p| = {p_norm} lies within the annulus guard of the circle |p| = k = {k}")]
    SingularCircle { p_norm: f64, k: f64 },

    #[error("grazing incidence: cos(theta0) = {cos_theta0} (the incident wave must propagate along +z or -z)")]
    GrazingIncidence { cos_theta0: f64 },

    #[error("invalid polarization: {0}")]
    InvalidPolarization(String),

    #[error("detector side mismatch: amplitude belongs to the {found} side, detector is on the {expected} side")]
    SideMismatch { expected: Side, found: Side },

    #[error("window too small: boundary magnitude {boundary} exceeds tolerance {tolerance}")]
    WindowTooSmall { boundary: f64, tolerance: f64 },

    #[error("quadrature did not converge: estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    QuadratureNotConverged { estimate: f64, tolerance: f64 },

    #[error("bounds condition violated: min Re = {min_re}, max |.| = {max_abs}")]
    BoundsViolated { min_re: f64, max_abs: f64 },

    #[error("scattered field requested at the origin")]
    OriginEvaluation,

    #[error("invalid grid resolution: {0}")]
    InvalidResolution(String),

    #[error("kernel of dimension {dim} exceeds the memory cap of {cap} entries")]
    MemoryGuard { dim: usize, cap: usize },

    #[error("linear system is singular")]
    SingularSystem,

    #[error("incident momentum lies outside the propagating disk")]
    IncidenceOutsideDisk,

    #[error("detector direction too close to the disk rim (|k_s|/k = {ratio})")]
    DirectionOnRim { ratio: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

/// Which half-space a detector (or an amplitude T+/T-) belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Detector on the plane z = -inf (cos(theta) < 0).
    Left,
    /// Detector on the plane z = +inf (cos(theta) > 0).
    Right,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Left => write!(f, "left"),
            Side::Right => write!(f, "right"),
        }
    }
}
