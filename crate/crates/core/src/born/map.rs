//! Amplitude maps, their CSV/JSON export and the far field they describe.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::amplitude::{first_born_amplitude, second_born_amplitude, F2Quadrature};
use crate::em::{DetectorDirection, IncidentWave};
use crate::error::{Error, Result};
use crate::linalg::{norm3, re, CVec3, Vec3, C64, I};
use crate::medium::MediumProfile;

/// Which Born terms an amplitude includes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BornOrder {
    /// F1 only.
    First,
    /// F1 + F2.
    Second,
}

impl BornOrder {
    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(BornOrder::First),
            2 => Ok(BornOrder::Second),
            _ => Err(Error::InvalidParameter(format!("Born order must be 1 or 2, got {n}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeEntry {
    pub direction: DetectorDirection,
    pub f: CVec3,
    /// The second-order part, when computed.
    pub f2: Option<CVec3>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeMap {
    pub incident: IncidentWave,
    pub order: BornOrder,
    pub entries: Vec<AmplitudeEntry>,
}

impl AmplitudeMap {
    pub fn compute(
        medium: &MediumProfile,
        incident: &IncidentWave,
        directions: &[DetectorDirection],
        order: BornOrder,
        quad: &F2Quadrature,
    ) -> Result<Self> {
        let entries = directions
            .iter()
            .map(|d| {
                let f1 = first_born_amplitude(medium, incident, d)?;
                let f2 = match order {
                    BornOrder::First => None,
                    BornOrder::Second => Some(second_born_amplitude(medium, incident, d, quad)?),
                };
                Ok(AmplitudeEntry {
                    direction: *d,
                    f: f1 + f2.unwrap_or_else(CVec3::zeros),
                    f2,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            incident: incident.clone(),
            order,
            entries,
        })
    }

    pub fn max_norm(&self) -> f64 {
        self.entries.iter().map(|e| norm3(&e.f)).fold(0.0, f64::max)
    }

    /// max |F2| / max |F1| over the map (zero when F1 vanishes everywhere and F2 does too).
    pub fn second_order_ratio(&self) -> Option<f64> {
        let f2 = self
            .entries
            .iter()
            .map(|e| e.f2.map(|v| norm3(&v)))
            .collect::<Option<Vec<_>>>()?;
        let m2 = f2.iter().cloned().fold(0.0, f64::max);
        let m1 = self
            .entries
            .iter()
            .map(|e| norm3(&(e.f - e.f2.unwrap_or_else(CVec3::zeros))))
            .fold(0.0, f64::max);
        Some(if m1 > 0.0 {
            m2 / m1
        } else if m2 > 0.0 {
            f64::INFINITY
        } else {
            0.0
        })
    }

    /// Entry whose direction is closest to `d`.
    pub fn lookup(&self, d: &DetectorDirection) -> Option<&AmplitudeEntry> {
        let u = d.unit();
        self.entries
            .iter()
            .max_by(|a, b| a.direction.unit().dot(&u).total_cmp(&b.direction.unit().dot(&u)))
    }

    /// CSV with columns theta,phi,ReFx,ImFx,ReFy,ImFy,ReFz,ImFz.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        self.write_csv_scaled(out, 1.0)
    }

    /// As [`Self::write_csv`], with amplitudes multiplied by `length_unit`
    /// (F has the dimension of a length).
    pub fn write_csv_scaled<W: Write>(&self, out: W, length_unit: f64) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(["theta", "phi", "ReFx", "ImFx", "ReFy", "ImFy", "ReFz", "ImFz"])
            .map_err(csv_err)?;
        for e in &self.entries {
            let f = e.f * re(length_unit);
            let rec = [
                e.direction.theta,
                e.direction.phi,
                f.x.re,
                f.x.im,
                f.y.re,
                f.y.im,
                f.z.re,
                f.z.im,
            ];
            w.write_record(rec.iter().map(|v| format_number(*v))).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Parameters that accompany the CSV.
    pub fn sidecar(&self) -> Sidecar {
        let e = self.incident.polarization();
        Sidecar {
            incident: IncidentRecord {
                k: self.incident.k(),
                theta0: self.incident.theta0(),
                phi0: self.incident.phi0(),
                polarization: [[e.x.re, e.x.im], [e.y.re, e.y.im], [e.z.re, e.z.im]],
            },
            order: self.order,
            entries: self.entries.len(),
            max_abs_f: self.max_norm(),
            second_order_ratio: self.second_order_ratio(),
            tolerances: serde_json::Map::new(),
        }
    }
}

/// Shortest round-trip decimal form, locale independent.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v:e}")
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncidentRecord {
    pub k: f64,
    pub theta0: f64,
    pub phi0: f64,
    pub polarization: [[f64; 2]; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub incident: IncidentRecord,
    pub order: BornOrder,
    pub entries: usize,
    pub max_abs_f: f64,
    pub second_order_ratio: Option<f64>,
    pub tolerances: serde_json::Map<String, serde_json::Value>,
}

/// E_s = E0 e^{i(k r - omega t)} F / r.
pub fn scattered_field(f: &CVec3, e0: C64, k: f64, r: &Vec3, t: f64, omega: f64) -> Result<CVec3> {
    let rn = r.norm();
    if rn == 0.0 {
        return Err(Error::OriginEvaluation);
    }
    let phase = (I * (k * rn - omega * t)).exp();
    Ok(f * (e0 * phase / rn))
}
