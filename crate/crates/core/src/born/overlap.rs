//! Feasibility of momentum chains through a one-sided spectrum.

use serde::{Deserialize, Serialize};

use crate::em::{DetectorDirection, IncidentWave};

/// Where the intermediate x-momenta of an n-link chain can sit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapRegion {
    pub n: usize,
    /// Open interval for the x-momentum after link j, j = 1..n-1.
    pub links: Vec<(f64, f64)>,
    /// k_{s,x} - k_{i,x} - n alpha; the chain closes only when this is positive.
    pub slack: f64,
    /// Volume of the simplex of admissible intermediate x-momenta.
    pub measure: f64,
    pub empty: bool,
}

/// Each link raises the x-momentum by more than alpha, so a chain from k_i to
/// k_s needs k_{s,x} - k_{i,x} > n alpha.
pub fn support_overlap(alpha: f64, w: &IncidentWave, d: &DetectorDirection, n: usize) -> OverlapRegion {
    assert!(n >= 1, "chain order must be positive");
    let kix = w.wave_vector().x;
    let ksx = d.scattered_vector(w.k()).x;
    let slack = ksx - kix - n as f64 * alpha;
    let links = (1..n)
        .map(|j| (kix + j as f64 * alpha, ksx - (n - j) as f64 * alpha))
        .collect();
    let empty = slack <= 0.0;
    let measure = if empty {
        0.0
    } else {
        let fact: f64 = (1..n).map(|i| i as f64).product();
        slack.powi(n as i32 - 1) / fact
    };
    OverlapRegion {
        n,
        links,
        slack,
        measure,
        empty,
    }
}

/// Whether some incident/detector pair at wavenumber k closes an n-link chain.
pub fn some_chain_closes(alpha: f64, k: f64, n: usize) -> bool {
    2.0 * k > n as f64 * alpha
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em::Polarization;
    use std::f64::consts::PI;

    #[test]
    fn documented_cases() {
        let w = IncidentWave::linear(0.8, 0.0, 0.0, Polarization::Te).unwrap();
        let side = DetectorDirection::new(PI / 2.0, 0.0);
        assert!(support_overlap(1.0, &w, &side, 1).empty);
        assert!(support_overlap(1.0, &w, &side, 2).empty);
        assert!(!some_chain_closes(1.0, 0.8, 2));
        assert!(!some_chain_closes(1.0, 0.5, 1));
        assert!(some_chain_closes(1.0, 0.8, 1));

        let w = IncidentWave::linear(0.8, 1.4, PI, Polarization::Te).unwrap();
        let d = DetectorDirection::new(1.4, 0.0);
        let one = support_overlap(1.0, &w, &d, 1);
        assert!(!one.empty && one.slack > 0.0);
        let two = support_overlap(1.0, &w, &d, 2);
        assert!(two.empty);
        assert!(two.links[0].0 >= two.links[0].1);
    }

    #[test]
    fn measure_of_open_chain() {
        let w = IncidentWave::linear(3.0, 1.4, PI, Polarization::Te).unwrap();
        let d = DetectorDirection::new(1.4, 0.0);
        let r = support_overlap(1.0, &w, &d, 3);
        assert!(!r.empty);
        assert!((r.measure - r.slack * r.slack / 2.0).abs() < 1e-14);
    }
}
