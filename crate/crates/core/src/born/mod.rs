//! Born-series amplitudes: closed-form F1, quadrature F2, support overlap,
//! invisibility and scaling reports.

mod amplitude;
mod directions;
mod map;
mod overlap;
mod reports;

pub use amplitude::{
    first_born_amplitude, second_born_amplitude, second_born_self_convergence, F2Quadrature, Regularization,
    MAGNETIC_SIGN,
};
pub use directions::{direction_pairs, fibonacci_hemisphere, fibonacci_sphere, DirectionPair};
pub use map::{format_number, scattered_field, AmplitudeEntry, AmplitudeMap, BornOrder, IncidentRecord, Sidecar};
pub use overlap::{some_chain_closes, support_overlap, OverlapRegion};
pub use reports::{invisibility_report, scaling_check, InvisibilityReport, ScalingReport, INVISIBILITY_REL};
