//! Toy-grid oracles for the support lemmas behind the invisibility argument:
//! one-sided spectra on a line and projected convolution chains on a plane.

mod line;
mod plane;

pub use line::{
    bounded_product_check, make_salpha_sample, product_support_check, reciprocal_support_check,
    HalfLineSpectrumFunction, ReciprocalCheck, SampleShape, SeriesGap, SupportCheck, LINE_DP, LINE_POINTS,
};
pub use plane::{
    bounded_multiplier, chain_operator_residual, convolution_support_check, one_sided_symbol, ChainReport, Convolver,
    PlaneField, PLANE_DP, PLANE_POINTS,
};

/// Relative magnitude below which a spectrum counts as vanishing.
pub const LEAK_TOL: f64 = 1e-10;
