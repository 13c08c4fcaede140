//! Transfer-matrix formulation: momentum grids, the first-order kernel, the
//! second-order Dyson term, the amplitudes T+- and operator identities.

mod coefficients;
mod dyson;
mod grid;
mod kernel;
mod solve;

pub use coefficients::{
    delta_coefficients, material_coefficients, taylor_coefficients, vacuum_coefficients, CoefficientField, Coeffs,
    N_COEFF,
};
pub use dyson::{dyson_second_order_norm, ordered_integral, DysonReport};
pub use grid::{build_momentum_grid, MomentumGrid};
pub use kernel::{
    assemble_block, delta_h_block, firstorder_kernel, sandwich_identity_residual, transfer_first_order, KernelContext,
    KernelRoute, TransferKernel, DEFAULT_DIM_CAP,
};
pub use solve::{amplitude_from_t, solve_t, SolvePath, TSolution};
