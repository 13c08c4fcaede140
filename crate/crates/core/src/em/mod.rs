//! Electromagnetic building blocks in the transverse-momentum representation.
//!
//! The field is carried as the four-component vector (E_x, E_y, H_x, H_y) and
//! z plays the role of time. In vacuum the generator is the 4x4 matrix H0(p)
//! whose spectral projectors split every state into parts moving toward +z
//! and toward -z.

mod detector;
mod free;
mod incident;
mod momentum;

pub use detector::{xi_contract, DetectorDirection};
pub use free::{free_block, free_evolution, free_hamiltonian, projector, projector_pair, projector_with, Mode};
pub use incident::{direction, incident_state, incident_state_residual, IncidentWave, Polarization};
pub use momentum::{varpi, varpi_guarded, varpi_unchecked, MomentumPoint, DEFAULT_EPS_ANN};
