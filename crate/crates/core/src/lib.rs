pub mod born;
pub mod em;
pub mod error;
pub mod lemma_lab;
pub mod linalg;
pub mod medium;
pub mod quad;
pub mod spectral;
pub mod transfer;

pub use error::{Error, Result, Side};
