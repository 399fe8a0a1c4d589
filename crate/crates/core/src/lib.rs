//! Simulation engine for microcomb-based continuous-variable cluster-state
//! photonics: Gaussian graph calculus, ring dispersion design, mean-field
//! comb dynamics, squeezing spectra, cluster-state assembly, and
//! measurement-based gate compilation.

pub mod cluster;
pub mod constants;
pub mod dispersion;
pub mod error;
pub mod gaussian;
pub mod lle;
pub mod spectra;

pub use error::{CoreError, Result};
