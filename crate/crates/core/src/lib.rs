//! Simulation and analysis of diabatic iSWAP/CPHASE-type gates between two
//! frequency-tunable, capacitively coupled transmons.

pub mod config;
pub mod device;
pub mod error;
pub mod io;
pub mod landscape;
pub mod linalg;
pub mod propagator;
pub mod pulse;
pub mod unitary_fit;
pub mod xeb;

pub use error::{Error, Result};
