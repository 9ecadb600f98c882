//! Numerical laboratory for coupled GUE minors, the edge-tacnode process and
//! double Aztec diamonds.

pub mod aztec;
pub mod cone;
pub mod density;
pub mod error;
pub mod gue;
pub mod kernel;
pub mod params;
pub mod quad;
pub mod rng;
pub mod spectrum;
pub mod stats;
pub mod suite;
pub mod special;

pub use error::{Error, Result};
pub use params::ModelParams;
