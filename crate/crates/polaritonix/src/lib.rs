//! Cavity QED with dense, disordered molecular ensembles.
//!
//! All frequencies and rates are dimensionless. A run picks one reference
//! rate (usually the cavity decay `kappa`) and expresses everything else in
//! its units.

pub mod collective;
pub mod darkstate;
pub mod dense;
pub mod error;
pub mod fret;
pub mod linalg;
pub mod macrostate;
pub mod model;
pub mod quad;
pub mod stats;
pub mod transmission;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
