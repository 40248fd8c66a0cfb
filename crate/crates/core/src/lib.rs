//! Four-level PT-symmetric parabolic Landau-Zener dynamics.

pub mod model;
pub mod series;
pub mod specfun;
pub mod heun_integrals;
pub mod oracle;
pub mod perturbation;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
