//! Planar quasiconformal distortion, p-moduli of curve families and ring
//! condenser capacities, with numeric checks of modulus inequalities for
//! mappings of finite distortion.

pub mod calculus;
pub mod campaign;
pub mod error;
pub mod geometry;
pub mod inequality;
pub mod modulus;
pub mod quad;
pub mod zoo;

pub use error::{Error, Result};
