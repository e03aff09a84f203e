//! Sub- and super-decomposition integrals of nonnegative vectors over finite
//! ground sets, with the classical capacity integrals (Choquet, Shilkret,
//! Sugeno, PAN, concave, convex) as special cases.

pub mod checks;
pub mod classical;
pub mod decomp;
pub mod domain;
pub mod error;
pub mod lp;
pub mod oracle;

#[cfg(test)]
mod testutil;

pub use decomp::{sub_integral, super_integral, Direction, IntegralResult, Status};
pub use domain::{Base, Capacity, NNVector, Weighting};
pub use error::{Error, Result};
