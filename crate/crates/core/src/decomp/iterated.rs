//! Integrating again with the integral itself as the weighting.

use super::{sub_integral, IntegralResult};
use crate::domain::{Base, NNVector, Weighting};
use crate::error::{Error, Result};

/// The table `g -> I(g)` over every vector that can appear in a collection.
///
/// Only defined when that set is finite (unit-coefficient lists or explicit
/// collections).
pub fn induced_weighting(base: &Base) -> Result<Weighting> {
    let members = base.system.finite_members().ok_or_else(|| {
        Error::Unsupported("the induced weighting needs finitely many members".into())
    })?;
    let mut rows = Vec::with_capacity(members.len());
    for g in members {
        let r = sub_integral(base, &g)?;
        if !r.is_finite() {
            return Err(Error::Unsupported(format!(
                "the integral is not finite at {g}"
            )));
        }
        rows.push((g, r.value));
    }
    Ok(Weighting::Table(rows))
}

/// `I_(I, D)(x)` where `I = I_(A, D)`. Fails with [`Error::Boundary`] when the
/// integral vanishes on every member, since it is then no weighting function.
pub fn iterated_sub_integral(base: &Base, x: &NNVector) -> Result<IntegralResult> {
    let induced = induced_weighting(base)?;
    let next = Base::new(base.system.clone(), induced)?;
    sub_integral(&next, x)
}
