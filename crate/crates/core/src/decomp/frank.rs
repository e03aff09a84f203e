//! Residuals of `I^(A_sup)(x, y) + I_(A_sub)(x, y) = x + y` over a box grid.

use super::{integral_batch, Direction, SolveOptions};
use crate::domain::{
    Base, ClosedForm, CoefficientDomain, CollectionConstraint, DecompSystem, Generators, NNVector,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FrankRow {
    pub x: f64,
    pub y: f64,
    pub super_value: f64,
    pub sub_value: f64,
    /// `|super + sub - (x + y)|`
    pub residual: f64,
    /// Closed form of the probabilistic-sum cover, when that is the super weighting.
    pub reference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrankReport {
    pub rows: Vec<FrankRow>,
    pub max_residual: f64,
    /// Largest resolution gap reported by either grid solve.
    pub max_error_bound: f64,
}

/// `(k + 1)(x + y - k) - xy` on `[k, k + 1]^2`, `max(x, y)` elsewhere: the
/// cheapest cover of `(x, y)` by pieces of the unit square under `x + y - xy`.
pub fn probabilistic_sum_super_closed_form(x: f64, y: f64) -> f64 {
    let k = (x.max(y).ceil() - 1.0).max(0.0);
    if x.min(y) >= k {
        (k + 1.0) * (x + y - k) - x * y
    } else {
        x.max(y)
    }
}

/// Both integrals over the grid of `[0, upper]^2` with spacing `step`, at every sample.
pub fn frank_check(
    a_sup: &ClosedForm,
    a_sub: &ClosedForm,
    upper: f64,
    step: f64,
    samples: &[(f64, f64)],
) -> Result<FrankReport> {
    let points = samples
        .iter()
        .map(|&(x, y)| NNVector::new(vec![x, y]))
        .collect::<Result<Vec<_>>>()?;
    let base = |form: &ClosedForm| -> Result<Base> {
        let system = DecompSystem::new(
            2,
            Generators::BoxGrid {
                upper: Some(upper),
                step,
            },
            CoefficientDomain::Unit,
            CollectionConstraint::Any,
        )?;
        Base::new(system, crate::domain::Weighting::ClosedForm(form.clone()))
    };
    let opts = SolveOptions::default();
    let sup = integral_batch(&base(a_sup)?, &points, Direction::Super, &opts)?;
    let sub = integral_batch(&base(a_sub)?, &points, Direction::Sub, &opts)?;
    let mut rows = Vec::with_capacity(samples.len());
    let mut max_residual: f64 = 0.0;
    let mut max_error_bound: f64 = 0.0;
    for ((&(x, y), s), t) in samples.iter().zip(&sup).zip(&sub) {
        if !s.is_finite() || !t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "({x}, {y}) has no finite value on this box"
            )));
        }
        let residual = (s.value + t.value - (x + y)).abs();
        max_residual = max_residual.max(residual);
        max_error_bound = max_error_bound.max(s.error_bound()).max(t.error_bound());
        let reference = (*a_sup == ClosedForm::ProbabilisticSum && upper == 1.0)
            .then(|| probabilistic_sum_super_closed_form(x, y));
        rows.push(FrankRow {
            x,
            y,
            super_value: s.value,
            sub_value: t.value,
            residual,
            reference,
        });
    }
    Ok(FrankReport {
        rows,
        max_residual,
        max_error_bound,
    })
}
