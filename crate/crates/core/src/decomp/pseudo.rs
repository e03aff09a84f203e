//! Integrals with `max` in place of `+`, and the one-dimensional knapsack.

use super::finite::member_value;
use super::{IntegralResult, Term};
use crate::domain::{
    indicator, Base, CoefficientDomain, Generators, NNVector, SubsetMask, Weighting, EPS,
};
use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram, LpStatus, Relation, Sense};

/// `sup max_j A(y_j)` over feasible collections: the best single member below `x`.
pub fn max_pseudo_integral(base: &Base, x: &NNVector) -> Result<IntegralResult> {
    crate::domain::check_len(base.n(), x.len())?;
    let w = &base.weighting;
    let n = base.n();
    let mut best: Option<Term> = None;
    let mut consider = |t: Term| {
        if t.contribution() > best.as_ref().map_or(0.0, Term::contribution) + EPS {
            best = Some(t);
        }
    };
    match &base.system.generators {
        Generators::Collections(collections) => {
            for c in collections {
                let mut sum = vec![0.0; n];
                for y in c {
                    sum.iter_mut().zip(y.iter()).for_each(|(s, v)| *s += v);
                }
                if sum.iter().zip(x.iter()).any(|(s, v)| *s > v + EPS) {
                    continue;
                }
                for y in c {
                    let weight = w
                        .eval(y)
                        .ok_or_else(|| Error::UndefinedWeight(y.as_slice().to_vec()))?;
                    consider(Term {
                        generator: y.clone(),
                        coefficient: 1.0,
                        weight,
                    });
                }
            }
        }
        Generators::BoxGrid { upper, .. } => {
            let cap = upper.unwrap_or(f64::INFINITY);
            let y = NNVector::new(x.iter().map(|v| v.min(cap)).collect())?;
            let weight = w
                .eval(&y)
                .ok_or_else(|| Error::UndefinedWeight(y.as_slice().to_vec()))?;
            consider(Term {
                generator: y,
                coefficient: 1.0,
                weight,
            });
        }
        Generators::List(_) | Generators::Indicators => {
            let gens: Vec<NNVector> = match &base.system.generators {
                Generators::List(list) => list.clone(),
                _ => (1..(1u32 << n))
                    .map(|m| indicator(SubsetMask(m), 1.0, n))
                    .collect(),
            };
            for g in gens.into_iter().filter(|g| !g.is_zero()) {
                // largest multiple of g below x
                let ratio = g
                    .iter()
                    .zip(x.iter())
                    .filter(|(gi, _)| **gi > 0.0)
                    .map(|(gi, xi)| xi / gi)
                    .fold(f64::INFINITY, f64::min);
                let alpha = match base.system.coefficients {
                    CoefficientDomain::Unit => (ratio >= 1.0 - EPS) as u8 as f64,
                    CoefficientDomain::NonNegInt => (ratio + EPS).floor(),
                    CoefficientDomain::NonNegReal => ratio,
                };
                if alpha <= 0.0 {
                    continue;
                }
                let value = member_value(w, &g, alpha)
                    .ok_or_else(|| Error::UndefinedWeight(g.scaled(alpha).into_inner()))?;
                let term = if w.is_homogeneous() {
                    Term {
                        weight: value / alpha,
                        generator: g,
                        coefficient: alpha,
                    }
                } else {
                    Term {
                        generator: g.scaled(alpha),
                        coefficient: 1.0,
                        weight: value,
                    }
                };
                consider(term);
            }
        }
    }
    Ok(match best {
        Some(t) => IntegralResult::exact(t.contribution(), vec![t]),
        None => IntegralResult::exact(0.0, Vec::new()),
    })
}

/// Largest subset sum of `weights` not exceeding `cap` (each item used at most once).
pub fn knapsack_integral(weights: &[f64], cap: f64) -> Result<IntegralResult> {
    if !(cap.is_finite() && cap >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "capacity must be finite and nonnegative, got {cap}"
        )));
    }
    if let Some((index, &value)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !(w.is_finite() && **w > 0.0))
    {
        return Err(Error::InvalidEntry { index, value });
    }
    let items: Vec<usize> = (0..weights.len())
        .filter(|&i| weights[i] <= cap + EPS)
        .collect();
    if items.is_empty() {
        return Ok(IntegralResult::exact(0.0, Vec::new()));
    }
    let w: Vec<f64> = items.iter().map(|&i| weights[i]).collect();
    let mut program = LinearProgram::new(Sense::Maximize, w.clone());
    program.constrain(w.clone(), Relation::Le, cap);
    for j in 0..w.len() {
        program.bound(j, Relation::Le, 1.0);
    }
    let sol = lp::bnb_solve(&program.all_integer())?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::BudgetExceeded => {
            return Err(Error::BudgetExceeded(lp::BnbOptions::default().node_budget))
        }
        other => {
            unreachable!("the empty selection is feasible and the sum is bounded, got {other:?}")
        }
    }
    let witness: Vec<Term> = items
        .iter()
        .zip(&sol.values)
        .filter(|(_, &z)| z > 0.5)
        .map(|(&i, _)| Term {
            generator: NNVector::new(vec![weights[i]]).expect("positive"),
            coefficient: 1.0,
            weight: weights[i],
        })
        .collect();
    let value = witness.iter().map(Term::contribution).sum();
    Ok(IntegralResult::exact(value, witness))
}

/// Items as a one-dimensional single-item system: the max pseudo-integral of
/// this base is `max { w_i <= cap }`.
pub fn knapsack_base(weights: &[f64]) -> Result<Base> {
    let gens: Vec<NNVector> = weights
        .iter()
        .map(|&w| NNVector::new(vec![w]))
        .collect::<Result<_>>()?;
    let table = gens.iter().map(|g| (g.clone(), g[0])).collect();
    Base::new(
        crate::domain::DecompSystem::complete(gens, CoefficientDomain::Unit)?,
        Weighting::Table(table),
    )
}
