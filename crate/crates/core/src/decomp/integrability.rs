//! Is the sub-decomposition integral finite at `x`?

use super::{DivergenceStep, SolveOptions};
use crate::domain::{Base, ClosedForm, Generators, NNVector, Weighting};

#[derive(Debug, Clone, PartialEq)]
pub enum YesReason {
    /// Finitely many generators, each scaled at most linearly.
    FiniteSystem,
    /// `A(y) <= c * max_i y_i`.
    DominatedByMax(f64),
    /// `A(y) <= sum_i w_i y_i`.
    DominatedBySum(Vec<f64>),
    /// `A(k * 1_S) / k` stays below `bound` as `k -> 0`, `S = supp(x)`.
    RatioTest { bound: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Integrability {
    Yes(YesReason),
    /// Splitting `x` into ever more equal parts drives the value past the threshold.
    No {
        divergence: Vec<DivergenceStep>,
    },
    /// Neither test was conclusive; `best_bound` is the largest value seen.
    Unknown {
        best_bound: f64,
        diagnostic: String,
    },
}

impl Integrability {
    pub fn is_yes(&self) -> bool {
        matches!(self, Self::Yes(_))
    }
}

pub fn is_sub_integrable(base: &Base, x: &NNVector) -> Integrability {
    is_sub_integrable_with(base, x, &SolveOptions::default())
}

pub fn is_sub_integrable_with(base: &Base, x: &NNVector, opts: &SolveOptions) -> Integrability {
    match (&base.system.generators, &base.weighting) {
        (Generators::BoxGrid { .. }, Weighting::ClosedForm(form)) => {
            closed_form_integrability(form, x, opts)
        }
        _ => Integrability::Yes(YesReason::FiniteSystem),
    }
}

/// Integrability of `x` over the whole orthant under a closed-form weighting.
pub(crate) fn closed_form_integrability(
    form: &ClosedForm,
    x: &NNVector,
    opts: &SolveOptions,
) -> Integrability {
    let n = x.len();
    match form {
        ClosedForm::WeightedSum(w) => {
            return Integrability::Yes(YesReason::DominatedBySum(w.clone()))
        }
        ClosedForm::MaxCoord(c) => return Integrability::Yes(YesReason::DominatedByMax(*c)),
        // ln(1 + t) <= t
        ClosedForm::MaxLog => return Integrability::Yes(YesReason::DominatedByMax(1.0)),
        ClosedForm::ProbabilisticSum => {
            return Integrability::Yes(YesReason::DominatedBySum(vec![1.0; n]))
        }
        ClosedForm::Product | ClosedForm::XPlusSqrtY => {}
    }
    let eval = |y: &[f64]| form.eval(y).unwrap_or(f64::NAN);
    let support = x.support();
    if support.is_empty() {
        return Integrability::Yes(YesReason::RatioTest { bound: 0.0 });
    }
    // ratio r(k) = A(k 1_S) / k on a dyadic sequence k -> 0
    let ratio = |j: i32| {
        let k = 2f64.powi(-j);
        let y: Vec<f64> = (0..n)
            .map(|i| if support.contains(i) { k } else { 0.0 })
            .collect();
        eval(&y) / k
    };
    let early = (0..=40).map(ratio).fold(0.0, f64::max);
    let late = (41..=60).map(ratio).fold(0.0, f64::max);
    if late.is_finite() && late <= early * (1.0 + 1e-6) + 1e-12 {
        return Integrability::Yes(YesReason::RatioTest {
            bound: early.max(late),
        });
    }
    let scale = match eval(x) {
        s if s > 0.0 && s.is_finite() => s,
        _ => 1.0,
    };
    let threshold = opts.divergence_factor * scale;
    let mut steps = Vec::new();
    let mut best: f64 = 0.0;
    for j in 0..=80 {
        let parts = 2f64.powi(j);
        let piece: Vec<f64> = x.iter().map(|v| v / parts).collect();
        let value = parts * eval(&piece);
        if !value.is_finite() {
            break;
        }
        best = best.max(value);
        steps.push(DivergenceStep { parts, value });
        if value > threshold {
            return Integrability::No { divergence: steps };
        }
    }
    Integrability::Unknown {
        best_bound: best,
        diagnostic: format!(
            "equal splits reached {best}, below the divergence threshold {threshold}"
        ),
    }
}
