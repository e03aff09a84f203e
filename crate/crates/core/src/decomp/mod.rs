//! Sub- and super-decomposition integrals for arbitrary bases.
//!
//! `sub_integral` is the supremum of `sum A(y_j)` over collections of the
//! system whose sum stays below `x`; `super_integral` is the infimum over
//! collections whose sum covers `x`. Which algorithm runs depends on the
//! generators, the coefficient domain and the collection constraint:
//!
//! | generators           | route                                                  |
//! |----------------------|--------------------------------------------------------|
//! | explicit collections | direct enumeration                                     |
//! | finite list          | LP (real coefficients) or ILP per admissible family    |
//! | indicators           | as a finite list of `1_E`, classical fallback if huge  |
//! | box grid             | lattice dynamic program, reported as approximate       |

mod finite;
mod frank;
mod grid;
mod integrability;
mod iterated;
mod pseudo;
mod structured;

use std::fmt;

use crate::domain::{fmt_num, Base, Generators, NNVector, EPS};
use crate::error::Result;

pub use frank::{frank_check, probabilistic_sum_super_closed_form, FrankReport, FrankRow};
pub use integrability::{is_sub_integrable, is_sub_integrable_with, Integrability, YesReason};
pub use iterated::{induced_weighting, iterated_sub_integral};
pub use pseudo::{knapsack_base, knapsack_integral, max_pseudo_integral};
pub use structured::{
    comonotone_integral, comonotone_integral_batch, disjoint_support_integral,
    fixed_length_integral, subadditive_transform, subadditive_transform_batch,
    superadditive_transform, superadditive_transform_batch,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Collections with `sum <= x`, maximize.
    Sub,
    /// Collections with `sum >= x`, minimize.
    Super,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Status {
    Exact,
    /// Grid-restricted value; `error_bound` is the resolution gap at the query point.
    Approximate {
        error_bound: f64,
    },
    /// `x` is not sub-integrable; the result carries a divergence certificate.
    Unbounded,
    /// No collection of the system covers `x`.
    InfeasibleDomain,
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Exact => "exact",
            Status::Approximate { .. } => "approximate",
            Status::Unbounded => "unbounded",
            Status::InfeasibleDomain => "infeasible_domain",
        }
    }
}

/// One line of a witness: the member `coefficient * generator`, valued
/// `coefficient * weight`. Under unit coefficients the coefficient counts copies.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub generator: NNVector,
    pub coefficient: f64,
    pub weight: f64,
}

impl Term {
    pub fn contribution(&self) -> f64 {
        self.coefficient * self.weight
    }
}

/// A decomposition with `parts` equal pieces and its total weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceStep {
    pub parts: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralResult {
    pub status: Status,
    pub value: f64,
    pub witness: Option<Vec<Term>>,
    pub divergence: Vec<DivergenceStep>,
}

impl IntegralResult {
    pub fn exact(value: f64, witness: Vec<Term>) -> Self {
        Self {
            status: Status::Exact,
            value,
            witness: Some(witness),
            divergence: Vec::new(),
        }
    }

    pub(crate) fn approximate(value: f64, error_bound: f64, witness: Option<Vec<Term>>) -> Self {
        Self {
            status: Status::Approximate { error_bound },
            value,
            witness,
            divergence: Vec::new(),
        }
    }

    pub(crate) fn unbounded(divergence: Vec<DivergenceStep>) -> Self {
        let value = divergence.last().map_or(f64::INFINITY, |s| s.value);
        Self {
            status: Status::Unbounded,
            value,
            witness: None,
            divergence,
        }
    }

    pub(crate) fn infeasible() -> Self {
        Self {
            status: Status::InfeasibleDomain,
            value: f64::INFINITY,
            witness: None,
            divergence: Vec::new(),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.status == Status::Exact
    }

    /// Finite value with either exact or approximate status.
    pub fn is_finite(&self) -> bool {
        matches!(self.status, Status::Exact | Status::Approximate { .. })
    }

    pub fn error_bound(&self) -> f64 {
        match self.status {
            Status::Approximate { error_bound } => error_bound,
            _ => 0.0,
        }
    }

    /// Sum of the witness members.
    pub fn witness_sum(&self, n: usize) -> Option<Vec<f64>> {
        let terms = self.witness.as_ref()?;
        let mut total = vec![0.0; n];
        for t in terms {
            for (s, g) in total.iter_mut().zip(t.generator.iter()) {
                *s += t.coefficient * g;
            }
        }
        Some(total)
    }

    /// Checks that the witness satisfies the side constraint for `x` and that
    /// its weights add up to the reported value.
    pub fn witness_is_valid(&self, x: &[f64], direction: Direction, tol: f64) -> bool {
        let (Some(terms), Some(sum)) = (self.witness.as_ref(), self.witness_sum(x.len())) else {
            return false;
        };
        let fits = match direction {
            Direction::Sub => sum.iter().zip(x).all(|(s, v)| *s <= v + tol),
            Direction::Super => sum.iter().zip(x).all(|(s, v)| *s >= v - tol),
        };
        let total: f64 = terms.iter().map(Term::contribution).sum();
        fits && (total - self.value).abs() <= tol * self.value.abs().max(1.0)
    }
}

impl fmt::Display for IntegralResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.status {
            Status::Approximate { error_bound } => {
                write!(
                    f,
                    "{} (approximate, +/- {})",
                    fmt_num(self.value),
                    fmt_num(error_bound)
                )
            }
            Status::Exact => write!(f, "{}", fmt_num(self.value)),
            other => write!(f, "{}", other.label()),
        }
    }
}

/// Tunables shared by the generic solvers.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Branch-and-bound node budget per integer program.
    pub node_budget: u64,
    /// Largest number of candidate families enumerated before giving up.
    pub max_candidates: usize,
    /// Divergence is declared once a witness exceeds this multiple of the weighting scale.
    pub divergence_factor: f64,
    /// Cap on elementary steps of a grid dynamic program.
    pub grid_work_limit: u64,
    /// Pick the lexicographically smallest optimal coefficient vector as witness.
    pub lexicographic_witness: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            node_budget: 1_000_000,
            max_candidates: 10_000,
            divergence_factor: 1e6,
            grid_work_limit: 4_000_000_000,
            lexicographic_witness: true,
        }
    }
}

/// Default spacing of box-grid systems.
pub const DEFAULT_GRID_STEP: f64 = 1.0 / 64.0;

fn check_query(base: &Base, x: &NNVector) -> Result<()> {
    crate::domain::check_len(base.n(), x.len())
}

/// Sub-decomposition integral of `x` with respect to `base`.
pub fn sub_integral(base: &Base, x: &NNVector) -> Result<IntegralResult> {
    sub_integral_with(base, x, &SolveOptions::default())
}

pub fn sub_integral_with(base: &Base, x: &NNVector, opts: &SolveOptions) -> Result<IntegralResult> {
    Ok(integral_batch(base, std::slice::from_ref(x), Direction::Sub, opts)?.remove(0))
}

/// Super-decomposition integral of `x` with respect to `base`.
pub fn super_integral(base: &Base, x: &NNVector) -> Result<IntegralResult> {
    super_integral_with(base, x, &SolveOptions::default())
}

pub fn super_integral_with(
    base: &Base,
    x: &NNVector,
    opts: &SolveOptions,
) -> Result<IntegralResult> {
    Ok(integral_batch(base, std::slice::from_ref(x), Direction::Super, opts)?.remove(0))
}

/// Evaluates many query points at once; box-grid systems share one table.
pub fn integral_batch(
    base: &Base,
    points: &[NNVector],
    direction: Direction,
    opts: &SolveOptions,
) -> Result<Vec<IntegralResult>> {
    for x in points {
        check_query(base, x)?;
    }
    match &base.system.generators {
        Generators::BoxGrid { upper, step } => {
            let form = match &base.weighting {
                crate::domain::Weighting::ClosedForm(form) => form,
                _ => unreachable!("validated by Base::new"),
            };
            grid::solve_system(
                form,
                base.n(),
                *upper,
                *step,
                base.system.constraint,
                direction,
                points,
                opts,
            )
        }
        _ => points
            .iter()
            .map(|x| finite::solve(base, x, direction, opts))
            .collect(),
    }
}

pub(crate) const VALUE_TOL: f64 = EPS;
