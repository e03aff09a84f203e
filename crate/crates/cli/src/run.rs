//! Mode dispatch and the result document.

use std::time::Instant;

use serde::Serialize;

use decint::checks::{self, CheckConfig, SuiteReport};
use decint::classical;
use decint::decomp::{
    self, is_sub_integrable_with, iterated_sub_integral, max_pseudo_integral, Integrability,
    SolveOptions, Term, YesReason,
};
use decint::domain::{fmt_num, indicator, Capacity, NNVector, SubsetMask};
use decint::oracle::{self, BruteOptions};
use decint::{Direction, IntegralResult, Status};

use crate::problem::{Overrides, ProblemError, ProblemFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_UNBOUNDED_OR_INFEASIBLE: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("unknown mode `{0}`; expected sub, super, classical:<name>, max_pseudo, iterated, integrable, oracle[:sub|:super] or check:<suite>")]
    UnknownMode(String),
    #[error("query {index}: {source}")]
    Solve {
        index: usize,
        #[source]
        source: decint::Error,
    },
    #[error(transparent)]
    Core(#[from] decint::Error),
}

/// Command-line settings shared by `run`, `explain` and `check`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Flags {
    pub grid_step: Option<f64>,
    pub max_parts: Option<usize>,
    pub node_budget: Option<u64>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            grid_step: self.grid_step,
            max_parts: self.max_parts,
        }
    }

    fn solve_options(&self) -> SolveOptions {
        let mut opts = SolveOptions::default();
        if let Some(b) = self.node_budget {
            opts.node_budget = b;
        }
        opts
    }

    fn brute_options(&self) -> BruteOptions {
        let mut opts = BruteOptions::default();
        if let Some(b) = self.node_budget {
            opts.node_limit = b;
        }
        opts
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mode {
    Sub,
    Super,
    Classical(String),
    MaxPseudo,
    Iterated,
    Integrable,
    Oracle(Direction),
    Check(String),
}

const CLASSICAL: &[&str] = &[
    "choquet",
    "shilkret",
    "sugeno",
    "pan",
    "concave",
    "convex",
    "level_choquet",
];

impl Mode {
    pub fn parse(s: &str) -> Result<Self, RunError> {
        let unknown = || RunError::UnknownMode(s.to_string());
        Ok(match s.split_once(':') {
            None => match s {
                "sub" => Self::Sub,
                "super" => Self::Super,
                "max_pseudo" => Self::MaxPseudo,
                "iterated" => Self::Iterated,
                "integrable" => Self::Integrable,
                "oracle" => Self::Oracle(Direction::Sub),
                _ => return Err(unknown()),
            },
            Some(("classical", name)) if CLASSICAL.contains(&name) => {
                Self::Classical(name.to_string())
            }
            Some(("oracle", "sub")) => Self::Oracle(Direction::Sub),
            Some(("oracle", "super")) => Self::Oracle(Direction::Super),
            Some(("check", suite)) if checks::SUITES.contains(&suite) => {
                Self::Check(suite.to_string())
            }
            _ => return Err(unknown()),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessTerm {
    pub generator: Vec<f64>,
    pub coefficient: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceRow {
    pub parts: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct QueryResult {
    pub query: Vec<f64>,
    /// `null` when the status carries no finite value.
    pub value: Option<f64>,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_bound: Option<f64>,
    pub witness: Option<Vec<WitnessTerm>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub divergence: Vec<DivergenceRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
    pub wall_time_ms: f64,
}

impl QueryResult {
    fn blocks(&self) -> bool {
        matches!(self.status.as_str(), "unbounded" | "infeasible_domain")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultDocument {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub mode: String,
    pub results: Vec<QueryResult>,
}

impl ResultDocument {
    pub fn exit_code(&self) -> i32 {
        if self.results.iter().any(QueryResult::blocks) {
            EXIT_UNBOUNDED_OR_INFEASIBLE
        } else {
            EXIT_OK
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result documents always serialize");
        s.push('\n');
        s
    }
}

pub enum Outcome {
    Results(ResultDocument),
    Check(SuiteReport),
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Results(doc) => doc.exit_code(),
            Self::Check(report) if report.ok() => EXIT_OK,
            Self::Check(_) => EXIT_CHECK_FAILED,
        }
    }
}

pub fn run(file: &ProblemFile, mode: Option<&str>, flags: &Flags) -> Result<Outcome, RunError> {
    let mode_text = mode.unwrap_or(&file.mode);
    let mode = Mode::parse(mode_text)?;
    if let Mode::Check(suite) = &mode {
        let base = file.base(flags.overrides()).ok();
        return check(suite, base, flags).map(Outcome::Check);
    }
    let queries = file.query_vectors()?;
    let mut results = Vec::with_capacity(queries.len());
    for (index, x) in queries.iter().enumerate() {
        let start = Instant::now();
        let mut row = evaluate(file, &mode, x, flags).map_err(|e| match e {
            RunError::Core(source) => RunError::Solve { index, source },
            other => other,
        })?;
        row.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        results.push(row);
    }
    Ok(Outcome::Results(ResultDocument {
        name: file.name.clone(),
        mode: mode_text.to_string(),
        results,
    }))
}

pub fn check(
    suite: &str,
    base: Option<decint::Base>,
    flags: &Flags,
) -> Result<SuiteReport, RunError> {
    let cfg = CheckConfig {
        seed: flags.seed.unwrap_or(CheckConfig::default().seed),
        instances: None,
        tolerance: flags.tolerance,
        grid_step: flags.grid_step,
        base,
    };
    Ok(checks::run_suite(suite, &cfg)?)
}

fn from_integral(x: &NNVector, r: IntegralResult) -> QueryResult {
    let finite = r.is_finite() || (r.status == Status::Unbounded && r.value.is_finite());
    QueryResult {
        query: x.to_vec(),
        value: finite.then_some(r.value),
        status: r.status.label().to_string(),
        error_bound: matches!(r.status, Status::Approximate { .. }).then(|| r.error_bound()),
        witness: r
            .witness
            .map(|terms| terms.into_iter().map(witness_term).collect()),
        divergence: r
            .divergence
            .iter()
            .map(|s| DivergenceRow {
                parts: s.parts,
                value: s.value,
            })
            .collect(),
        diagnostic: None,
        wall_time_ms: 0.0,
    }
}

fn witness_term(t: Term) -> WitnessTerm {
    WitnessTerm {
        generator: t.generator.into_inner(),
        coefficient: t.coefficient,
        weight: t.weight,
    }
}

fn exact(x: &NNVector, value: f64, witness: Option<Vec<WitnessTerm>>) -> QueryResult {
    QueryResult {
        query: x.to_vec(),
        value: Some(value),
        status: Status::Exact.label().to_string(),
        error_bound: None,
        witness,
        divergence: Vec::new(),
        diagnostic: None,
        wall_time_ms: 0.0,
    }
}

fn set_terms(m: &Capacity, terms: impl IntoIterator<Item = (SubsetMask, f64)>) -> Vec<WitnessTerm> {
    terms
        .into_iter()
        .map(|(set, c)| WitnessTerm {
            generator: indicator(set, 1.0, m.n()).into_inner(),
            coefficient: c,
            weight: m.get(set),
        })
        .collect()
}

fn evaluate(
    file: &ProblemFile,
    mode: &Mode,
    x: &NNVector,
    flags: &Flags,
) -> Result<QueryResult, RunError> {
    let base = || file.base(flags.overrides());
    let opts = flags.solve_options();
    Ok(match mode {
        Mode::Sub => from_integral(x, decomp::sub_integral_with(&base()?, x, &opts)?),
        Mode::Super => from_integral(x, decomp::super_integral_with(&base()?, x, &opts)?),
        Mode::MaxPseudo => from_integral(x, max_pseudo_integral(&base()?, x)?),
        Mode::Iterated => from_integral(x, iterated_sub_integral(&base()?, x)?),
        Mode::Integrable => integrability(x, is_sub_integrable_with(&base()?, x, &opts)),
        Mode::Oracle(direction) => {
            let base = base()?;
            let brute = flags.brute_options();
            let value = match direction {
                Direction::Sub => Some(oracle::brute_sub_with(&base, x, &brute)?),
                Direction::Super => oracle::brute_super_with(&base, x, &brute)?,
            };
            match value {
                Some(v) => exact(x, v, None),
                None => from_integral(
                    x,
                    IntegralResult {
                        status: Status::InfeasibleDomain,
                        value: f64::INFINITY,
                        witness: None,
                        divergence: Vec::new(),
                    },
                ),
            }
        }
        Mode::Classical(name) => classical_value(file, name, x)?,
        Mode::Check(_) => unreachable!("handled before per-query evaluation"),
    })
}

fn classical_value(file: &ProblemFile, name: &str, x: &NNVector) -> Result<QueryResult, RunError> {
    if name == "level_choquet" {
        let nu = file
            .level_capacity()?
            .ok_or_else(|| missing("level_capacity", name))?;
        return Ok(exact(x, classical::level_dependent_choquet(&nu, x)?, None));
    }
    let m = file.capacity()?.ok_or_else(|| missing("capacity", name))?;
    Ok(match name {
        "choquet" => {
            let terms = classical::choquet_terms(&m, x)?;
            exact(x, classical::choquet(&m, x)?, Some(set_terms(&m, terms)))
        }
        "pan" => {
            let (value, blocks) = classical::pan_blocks(&m, x)?;
            let terms = blocks
                .into_iter()
                .map(|b| (b, b.iter().map(|i| x[i]).fold(f64::INFINITY, f64::min)));
            exact(x, value, Some(set_terms(&m, terms)))
        }
        "shilkret" => exact(x, classical::shilkret(&m, x)?, None),
        "sugeno" => exact(x, classical::sugeno(&m, x)?, None),
        "concave" => exact(x, classical::concave(&m, x)?, None),
        "convex" => exact(x, classical::convex(&m, x)?, None),
        _ => unreachable!("validated by Mode::parse"),
    })
}

fn missing(what: &str, mode: &str) -> RunError {
    RunError::Problem(ProblemError::Field {
        field: what.into(),
        message: format!("required by classical:{mode}"),
    })
}

fn integrability(x: &NNVector, verdict: Integrability) -> QueryResult {
    let mut row = exact(x, 0.0, None);
    row.value = None;
    match verdict {
        Integrability::Yes(reason) => {
            row.diagnostic = Some(match reason {
                YesReason::FiniteSystem => "integrable: finite system".into(),
                YesReason::DominatedByMax(c) => {
                    format!("integrable: dominated by {} * max", fmt_num(c))
                }
                YesReason::DominatedBySum(w) => format!(
                    "integrable: dominated by the weighted sum ({})",
                    w.iter().map(|v| fmt_num(*v)).collect::<Vec<_>>().join(",")
                ),
                YesReason::RatioTest { bound } => {
                    format!("integrable: ratio test bound {}", fmt_num(bound))
                }
            });
        }
        Integrability::No { divergence } => {
            row.status = Status::Unbounded.label().into();
            row.value = divergence.last().map(|s| s.value);
            row.divergence = divergence
                .iter()
                .map(|s| DivergenceRow {
                    parts: s.parts,
                    value: s.value,
                })
                .collect();
            row.diagnostic = Some("not integrable".into());
        }
        Integrability::Unknown {
            best_bound,
            diagnostic,
        } => {
            row.status = "unknown".into();
            row.value = Some(best_bound);
            row.diagnostic = Some(diagnostic);
        }
    }
    row
}

/// Human-readable decomposition of one result.
pub fn explain(row: &QueryResult, symbol: &str, direction: Option<Direction>) -> String {
    let vec = |v: &[f64]| v.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(",");
    let mut out = format!("query ({})\n", vec(&row.query));
    let Some(terms) = row.witness.as_ref().filter(|_| row.status == "exact") else {
        out.push_str(&format!("status {}", row.status));
        match (row.value, row.error_bound) {
            (Some(v), Some(e)) => {
                out.push_str(&format!(", value {} +/- {}", fmt_num(v), fmt_num(e)))
            }
            (Some(v), None) => out.push_str(&format!(", bound {}", fmt_num(v))),
            _ => {}
        }
        out.push('\n');
        return out;
    };
    let mut sum = vec![0.0; row.query.len()];
    for t in terms {
        for (s, g) in sum.iter_mut().zip(&t.generator) {
            *s += t.coefficient * g;
        }
        let label = format!("{symbol}({})", vec(&t.generator));
        if t.coefficient == 1.0 {
            out.push_str(&format!("{label}={}\n", fmt_num(t.weight)));
        } else {
            out.push_str(&format!(
                "{} x {label}={}\n",
                fmt_num(t.coefficient),
                fmt_num(t.coefficient * t.weight)
            ));
        }
    }
    out.push_str(&format!(
        "total {}\n",
        fmt_num(row.value.unwrap_or(f64::NAN))
    ));
    let slack: Vec<f64> = match direction {
        Some(Direction::Super) => sum.iter().zip(&row.query).map(|(s, x)| s - x).collect(),
        _ => row.query.iter().zip(&sum).map(|(x, s)| x - s).collect(),
    };
    out.push_str(&format!("slack ({})\n", vec(&slack)));
    out
}

pub fn direction_of(mode: &Mode) -> Option<Direction> {
    match mode {
        Mode::Super | Mode::Oracle(Direction::Super) => Some(Direction::Super),
        Mode::Classical(name) if name == "convex" => Some(Direction::Super),
        Mode::Check(_) => None,
        _ => Some(Direction::Sub),
    }
}
