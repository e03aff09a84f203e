//! Finite generator systems: one linear or integer program per family of
//! mutually admissible generators.

use std::collections::HashSet;

use super::{Direction, IntegralResult, SolveOptions, Term, VALUE_TOL};
use crate::classical;
use crate::domain::{
    comonotone_unchecked, indicator, Base, CoefficientDomain, CollectionConstraint, Generators,
    NNVector, SubsetMask, Weighting,
};
use crate::error::{Error, Result};
use crate::lp::{self, BnbOptions, LinearProgram, LpStatus, Relation, Sense};

/// A nonzero generator with its weight.
#[derive(Debug, Clone, PartialEq)]
struct Atom {
    pub generator: NNVector,
    pub weight: f64,
    pub support: SubsetMask,
}

/// The nonzero generators of a list or indicator system, weighted.
fn atoms(base: &Base) -> Result<Vec<Atom>> {
    let n = base.n();
    let list: Vec<NNVector> = match &base.system.generators {
        Generators::List(list) => list.clone(),
        Generators::Indicators => (1..(1u32 << n))
            .map(|m| indicator(SubsetMask(m), 1.0, n))
            .collect(),
        Generators::Collections(_) | Generators::BoxGrid { .. } => {
            return Err(Error::Unsupported(
                "generator atoms need a list or indicator system".into(),
            ))
        }
    };
    let mut out: Vec<Atom> = Vec::with_capacity(list.len());
    for g in list {
        if g.is_zero() || out.iter().any(|a| a.generator == g) {
            continue;
        }
        let weight = base
            .weighting
            .eval(&g)
            .ok_or_else(|| Error::UndefinedWeight(g.as_slice().to_vec()))?;
        out.push(Atom {
            support: g.support(),
            generator: g,
            weight,
        });
    }
    Ok(out)
}

/// Value of the member `coefficient * g`.
pub(crate) fn member_value(w: &Weighting, g: &NNVector, coefficient: f64) -> Option<f64> {
    if w.is_homogeneous() {
        Some(coefficient * w.eval(g)?)
    } else {
        w.eval(&g.scaled(coefficient))
    }
}

pub(crate) fn solve(
    base: &Base,
    x: &NNVector,
    direction: Direction,
    opts: &SolveOptions,
) -> Result<IntegralResult> {
    if let Generators::Collections(collections) = &base.system.generators {
        return collections_route(&base.weighting, collections, x, direction);
    }
    let coeff = base.system.coefficients;
    if coeff != CoefficientDomain::Unit && !base.weighting.is_homogeneous() {
        return Err(Error::Unsupported(format!(
            "scaled members need a homogeneous weighting, {} is not",
            base.weighting.kind()
        )));
    }
    if x.is_zero() {
        return Ok(IntegralResult::exact(0.0, Vec::new()));
    }
    let all = atoms(base)?;
    // under Sigma <= x a member may only live on supp(x)
    let usable: Vec<usize> = match direction {
        Direction::Sub => (0..all.len())
            .filter(|&j| all[j].support.is_subset_of(x.support()))
            .collect(),
        Direction::Super => (0..all.len()).collect(),
    };
    if usable.is_empty() {
        return Ok(match direction {
            Direction::Sub => IntegralResult::exact(0.0, Vec::new()),
            Direction::Super => IntegralResult::infeasible(),
        });
    }
    let families = match families(
        &all,
        &usable,
        base.system.constraint,
        coeff,
        base.n(),
        opts.max_candidates,
    ) {
        Ok(f) => f,
        Err(err @ Error::SearchSpaceTooLarge { .. }) => {
            return classical_fallback(base, x, direction).unwrap_or(Err(err));
        }
        Err(err) => return Err(err),
    };
    let mut best: Option<f64> = None;
    let mut optimal: Vec<(Vec<usize>, Vec<f64>)> = Vec::new();
    let mut unbounded = false;
    for family in families {
        let program = family_program(&all, &family, x, direction, base.system.constraint, coeff);
        let sol = lp::solve(
            &program,
            BnbOptions {
                node_budget: opts.node_budget,
                ..Default::default()
            },
        )?;
        match sol.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                unbounded = true;
                continue;
            }
            LpStatus::BudgetExceeded => return Err(Error::BudgetExceeded(opts.node_budget)),
            LpStatus::Optimal => {}
        }
        let v = sol.objective;
        let improves = best.is_none_or(|b| match direction {
            Direction::Sub => v > b + tie_tol(b),
            Direction::Super => v < b - tie_tol(b),
        });
        if improves {
            best = Some(v);
            optimal.clear();
            optimal.push((family, sol.values));
        } else if best.is_some_and(|b| (v - b).abs() <= tie_tol(b)) {
            optimal.push((family, sol.values));
        }
    }
    if unbounded && direction == Direction::Sub {
        return Ok(IntegralResult::unbounded(Vec::new()));
    }
    let Some(value) = best else {
        return Ok(IntegralResult::infeasible());
    };
    let mut chosen: Option<Vec<f64>> = None;
    for (family, values) in optimal {
        let refined = if opts.lexicographic_witness {
            let program =
                family_program(&all, &family, x, direction, base.system.constraint, coeff);
            lexicographic(&program, value, values, opts)
        } else {
            values
        };
        let mut full = vec![0.0; all.len()];
        for (&j, &a) in family.iter().zip(&refined) {
            full[j] = a;
        }
        if chosen.as_ref().is_none_or(|c| lex_less(&full, c)) {
            chosen = Some(full);
        }
        if !opts.lexicographic_witness {
            break;
        }
    }
    let coefficients = chosen.expect("at least one optimal family");
    let integral = coeff != CoefficientDomain::NonNegReal;
    let witness: Vec<Term> = coefficients
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > VALUE_TOL)
        .map(|(j, &a)| Term {
            generator: all[j].generator.clone(),
            coefficient: if integral { a.round() } else { a },
            weight: all[j].weight,
        })
        .collect();
    let total: f64 = witness.iter().map(Term::contribution).sum();
    Ok(IntegralResult::exact(
        if integral { total } else { value },
        witness,
    ))
}

fn tie_tol(v: f64) -> f64 {
    1e-9 * v.abs().max(1.0)
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > 1e-9 {
            return x < y;
        }
    }
    false
}

fn family_program(
    all: &[Atom],
    family: &[usize],
    x: &NNVector,
    direction: Direction,
    constraint: CollectionConstraint,
    coeff: CoefficientDomain,
) -> LinearProgram {
    let (sense, relation) = match direction {
        Direction::Sub => (Sense::Maximize, Relation::Le),
        Direction::Super => (Sense::Minimize, Relation::Ge),
    };
    let mut program = LinearProgram::new(sense, family.iter().map(|&j| all[j].weight).collect());
    for (i, &xi) in x.iter().enumerate() {
        if direction == Direction::Super && xi == 0.0 {
            continue;
        }
        program.constrain(
            family.iter().map(|&j| all[j].generator[i]).collect(),
            relation,
            xi,
        );
    }
    if coeff == CoefficientDomain::Unit {
        match constraint {
            CollectionConstraint::Partition | CollectionConstraint::DisjointSupport(_) => {
                for v in 0..family.len() {
                    program.bound(v, Relation::Le, 1.0);
                }
            }
            CollectionConstraint::MaxParts(k) => {
                program.constrain(vec![1.0; family.len()], Relation::Le, k as f64);
            }
            _ => {}
        }
    }
    if coeff == CoefficientDomain::NonNegReal {
        program
    } else {
        program.all_integer()
    }
}

/// Among solutions attaining `value`, minimizes the coefficients one at a time
/// in family order. Falls back to `start` if a refinement step fails.
fn lexicographic(
    program: &LinearProgram,
    value: f64,
    start: Vec<f64>,
    opts: &SolveOptions,
) -> Vec<f64> {
    let n = program.num_vars();
    let mut base = program.clone();
    let slack = 1e-9 * value.abs().max(1.0);
    match program.sense {
        Sense::Maximize => base.constrain(program.objective.clone(), Relation::Ge, value - slack),
        Sense::Minimize => base.constrain(program.objective.clone(), Relation::Le, value + slack),
    };
    let integral = program.integer.iter().any(|&f| f);
    let budget = BnbOptions {
        node_budget: (opts.node_budget / 10).max(1000),
        ..Default::default()
    };
    let mut fixed = Vec::with_capacity(n);
    for j in 0..n {
        let mut objective = vec![0.0; n];
        objective[j] = 1.0;
        let mut step = LinearProgram {
            sense: Sense::Minimize,
            objective,
            ..base.clone()
        };
        for (i, &v) in fixed.iter().enumerate() {
            step.bound(i, Relation::Le, v);
        }
        let sol = match lp::solve(&step, budget) {
            Ok(sol) if sol.status == LpStatus::Optimal => sol,
            _ => return start,
        };
        let v = sol.values[j];
        fixed.push(if integral { v.round() } else { v + 1e-9 });
        if j + 1 == n {
            let mut values = sol.values;
            if integral {
                values.iter_mut().for_each(|v| *v = v.round());
            }
            if !program.is_feasible(&values, 1e-7) {
                return start;
            }
            return if integral {
                values
            } else {
                polish(program, value, values, budget)
            };
        }
    }
    start
}

/// The slack on the objective lets tiny coefficients survive; re-solve on the
/// chosen support to land on a clean vertex with the original value.
fn polish(program: &LinearProgram, value: f64, values: Vec<f64>, budget: BnbOptions) -> Vec<f64> {
    let mut restricted = program.clone();
    for (j, &v) in values.iter().enumerate() {
        if v <= 1e-7 {
            restricted.bound(j, Relation::Le, 0.0);
        }
    }
    match lp::solve(&restricted, budget) {
        Ok(sol)
            if sol.status == LpStatus::Optimal
                && (sol.objective - value).abs() <= 1e-9 * value.abs().max(1.0) =>
        {
            sol.values
        }
        _ => values,
    }
}

/// Index sets of generators that may appear together, each maximal for the
/// constraint.
fn families(
    all: &[Atom],
    usable: &[usize],
    constraint: CollectionConstraint,
    coeff: CoefficientDomain,
    n: usize,
    cap: usize,
) -> Result<Vec<Vec<usize>>> {
    let too_many = |size: u128| Error::SearchSpaceTooLarge {
        size,
        limit: cap as u128,
    };
    match constraint {
        CollectionConstraint::Any => Ok(vec![usable.to_vec()]),
        CollectionConstraint::MaxParts(k) => {
            let enough = match coeff {
                CoefficientDomain::Unit => true,
                CoefficientDomain::NonNegReal => k >= usable.len().min(n),
                CoefficientDomain::NonNegInt => k >= usable.len(),
            };
            if enough {
                return Ok(vec![usable.to_vec()]);
            }
            let count = binomial(usable.len(), k);
            if count > cap as u128 {
                return Err(too_many(count));
            }
            Ok(k_subsets(usable, k))
        }
        CollectionConstraint::Chain => cliques(
            usable,
            |a, b| {
                all[a].support.is_subset_of(all[b].support)
                    || all[b].support.is_subset_of(all[a].support)
            },
            cap,
        ),
        CollectionConstraint::Comonotone => cliques(
            usable,
            |a, b| comonotone_unchecked(&all[a].generator, &all[b].generator),
            cap,
        ),
        CollectionConstraint::Partition | CollectionConstraint::DisjointSupport(_) => {
            let k = match constraint {
                CollectionConstraint::DisjointSupport(k) => k,
                _ => n,
            };
            let maximal = cliques(
                usable,
                |a, b| all[a].support.is_disjoint(all[b].support),
                cap,
            )?;
            let mut seen = HashSet::new();
            let mut out = Vec::new();
            for clique in maximal {
                let parts = if clique.len() > k {
                    k_subsets(&clique, k)
                } else {
                    vec![clique]
                };
                for p in parts {
                    if seen.insert(p.clone()) {
                        out.push(p);
                        if out.len() > cap {
                            return Err(too_many(out.len() as u128));
                        }
                    }
                }
            }
            Ok(out)
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn k_subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k == 0 || k > items.len() {
        return out;
    }
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let mut pos = k;
        while pos > 0 && idx[pos - 1] == items.len() - k + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            return out;
        }
        idx[pos - 1] += 1;
        for p in pos..k {
            idx[p] = idx[p - 1] + 1;
        }
    }
}

/// Maximal cliques of the compatibility graph on `vertices` (Bron-Kerbosch
/// with pivoting), sorted ascending inside each clique.
fn cliques(
    vertices: &[usize],
    compatible: impl Fn(usize, usize) -> bool,
    cap: usize,
) -> Result<Vec<Vec<usize>>> {
    let m = vertices.len();
    let adj: Vec<Vec<bool>> = (0..m)
        .map(|a| {
            (0..m)
                .map(|b| a != b && compatible(vertices[a], vertices[b]))
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut r = Vec::new();
    let p: Vec<usize> = (0..m).collect();
    bron_kerbosch(&adj, &mut r, p, Vec::new(), &mut out, cap)?;
    for c in &mut out {
        *c = c.iter().map(|&i| vertices[i]).collect();
        c.sort_unstable();
    }
    out.sort();
    Ok(out)
}

fn bron_kerbosch(
    adj: &[Vec<bool>],
    r: &mut Vec<usize>,
    p: Vec<usize>,
    x: Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    cap: usize,
) -> Result<()> {
    if p.is_empty() && x.is_empty() {
        out.push(r.clone());
        if out.len() > cap {
            return Err(Error::SearchSpaceTooLarge {
                size: out.len() as u128,
                limit: cap as u128,
            });
        }
        return Ok(());
    }
    let pivot = p
        .iter()
        .chain(&x)
        .copied()
        .max_by_key(|&u| p.iter().filter(|&&v| adj[u][v]).count())
        .expect("p or x is nonempty");
    let candidates: Vec<usize> = p.iter().copied().filter(|&v| !adj[pivot][v]).collect();
    let (mut p, mut x) = (p, x);
    for v in candidates {
        r.push(v);
        let np = p.iter().copied().filter(|&u| adj[v][u]).collect();
        let nx = x.iter().copied().filter(|&u| adj[v][u]).collect();
        bron_kerbosch(adj, r, np, nx, out, cap)?;
        r.pop();
        p.retain(|&u| u != v);
        x.push(v);
    }
    Ok(())
}

/// Closed formulas for capacity-induced indicator systems too large to enumerate.
fn classical_fallback(
    base: &Base,
    x: &NNVector,
    direction: Direction,
) -> Option<Result<IntegralResult>> {
    let (Generators::Indicators, Weighting::CapacityInduced(m), CoefficientDomain::NonNegReal) = (
        &base.system.generators,
        &base.weighting,
        base.system.coefficients,
    ) else {
        return None;
    };
    let n = base.n();
    let terms = match (base.system.constraint, direction) {
        (CollectionConstraint::Chain | CollectionConstraint::Comonotone, _) => {
            classical::choquet_terms(m, x).ok()?
        }
        (CollectionConstraint::Partition, Direction::Sub) => {
            let (_, blocks) = classical::pan_blocks(m, x).ok()?;
            blocks
                .into_iter()
                .map(|b| (b, b.iter().map(|i| x[i]).fold(f64::INFINITY, f64::min)))
                .filter(|&(_, c)| c > 0.0)
                .collect()
        }
        _ => return None,
    };
    let witness: Vec<Term> = terms
        .into_iter()
        .map(|(set, c)| Term {
            generator: indicator(set, 1.0, n),
            coefficient: c,
            weight: m.get(set),
        })
        .collect();
    let value = witness.iter().map(Term::contribution).sum();
    Some(Ok(IntegralResult::exact(value, witness)))
}

/// Explicit collections are used verbatim: a collection counts only as a whole.
fn collections_route(
    w: &Weighting,
    collections: &[Vec<NNVector>],
    x: &NNVector,
    direction: Direction,
) -> Result<IntegralResult> {
    let mut best: Option<(f64, &Vec<NNVector>)> = None;
    for c in collections {
        let mut sum = vec![0.0; x.len()];
        for y in c {
            for (s, v) in sum.iter_mut().zip(y.iter()) {
                *s += v;
            }
        }
        let fits = match direction {
            Direction::Sub => sum.iter().zip(x.iter()).all(|(s, v)| *s <= v + VALUE_TOL),
            Direction::Super => sum.iter().zip(x.iter()).all(|(s, v)| *s >= v - VALUE_TOL),
        };
        if !fits {
            continue;
        }
        let mut value = 0.0;
        for y in c {
            value += w
                .eval(y)
                .ok_or_else(|| Error::UndefinedWeight(y.as_slice().to_vec()))?;
        }
        let better = best.is_none_or(|(b, _)| match direction {
            Direction::Sub => value > b,
            Direction::Super => value < b,
        });
        if better {
            best = Some((value, c));
        }
    }
    let to_terms = |c: &Vec<NNVector>| -> Vec<Term> {
        c.iter()
            .filter(|y| !y.is_zero())
            .map(|y| Term {
                generator: y.clone(),
                coefficient: 1.0,
                weight: w.eval(y).unwrap_or(0.0),
            })
            .collect()
    };
    Ok(match (best, direction) {
        (Some((v, c)), Direction::Sub) if v > 0.0 => IntegralResult::exact(v, to_terms(c)),
        (_, Direction::Sub) => IntegralResult::exact(0.0, Vec::new()),
        (Some((v, c)), Direction::Super) => IntegralResult::exact(v, to_terms(c)),
        (None, Direction::Super) if x.is_zero() => IntegralResult::exact(0.0, Vec::new()),
        (None, Direction::Super) => IntegralResult::infeasible(),
    })
}
