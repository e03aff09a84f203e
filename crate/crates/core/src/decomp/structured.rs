//! Integrals over the structured systems built on a weighting alone:
//! the whole orthant, its comonotone, disjoint-support and fixed-length parts.

use super::{integral_batch, Direction, IntegralResult, SolveOptions, Term};
use crate::domain::{
    indicator, Base, ClosedForm, CoefficientDomain, CollectionConstraint, DecompSystem, Generators,
    NNVector, SubsetMask, Weighting,
};
use crate::error::{Error, Result};

/// Largest support handled by the block enumeration.
const MAX_BLOCK_SUPPORT: usize = 16;

/// The system of all decompositions a weighting can value, under `constraint`.
///
/// Closed forms range over a box grid of spacing `step` (bounded by the
/// formula's own domain), capacities over scaled indicators, tables over
/// their listed vectors.
pub(crate) fn weighting_base(
    a: &Weighting,
    n: usize,
    constraint: CollectionConstraint,
    step: f64,
) -> Result<Base> {
    let (generators, coefficients) = match a {
        Weighting::ClosedForm(form) => (
            Generators::BoxGrid {
                upper: form.domain_upper(),
                step,
            },
            CoefficientDomain::Unit,
        ),
        Weighting::CapacityInduced(_) => (Generators::Indicators, CoefficientDomain::NonNegReal),
        Weighting::CapacityMin(_) => {
            return Err(Error::Unsupported(
                "min-type capacity weightings only support the max pseudo-integral".into(),
            ))
        }
        Weighting::Table(rows) => (
            Generators::List(rows.iter().map(|(g, _)| g.clone()).collect()),
            CoefficientDomain::Unit,
        ),
    };
    Base::new(
        DecompSystem::new(n, generators, coefficients, constraint)?,
        a.clone(),
    )
}

fn dimension(points: &[NNVector]) -> Result<Option<usize>> {
    let Some(first) = points.first() else {
        return Ok(None);
    };
    for p in points {
        crate::domain::check_len(first.len(), p.len())?;
    }
    Ok(Some(first.len()))
}

fn transform_batch(
    a: &Weighting,
    points: &[NNVector],
    parts: Option<usize>,
    step: f64,
    constraint: CollectionConstraint,
    direction: Direction,
) -> Result<Vec<IntegralResult>> {
    let Some(n) = dimension(points)? else {
        return Ok(Vec::new());
    };
    let constraint = match (constraint, parts) {
        (CollectionConstraint::Any, Some(k)) => CollectionConstraint::MaxParts(k),
        (c, _) => c,
    };
    let base = weighting_base(a, n, constraint, step)?;
    integral_batch(&base, points, direction, &SolveOptions::default())
}

/// Best decomposition of `x` into grid-aligned parts (at most `parts` of them
/// when given): a lower bound on the superadditive transform `A*(x)`.
pub fn superadditive_transform(
    a: &Weighting,
    x: &NNVector,
    parts: Option<usize>,
    step: f64,
) -> Result<IntegralResult> {
    Ok(superadditive_transform_batch(a, std::slice::from_ref(x), parts, step)?.remove(0))
}

pub fn superadditive_transform_batch(
    a: &Weighting,
    points: &[NNVector],
    parts: Option<usize>,
    step: f64,
) -> Result<Vec<IntegralResult>> {
    transform_batch(
        a,
        points,
        parts,
        step,
        CollectionConstraint::Any,
        Direction::Sub,
    )
}

/// Cheapest grid-aligned cover of `x`: an upper bound on the subadditive
/// transform of `A`.
pub fn subadditive_transform(
    a: &Weighting,
    x: &NNVector,
    parts: Option<usize>,
    step: f64,
) -> Result<IntegralResult> {
    Ok(subadditive_transform_batch(a, std::slice::from_ref(x), parts, step)?.remove(0))
}

pub fn subadditive_transform_batch(
    a: &Weighting,
    points: &[NNVector],
    parts: Option<usize>,
    step: f64,
) -> Result<Vec<IntegralResult>> {
    transform_batch(
        a,
        points,
        parts,
        step,
        CollectionConstraint::Any,
        Direction::Super,
    )
}

/// Sub-integral over pairwise comonotone decompositions.
pub fn comonotone_integral(a: &Weighting, x: &NNVector, step: f64) -> Result<IntegralResult> {
    Ok(comonotone_integral_batch(a, std::slice::from_ref(x), step)?.remove(0))
}

pub fn comonotone_integral_batch(
    a: &Weighting,
    points: &[NNVector],
    step: f64,
) -> Result<Vec<IntegralResult>> {
    transform_batch(
        a,
        points,
        None,
        step,
        CollectionConstraint::Comonotone,
        Direction::Sub,
    )
}

/// Sub-integral over at most `k` members with pairwise disjoint supports.
/// Exact: on each block the best member is the largest one that fits.
pub fn disjoint_support_integral(a: &Weighting, x: &NNVector, k: usize) -> Result<IntegralResult> {
    let n = x.len();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "disjoint-support size must lie in 1..={n}"
        )));
    }
    match a {
        Weighting::ClosedForm(form) => {
            disjoint_closed_form(form, form.domain_upper(), x, k, Direction::Sub)
        }
        Weighting::CapacityInduced(m) | Weighting::CapacityMin(m) => {
            crate::domain::check_len(m.n(), n)?;
            let lowest = |b: SubsetMask| b.iter().map(|i| x[i]).fold(f64::INFINITY, f64::min);
            let block = |b: SubsetMask| -> Option<(Term, f64)> {
                let c = lowest(b);
                let term = match a {
                    Weighting::CapacityInduced(_) => Term {
                        generator: indicator(b, 1.0, n),
                        coefficient: c,
                        weight: m.get(b),
                    },
                    _ => Term {
                        generator: indicator(b, c, n),
                        coefficient: 1.0,
                        weight: c.min(m.get(b)),
                    },
                };
                let v = term.contribution();
                Some((term, v))
            };
            blocks(x, k, Direction::Sub, block)
        }
        Weighting::Table(_) => {
            let base = weighting_base(a, n, CollectionConstraint::DisjointSupport(k), 1.0)?;
            super::sub_integral(&base, x)
        }
    }
}

/// Disjoint-support integral for a closed form on `[0, upper]^n`, in either direction.
pub(crate) fn disjoint_closed_form(
    form: &ClosedForm,
    upper: Option<f64>,
    x: &NNVector,
    k: usize,
    direction: Direction,
) -> Result<IntegralResult> {
    let n = x.len();
    let cap = upper.unwrap_or(f64::INFINITY);
    blocks(x, k, direction, |b| {
        let mut y = vec![0.0; n];
        for i in b.iter() {
            if direction == Direction::Super && x[i] > cap + crate::domain::EPS {
                return None;
            }
            y[i] = x[i].min(cap);
        }
        let w = form.eval(&y)?;
        Some((
            Term {
                generator: NNVector::new(y).ok()?,
                coefficient: 1.0,
                weight: w,
            },
            w,
        ))
    })
}

/// Best family of at most `k` disjoint blocks of `supp(x)`; under `Super` the
/// blocks must cover the support. `block` returns the member on a block, or
/// `None` when no member fits it.
fn blocks(
    x: &NNVector,
    k: usize,
    direction: Direction,
    block: impl Fn(SubsetMask) -> Option<(Term, f64)>,
) -> Result<IntegralResult> {
    let support: Vec<usize> = x.support().iter().collect();
    let s = support.len();
    if s == 0 {
        return Ok(IntegralResult::exact(0.0, Vec::new()));
    }
    if s > MAX_BLOCK_SUPPORT {
        return Err(Error::SearchSpaceTooLarge {
            size: 1u128 << s,
            limit: 1u128 << MAX_BLOCK_SUPPORT,
        });
    }
    let size = 1usize << s;
    let global = |local: usize| {
        SubsetMask::from_indices((0..s).filter(|b| local >> b & 1 == 1).map(|b| support[b]))
    };
    let values: Vec<Option<f64>> = (0..size)
        .map(|t| {
            if t == 0 {
                None
            } else {
                block(global(t)).map(|b| b.1)
            }
        })
        .collect();
    let layers = k.min(s);
    let (worst, better): (f64, fn(f64, f64) -> bool) = match direction {
        Direction::Sub => (0.0, |a, b| a > b + 1e-12),
        Direction::Super => (f64::INFINITY, |a, b| a < b - 1e-12),
    };
    // best[j][S]: value of S with at most j blocks; choice 0 means the lowest element is left out
    let mut best = vec![vec![worst; size]; layers + 1];
    let mut choice = vec![vec![0usize; size]; layers + 1];
    best[0][0] = 0.0;
    for j in 1..=layers {
        best[j][0] = 0.0;
        for set in 1..size {
            let low = set & set.wrapping_neg();
            let mut top = worst;
            let mut pick = 0;
            if direction == Direction::Sub {
                top = best[j][set ^ low];
            }
            let rest = set ^ low;
            let mut sub = rest;
            loop {
                let t = sub | low;
                if let Some(v) = values[t] {
                    let cand = v + best[j - 1][set ^ t];
                    if better(cand, top) {
                        top = cand;
                        pick = t;
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
            best[j][set] = top;
            choice[j][set] = pick;
        }
    }
    let value = best[layers][size - 1];
    if !value.is_finite() {
        return Ok(IntegralResult::infeasible());
    }
    let mut witness = Vec::new();
    let (mut set, mut j) = (size - 1, layers);
    while set != 0 && j > 0 {
        let t = choice[j][set];
        if t == 0 {
            set ^= set & set.wrapping_neg();
            continue;
        }
        let (term, _) = block(global(t)).expect("block value was defined");
        if term.contribution() > 0.0 || direction == Direction::Super {
            witness.push(term);
        }
        set ^= t;
        j -= 1;
    }
    Ok(IntegralResult::exact(value, witness))
}

/// Sub-integral over collections of at most `k` members.
pub fn fixed_length_integral(
    a: &Weighting,
    x: &NNVector,
    k: usize,
    step: f64,
) -> Result<IntegralResult> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "fixed length must be positive".into(),
        ));
    }
    let n = x.len();
    match a {
        Weighting::ClosedForm(form) if k == 1 => {
            let cap = form.domain_upper().unwrap_or(f64::INFINITY);
            let y = NNVector::new(x.iter().map(|v| v.min(cap)).collect())?;
            let w = form
                .eval(&y)
                .ok_or_else(|| Error::UndefinedWeight(y.as_slice().to_vec()))?;
            if x.is_zero() {
                return Ok(IntegralResult::exact(0.0, Vec::new()));
            }
            Ok(IntegralResult::exact(
                w,
                vec![Term {
                    generator: y,
                    coefficient: 1.0,
                    weight: w,
                }],
            ))
        }
        Weighting::CapacityMin(m) if k == 1 => {
            crate::domain::check_len(m.n(), n)?;
            let base = Base::new(
                DecompSystem::indicators(n, CollectionConstraint::Any)?,
                a.clone(),
            )?;
            super::max_pseudo_integral(&base, x)
        }
        _ => {
            let base = weighting_base(a, n, CollectionConstraint::MaxParts(k), step)?;
            super::sub_integral(&base, x)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical;
    use crate::domain::Capacity;
    use crate::testutil::{random_capacity, random_point, workers_nu};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> NNVector {
        NNVector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn one_part_is_the_weighting_itself() {
        let a = Weighting::ClosedForm(ClosedForm::MaxLog);
        let x = v(&[0.7, 2.0]);
        let want = ClosedForm::MaxLog.eval(&x).unwrap();
        assert!((fixed_length_integral(&a, &x, 1, 0.25).unwrap().value - want).abs() < 1e-12);
        assert!((disjoint_support_integral(&a, &x, 1).unwrap().value - want).abs() < 1e-12);
    }

    #[test]
    fn disjoint_blocks_reproduce_pan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=5 {
            let m = random_capacity(&mut rng, n);
            let x = v(&random_point(&mut rng, n, 3.0));
            let r =
                disjoint_support_integral(&Weighting::CapacityInduced(m.clone()), &x, n).unwrap();
            assert!((r.value - classical::pan(&m, &x).unwrap()).abs() < 1e-9);
            assert!(r.witness_is_valid(&x, Direction::Sub, 1e-9));
        }
    }

    #[test]
    fn disjoint_min_capacity_one_block_is_sugeno() {
        let m = workers_nu();
        let x = v(&[0.5, 2.0, 1.5, 0.2]);
        let r = disjoint_support_integral(&Weighting::CapacityMin(m.clone()), &x, 1).unwrap();
        assert!((r.value - classical::sugeno(&m, &x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn zero_query_everywhere() {
        let z = v(&[0.0, 0.0]);
        let a = Weighting::ClosedForm(ClosedForm::Product);
        assert_eq!(disjoint_support_integral(&a, &z, 2).unwrap().value, 0.0);
        assert_eq!(fixed_length_integral(&a, &z, 1, 0.5).unwrap().value, 0.0);
        assert_eq!(comonotone_integral(&a, &z, 0.5).unwrap().value, 0.0);
    }

    #[test]
    fn linear_weighting_is_its_own_transform() {
        let a = Weighting::ClosedForm(ClosedForm::WeightedSum(vec![1.0, 2.0]));
        let pts = vec![v(&[1.0, 0.5]), v(&[0.25, 2.0])];
        let lower = superadditive_transform_batch(&a, &pts, None, 0.125).unwrap();
        let upper = subadditive_transform_batch(&a, &pts, None, 0.125).unwrap();
        for ((x, lo), hi) in pts.iter().zip(&lower).zip(&upper) {
            let want = x[0] + 2.0 * x[1];
            assert!((lo.value - want).abs() < 1e-9);
            assert!((hi.value - want).abs() < 1e-9);
        }
    }

    #[test]
    fn comonotone_capacity_is_choquet() {
        let m = Capacity::from_fn(3, |s| (s.len() as f64).powi(2)).unwrap();
        let x = v(&[0.2, 1.0, 0.6]);
        let r = comonotone_integral(&Weighting::CapacityInduced(m.clone()), &x, 0.1).unwrap();
        assert!((r.value - classical::choquet(&m, &x).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn one_axis_query_is_the_axis_transform() {
        let a = Weighting::ClosedForm(ClosedForm::MaxLog);
        let x = v(&[0.0, 2.0]);
        let full = superadditive_transform(&a, &x, None, 1.0 / 32.0).unwrap();
        let como = comonotone_integral(&a, &x, 1.0 / 32.0).unwrap();
        assert!((full.value - como.value).abs() < 1e-12);
    }

    #[test]
    fn disjoint_super_cover() {
        // cover (0.5, 0.5) by disjoint members of the unit box under x + y - xy
        let r = disjoint_closed_form(
            &ClosedForm::ProbabilisticSum,
            Some(1.0),
            &v(&[0.5, 0.5]),
            2,
            Direction::Super,
        )
        .unwrap();
        assert!((r.value - 0.75).abs() < 1e-12);
        let r = disjoint_closed_form(
            &ClosedForm::ProbabilisticSum,
            Some(1.0),
            &v(&[1.5, 0.5]),
            2,
            Direction::Super,
        )
        .unwrap();
        assert_eq!(r.status, super::super::Status::InfeasibleDomain);
    }
}
