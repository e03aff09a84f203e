//! Lattice dynamic programs for box-grid systems with a closed-form weighting.
//!
//! Members are grid points `h * g` of the box. For the unconstrained system the
//! table `f(z)` (best value with members summing to at most / at least `z`) is
//! filled in linear-index order; a point only becomes a generator of later
//! splits when its own weight strictly beats its best split, which keeps the
//! generator list short for most weightings.

use super::integrability::{closed_form_integrability, Integrability};
use super::{structured, Direction, IntegralResult, SolveOptions, Term};
use crate::domain::{ClosedForm, CollectionConstraint, NNVector, EPS};
use crate::error::{Error, Result};

/// Largest lattice table allocated.
const MAX_TABLE: usize = 20_000_000;

const NONE: u32 = u32::MAX;
const SELF: u32 = u32::MAX - 1;

#[allow(clippy::too_many_arguments)]
pub(crate) fn solve_system(
    form: &ClosedForm,
    n: usize,
    upper: Option<f64>,
    step: f64,
    constraint: CollectionConstraint,
    direction: Direction,
    points: &[NNVector],
    opts: &SolveOptions,
) -> Result<Vec<IntegralResult>> {
    let mut results: Vec<Option<IntegralResult>> = vec![None; points.len()];
    let mut pending = Vec::new();
    for (i, x) in points.iter().enumerate() {
        if x.is_zero() {
            results[i] = Some(IntegralResult::exact(0.0, Vec::new()));
            continue;
        }
        let can_diverge = direction == Direction::Sub
            && matches!(
                constraint,
                CollectionConstraint::Any
                    | CollectionConstraint::Chain
                    | CollectionConstraint::Comonotone
            );
        if can_diverge {
            if let Integrability::No { divergence } = closed_form_integrability(form, x, opts) {
                results[i] = Some(IntegralResult::unbounded(divergence));
                continue;
            }
        }
        pending.push(i);
    }
    if !pending.is_empty() {
        let subset: Vec<NNVector> = pending.iter().map(|&i| points[i].clone()).collect();
        let solved = match constraint {
            CollectionConstraint::Partition | CollectionConstraint::DisjointSupport(_) => {
                let k = match constraint {
                    CollectionConstraint::DisjointSupport(k) => k,
                    _ => n,
                };
                subset
                    .iter()
                    .map(|x| structured::disjoint_closed_form(form, upper, x, k, direction))
                    .collect::<Result<Vec<_>>>()?
            }
            _ => {
                let grid = Grid::new(n, upper, step, direction, &subset)?;
                match constraint {
                    CollectionConstraint::Any => grid.solve(form, None, opts)?,
                    CollectionConstraint::Comonotone => {
                        grid.over_orders(form, opts, |g, perm| {
                            perm.windows(2).all(|w| g[w[0]] <= g[w[1]])
                        })?
                    }
                    CollectionConstraint::Chain => grid.over_orders(form, opts, |g, perm| {
                        // supports are upper sets of the order
                        perm.windows(2).all(|w| g[w[0]] == 0 || g[w[1]] > 0)
                    })?,
                    CollectionConstraint::MaxParts(k) => grid.layered(form, k, opts)?,
                    CollectionConstraint::Partition | CollectionConstraint::DisjointSupport(_) => {
                        unreachable!()
                    }
                }
            }
        };
        for (i, r) in pending.into_iter().zip(solved) {
            results[i] = Some(r);
        }
    }
    Ok(results
        .into_iter()
        .map(|r| r.expect("every point solved"))
        .collect())
}

type Filter<'a> = &'a dyn Fn(&[u32], &[usize]) -> bool;

struct Grid<'p> {
    n: usize,
    step: f64,
    direction: Direction,
    /// Box side in lattice units.
    side: u32,
    dims: Vec<u32>,
    strides: Vec<usize>,
    size: usize,
    points: &'p [NNVector],
}

impl<'p> Grid<'p> {
    fn new(
        n: usize,
        upper: Option<f64>,
        step: f64,
        direction: Direction,
        points: &'p [NNVector],
    ) -> Result<Self> {
        let side = upper.map_or(u32::MAX, |u| (u / step + 1e-9).floor() as u32);
        let mut dims = vec![1u32; n];
        for x in points {
            for (d, &v) in dims.iter_mut().zip(x.iter()) {
                let hi = (v / step - 1e-9).ceil().max(0.0);
                if hi > 1e7 {
                    return Err(Error::SearchSpaceTooLarge {
                        size: hi as u128,
                        limit: MAX_TABLE as u128,
                    });
                }
                *d = (*d).max(hi as u32 + 1);
            }
        }
        let mut strides = Vec::with_capacity(n);
        let mut size: u128 = 1;
        for &d in &dims {
            strides.push(size as usize);
            size *= d as u128;
        }
        if size > MAX_TABLE as u128 {
            return Err(Error::SearchSpaceTooLarge {
                size,
                limit: MAX_TABLE as u128,
            });
        }
        Ok(Self {
            n,
            step,
            direction,
            side,
            dims,
            strides,
            size: size as usize,
            points,
        })
    }

    fn weight(&self, form: &ClosedForm, g: &[u32]) -> Option<f64> {
        if g.iter().any(|&c| c > self.side) {
            return None;
        }
        let y: Vec<f64> = g.iter().map(|&c| c as f64 * self.step).collect();
        form.eval(&y)
    }

    fn coords(&self, mut idx: usize, out: &mut [u32]) {
        for (c, &d) in out.iter_mut().zip(&self.dims) {
            *c = (idx % d as usize) as u32;
            idx /= d as usize;
        }
    }

    fn index(&self, c: &[u32]) -> usize {
        c.iter()
            .zip(&self.strides)
            .map(|(&v, &s)| v as usize * s)
            .sum()
    }

    fn start(&self) -> f64 {
        match self.direction {
            Direction::Sub => 0.0,
            Direction::Super => f64::INFINITY,
        }
    }

    fn better(&self, a: f64, b: f64) -> bool {
        match self.direction {
            Direction::Sub => a > b + EPS,
            Direction::Super => a < b - EPS,
        }
    }

    /// Lattice targets of `x`: the point the witness is built for, and the
    /// other rounding used for the resolution gap.
    fn targets(&self, x: &NNVector) -> (Vec<u32>, Vec<u32>) {
        let lo: Vec<u32> = x
            .iter()
            .map(|&v| (v / self.step + 1e-9).floor() as u32)
            .collect();
        let hi: Vec<u32> = x
            .iter()
            .map(|&v| (v / self.step - 1e-9).ceil().max(0.0) as u32)
            .collect();
        match self.direction {
            Direction::Sub => (lo, hi),
            Direction::Super => (hi, lo),
        }
    }

    /// Irreducible-generator recurrence. `perm` is passed to the filter.
    fn table(
        &self,
        form: &ClosedForm,
        filter: Option<(Filter<'_>, &[usize])>,
        opts: &SolveOptions,
    ) -> Result<Table> {
        let mut value = vec![self.start(); self.size];
        let mut choice = vec![NONE; self.size];
        value[0] = 0.0;
        let mut gens: Vec<(Vec<u32>, usize, f64)> = Vec::new();
        let mut z = vec![0u32; self.n];
        let mut work: u64 = 0;
        for idx in 1..self.size {
            self.coords(idx, &mut z);
            let mut best = self.start();
            let mut pick = NONE;
            for (k, (g, off, w)) in gens.iter().enumerate() {
                if g.iter().zip(&z).all(|(a, b)| a <= b) {
                    let cand = w + value[idx - off];
                    if self.better(cand, best) {
                        best = cand;
                        pick = k as u32;
                    }
                }
            }
            work += gens.len() as u64;
            if work > opts.grid_work_limit {
                return Err(Error::SearchSpaceTooLarge {
                    size: work as u128,
                    limit: opts.grid_work_limit as u128,
                });
            }
            let allowed = filter.is_none_or(|(f, perm)| f(&z, perm));
            if allowed {
                if let Some(a) = self.weight(form, &z) {
                    if self.better(a, best) {
                        best = a;
                        pick = SELF;
                        gens.push((z.clone(), idx, a));
                    }
                }
            }
            value[idx] = best;
            choice[idx] = match pick {
                SELF => SELF,
                NONE => NONE,
                k => gens[k as usize].1 as u32,
            };
        }
        Ok(Table { value, choice })
    }

    fn solve(
        &self,
        form: &ClosedForm,
        filter: Option<(Filter<'_>, &[usize])>,
        opts: &SolveOptions,
    ) -> Result<Vec<IntegralResult>> {
        let table = self.table(form, filter, opts)?;
        Ok(self
            .points
            .iter()
            .map(|x| self.read(form, &table, x))
            .collect())
    }

    fn over_orders(
        &self,
        form: &ClosedForm,
        opts: &SolveOptions,
        consistent: impl Fn(&[u32], &[usize]) -> bool,
    ) -> Result<Vec<IntegralResult>> {
        let mut best: Vec<Option<IntegralResult>> = vec![None; self.points.len()];
        for perm in permutations(self.n) {
            let results = self.solve(form, Some((&consistent, &perm)), opts)?;
            for (slot, r) in best.iter_mut().zip(results) {
                let replace = match slot {
                    None => true,
                    Some(cur) => self.better(r.value, cur.value),
                };
                if replace {
                    *slot = Some(r);
                }
            }
        }
        Ok(best
            .into_iter()
            .map(|r| r.expect("at least one order"))
            .collect())
    }

    fn read(&self, form: &ClosedForm, table: &Table, x: &NNVector) -> IntegralResult {
        let (target, other) = self.targets(x);
        let at = self.index(&target);
        let value = table.value[at];
        if !value.is_finite() {
            return IntegralResult::infeasible();
        }
        let gap = (table.value[self.index(&other)] - value).abs();
        let mut members: Vec<Vec<u32>> = Vec::new();
        let mut idx = at;
        let mut z = vec![0u32; self.n];
        loop {
            match table.choice[idx] {
                NONE => break,
                SELF => {
                    self.coords(idx, &mut z);
                    members.push(z.clone());
                    break;
                }
                off => {
                    self.coords(off as usize, &mut z);
                    members.push(z.clone());
                    idx -= off as usize;
                }
            }
        }
        IntegralResult::approximate(value, gap, Some(self.terms(form, members)))
    }

    fn terms(&self, form: &ClosedForm, mut members: Vec<Vec<u32>>) -> Vec<Term> {
        members.sort();
        let mut out: Vec<Term> = Vec::new();
        for g in members {
            let generator = NNVector::new(g.iter().map(|&c| c as f64 * self.step).collect())
                .expect("grid point");
            match out.last_mut() {
                Some(t) if t.generator == generator => t.coefficient += 1.0,
                _ => {
                    let weight = self.weight(form, &g).unwrap_or(0.0);
                    out.push(Term {
                        generator,
                        coefficient: 1.0,
                        weight,
                    });
                }
            }
        }
        out
    }

    /// At most `k` members: `F_j(z) = best(F_{j-1}(z), A(g) + F_{j-1}(z - g))`
    /// over all box points `g <= z`.
    fn layered(
        &self,
        form: &ClosedForm,
        k: usize,
        opts: &SolveOptions,
    ) -> Result<Vec<IntegralResult>> {
        let mut weights = vec![None; self.size];
        let mut z = vec![0u32; self.n];
        for (idx, w) in weights.iter_mut().enumerate().skip(1) {
            self.coords(idx, &mut z);
            *w = self.weight(form, &z);
        }
        let mut prev = vec![self.start(); self.size];
        prev[0] = 0.0;
        let mut layers: Vec<Vec<u32>> = Vec::with_capacity(k);
        let mut work: u64 = 0;
        let mut g = vec![0u32; self.n];
        for _ in 0..k {
            let mut cur = prev.clone();
            let mut choice = vec![NONE; self.size];
            for idx in 1..self.size {
                self.coords(idx, &mut z);
                g.iter_mut().for_each(|c| *c = 0);
                // odometer over 0 < g <= z
                loop {
                    let mut pos = 0;
                    while pos < self.n && g[pos] == z[pos] {
                        g[pos] = 0;
                        pos += 1;
                    }
                    if pos == self.n {
                        break;
                    }
                    g[pos] += 1;
                    let gi = self.index(&g);
                    work += 1;
                    if let Some(w) = weights[gi] {
                        let cand = w + prev[idx - gi];
                        if self.better(cand, cur[idx]) {
                            cur[idx] = cand;
                            choice[idx] = gi as u32;
                        }
                    }
                }
                if work > opts.grid_work_limit {
                    return Err(Error::SearchSpaceTooLarge {
                        size: work as u128,
                        limit: opts.grid_work_limit as u128,
                    });
                }
            }
            layers.push(choice);
            prev = cur;
        }
        Ok(self
            .points
            .iter()
            .map(|x| {
                let (target, other) = self.targets(x);
                let at = self.index(&target);
                let value = prev[at];
                if !value.is_finite() {
                    return IntegralResult::infeasible();
                }
                let gap = (prev[self.index(&other)] - value).abs();
                let mut members = Vec::new();
                let mut idx = at;
                for choice in layers.iter().rev() {
                    let gi = choice[idx];
                    if gi != NONE {
                        let mut c = vec![0u32; self.n];
                        self.coords(gi as usize, &mut c);
                        members.push(c);
                        idx -= gi as usize;
                    }
                }
                IntegralResult::approximate(value, gap, Some(self.terms(form, members)))
            })
            .collect())
    }
}

struct Table {
    value: Vec<f64>,
    /// `SELF`, `NONE`, or the linear index of the generator split off.
    choice: Vec<u32>,
}

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    heap(n, &mut perm, &mut out);
    out.sort();
    out
}

fn heap(k: usize, perm: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(perm.clone());
        return;
    }
    for i in 0..k {
        heap(k - 1, perm, out);
        if k.is_multiple_of(2) {
            perm.swap(i, k - 1);
        } else {
            perm.swap(0, k - 1);
        }
    }
}
