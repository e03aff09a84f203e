//! Brute-force reference values: every admissible multiplicity vector is
//! enumerated and the collection constraint is checked member by member.
//! Slow on purpose and independent of the solvers it is used to check.

use crate::domain::{
    check_len, comonotone_unchecked, indicator, Base, Capacity, CoefficientDomain,
    CollectionConstraint, Generators, NNVector, SubsetMask, Weighting, EPS,
};
use crate::error::{Error, Result};

/// Default cap on enumerated nodes.
pub const NODE_LIMIT: u64 = 10_000_000;

/// Largest ground set for partition enumeration.
pub const MAX_PARTITION_GROUND_SET: usize = 10;

#[derive(Debug, Clone, Copy)]
pub struct BruteOptions {
    pub node_limit: u64,
    /// Lattice spacing for real coefficients; without it real systems are refused.
    pub coefficient_step: Option<f64>,
}

impl Default for BruteOptions {
    fn default() -> Self {
        Self {
            node_limit: NODE_LIMIT,
            coefficient_step: None,
        }
    }
}

pub fn brute_sub(base: &Base, x: &NNVector) -> Result<f64> {
    brute_sub_with(base, x, &BruteOptions::default())
}

pub fn brute_sub_with(base: &Base, x: &NNVector, opts: &BruteOptions) -> Result<f64> {
    check_len(base.n(), x.len())?;
    if let Generators::Collections(c) = &base.system.generators {
        return Ok(scan(&base.weighting, c, x, true)?.unwrap_or(0.0));
    }
    let search = Search::new(base, x, opts, true)?;
    Ok(search.run()?.unwrap_or(0.0))
}

/// `None` when no admissible collection covers `x`.
pub fn brute_super(base: &Base, x: &NNVector) -> Result<Option<f64>> {
    brute_super_with(base, x, &BruteOptions::default())
}

pub fn brute_super_with(base: &Base, x: &NNVector, opts: &BruteOptions) -> Result<Option<f64>> {
    check_len(base.n(), x.len())?;
    if x.iter().all(|&v| v == 0.0) {
        return Ok(Some(0.0));
    }
    if let Generators::Collections(c) = &base.system.generators {
        return scan(&base.weighting, c, x, false);
    }
    Search::new(base, x, opts, false)?.run()
}

fn scan(
    w: &Weighting,
    collections: &[Vec<NNVector>],
    x: &NNVector,
    below: bool,
) -> Result<Option<f64>> {
    let mut best: Option<f64> = None;
    for c in collections {
        let ok = (0..x.len()).all(|i| {
            let s: f64 = c.iter().map(|y| y[i]).sum();
            if below {
                s <= x[i] + EPS
            } else {
                s >= x[i] - EPS
            }
        });
        if !ok {
            continue;
        }
        let mut v = 0.0;
        for y in c {
            v += w
                .eval(y)
                .ok_or_else(|| Error::UndefinedWeight(y.as_slice().to_vec()))?;
        }
        best = Some(match best {
            None => v,
            Some(b) if below => b.max(v),
            Some(b) => b.min(v),
        });
    }
    Ok(best)
}

struct Search<'a> {
    base: &'a Base,
    x: &'a NNVector,
    gens: Vec<NNVector>,
    /// Lattice spacing of multiplicities.
    unit: f64,
    /// `A(g)` per generator.
    weights: Vec<f64>,
    /// `A(g) / |g|_1`, used to bound the cost of a partial cover.
    per_unit: Vec<f64>,
    below: bool,
    limit: u64,
}

impl<'a> Search<'a> {
    fn new(base: &'a Base, x: &'a NNVector, opts: &BruteOptions, below: bool) -> Result<Self> {
        let n = base.n();
        let gens: Vec<NNVector> = match &base.system.generators {
            Generators::List(list) => list.iter().filter(|g| !g.is_zero()).cloned().collect(),
            Generators::Indicators => (1..(1u32 << n))
                .map(|m| indicator(SubsetMask(m), 1.0, n))
                .collect(),
            _ => {
                return Err(Error::Unsupported(
                    "brute force needs a finite generator list".into(),
                ))
            }
        };
        let unit = match base.system.coefficients {
            CoefficientDomain::NonNegReal => {
                opts.coefficient_step.filter(|s| *s > 0.0).ok_or_else(|| {
                    Error::Unsupported("real coefficients need a coefficient step".into())
                })?
            }
            _ => 1.0,
        };
        let mut gens = gens;
        if !below {
            // cheap covers first so the incumbent is good early; order does not affect the value
            let rate = |g: &NNVector| base.weighting.eval(g).unwrap_or(0.0) / g.iter().sum::<f64>();
            gens.sort_by(|a, b| rate(a).total_cmp(&rate(b)));
        }
        let weights: Vec<f64> = gens
            .iter()
            .map(|g| base.weighting.eval(g).unwrap_or(0.0))
            .collect();
        let per_unit = gens
            .iter()
            .zip(&weights)
            .map(|(g, w)| w / g.iter().sum::<f64>())
            .collect();
        Ok(Self {
            base,
            x,
            gens,
            unit,
            weights,
            per_unit,
            below,
            limit: opts.node_limit,
        })
    }

    fn run(&self) -> Result<Option<f64>> {
        let mut counts = vec![0u64; self.gens.len()];
        let mut residual: Vec<f64> = self.x.to_vec();
        let mut best: Option<f64> = None;
        let mut nodes = 0u64;
        self.descend(0, &mut counts, &mut residual, 0.0, &mut best, &mut nodes)?;
        Ok(best)
    }

    fn member_value(&self, j: usize, count: u64) -> Result<f64> {
        let g = &self.gens[j];
        let w = &self.base.weighting;
        let undefined = |v: &NNVector| Error::UndefinedWeight(v.as_slice().to_vec());
        Ok(match self.base.system.coefficients {
            CoefficientDomain::Unit => count as f64 * w.eval(g).ok_or_else(|| undefined(g))?,
            _ => {
                let alpha = count as f64 * self.unit;
                if w.is_homogeneous() {
                    alpha * w.eval(g).ok_or_else(|| undefined(g))?
                } else {
                    let y = g.scaled(alpha);
                    w.eval(&y).ok_or_else(|| undefined(&y))?
                }
            }
        })
    }

    fn descend(
        &self,
        j: usize,
        counts: &mut Vec<u64>,
        residual: &mut Vec<f64>,
        value: f64,
        best: &mut Option<f64>,
        nodes: &mut u64,
    ) -> Result<()> {
        *nodes += 1;
        if *nodes > self.limit {
            return Err(Error::SearchSpaceTooLarge {
                size: *nodes as u128,
                limit: self.limit as u128,
            });
        }
        if !self.below {
            let Some(bound) = self.cover_bound(j, residual) else {
                return Ok(());
            };
            if let Some(b) = *best {
                if value + bound >= b - EPS {
                    return Ok(());
                }
            }
        }
        if j == self.gens.len() {
            let covered = self.below || residual.iter().all(|&r| r <= EPS);
            if covered && self.admissible(counts) {
                *best = Some(match *best {
                    None => value,
                    Some(b) if self.below => b.max(value),
                    Some(b) => b.min(value),
                });
            }
            return Ok(());
        }
        let g = self.gens[j].clone();
        let cap = if self.below {
            g.iter()
                .zip(residual.iter())
                .filter(|(gi, _)| **gi > 0.0)
                .map(|(gi, r)| ((r / (self.unit * gi)) + 1e-9).floor().max(0.0) as u64)
                .min()
                .unwrap_or(0)
        } else {
            // copies past the point where g's support is covered only add cost
            g.iter()
                .zip(residual.iter())
                .filter(|(gi, r)| **gi > 0.0 && **r > EPS)
                .map(|(gi, r)| (r / (self.unit * gi) - 1e-9).ceil().max(0.0) as u64)
                .max()
                .unwrap_or(0)
        };
        let order: Vec<u64> = if self.below {
            (0..=cap).collect()
        } else {
            (0..=cap).rev().collect()
        };
        for count in order {
            let v = if count == 0 {
                0.0
            } else {
                self.member_value(j, count)?
            };
            let step = count as f64 * self.unit;
            for (r, gi) in residual.iter_mut().zip(g.iter()) {
                *r -= step * gi;
            }
            counts[j] = count;
            let result = self.descend(j + 1, counts, residual, value + v, best, nodes);
            for (r, gi) in residual.iter_mut().zip(g.iter()) {
                *r += step * gi;
            }
            result?;
        }
        counts[j] = 0;
        Ok(())
    }

    /// Lower bound on the cost of covering `residual` with generators `j..`,
    /// or `None` when some coordinate can no longer be covered.
    fn cover_bound(&self, j: usize, residual: &[f64]) -> Option<f64> {
        let rest = &self.gens[j..];
        let open: Vec<usize> = (0..residual.len()).filter(|&i| residual[i] > EPS).collect();
        if open.iter().any(|&i| rest.iter().all(|g| g[i] <= 0.0)) {
            return None;
        }
        // per-unit price is only constant when members scale linearly
        if self.base.system.coefficients != CoefficientDomain::Unit
            && !self.base.weighting.is_homogeneous()
        {
            return Some(0.0);
        }
        let price = self.per_unit[j..]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let need: f64 = open.iter().map(|&i| residual[i]).sum();
        let mut bound = if price.is_finite() { need * price } else { 0.0 };
        // each coordinate on its own must be paid for at its cheapest rate
        for &i in &open {
            let rate = (j..self.gens.len())
                .filter(|&k| self.gens[k][i] > 0.0)
                .map(|k| self.weights[k] / self.gens[k][i])
                .fold(f64::INFINITY, f64::min);
            bound = bound.max(residual[i] * rate);
        }
        Some(bound)
    }

    /// Checks the collection constraint on the expanded member list.
    fn admissible(&self, counts: &[u64]) -> bool {
        let mut members: Vec<(NNVector, SubsetMask)> = Vec::new();
        for (j, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let g = &self.gens[j];
            match self.base.system.coefficients {
                CoefficientDomain::Unit => {
                    for _ in 0..c {
                        members.push((g.clone(), g.support()));
                    }
                }
                _ => members.push((g.scaled(c as f64 * self.unit), g.support())),
            }
        }
        let pairwise = |ok: &dyn Fn(&(NNVector, SubsetMask), &(NNVector, SubsetMask)) -> bool| {
            members
                .iter()
                .enumerate()
                .all(|(a, p)| members[a + 1..].iter().all(|q| ok(p, q)))
        };
        match self.base.system.constraint {
            CollectionConstraint::Any => true,
            CollectionConstraint::MaxParts(k) => members.len() <= k,
            CollectionConstraint::Chain => {
                pairwise(&|p, q| p.1.is_subset_of(q.1) || q.1.is_subset_of(p.1))
            }
            CollectionConstraint::Comonotone => pairwise(&|p, q| comonotone_unchecked(&p.0, &q.0)),
            CollectionConstraint::Partition => pairwise(&|p, q| p.1.is_disjoint(q.1)),
            CollectionConstraint::DisjointSupport(k) => {
                members.len() <= k && pairwise(&|p, q| p.1.is_disjoint(q.1))
            }
        }
    }
}

/// `max sum_B m(B) min_B x` over all set partitions of the ground set,
/// enumerated as restricted growth strings.
pub fn brute_partitions(m: &Capacity, x: &NNVector) -> Result<f64> {
    let n = m.n();
    check_len(n, x.len())?;
    if n > MAX_PARTITION_GROUND_SET {
        return Err(Error::SearchSpaceTooLarge {
            size: n as u128,
            limit: MAX_PARTITION_GROUND_SET as u128,
        });
    }
    let mut labels = vec![0usize; n];
    let mut best = f64::NEG_INFINITY;
    loop {
        let blocks = labels.iter().max().map_or(0, |&b| b + 1);
        let mut total = 0.0;
        for b in 0..blocks {
            let set = SubsetMask::from_indices((0..n).filter(|&i| labels[i] == b));
            let low = set.iter().map(|i| x[i]).fold(f64::INFINITY, f64::min);
            total += m.get(set) * low;
        }
        best = best.max(total);
        // next restricted growth string: labels[i] <= 1 + max(labels[..i])
        let mut i = n;
        loop {
            if i <= 1 {
                return Ok(best);
            }
            i -= 1;
            let prefix_max = labels[..i].iter().copied().max().unwrap_or(0);
            if labels[i] <= prefix_max {
                labels[i] += 1;
                labels[i + 1..].iter_mut().for_each(|l| *l = 0);
                break;
            }
        }
    }
}
