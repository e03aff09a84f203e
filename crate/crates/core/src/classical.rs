//! Closed-form and polynomial algorithms for the integrals that arise from
//! capacity-induced weightings on set-structured systems.

use crate::domain::{check_len, Capacity, SubsetMask, EPS};
use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram, LpStatus, Relation, Sense};

/// Largest ground set for which the concave and convex programs are built
/// (one variable per nonempty subset).
pub const MAX_LP_GROUND_SET: usize = 12;

fn check(m: &Capacity, x: &[f64]) -> Result<()> {
    check_len(m.n(), x.len())
}

/// Sorted-order Choquet integral.
pub fn choquet(m: &Capacity, x: &[f64]) -> Result<f64> {
    Ok(choquet_terms(m, x)?
        .iter()
        .map(|(set, c)| c * m.get(*set))
        .sum())
}

/// Chain decomposition realizing the Choquet integral: `(level set, increment)`
/// pairs with positive increments, outermost set first.
pub fn choquet_terms(m: &Capacity, x: &[f64]) -> Result<Vec<(SubsetMask, f64)>> {
    check(m, x)?;
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    let mut terms = Vec::new();
    let mut prev = 0.0;
    for (pos, &i) in order.iter().enumerate() {
        let step = x[i] - prev;
        if step > 0.0 {
            let level = SubsetMask::from_indices(order[pos..].iter().copied());
            terms.push((level, step));
        }
        prev = x[i];
    }
    Ok(terms)
}

fn min_over(set: SubsetMask, x: &[f64]) -> f64 {
    set.iter().map(|i| x[i]).fold(f64::INFINITY, f64::min)
}

/// `max_E m(E) * min_{i in E} x_i` over nonempty `E`.
pub fn shilkret(m: &Capacity, x: &[f64]) -> Result<f64> {
    check(m, x)?;
    Ok((1..(1u32 << m.n()))
        .map(SubsetMask)
        .map(|e| m.get(e) * min_over(e, x))
        .fold(0.0, f64::max))
}

/// `max_E min(min_{i in E} x_i, m(E))` over nonempty `E`. No normalization of
/// `m` is assumed.
pub fn sugeno(m: &Capacity, x: &[f64]) -> Result<f64> {
    check(m, x)?;
    Ok((1..(1u32 << m.n()))
        .map(SubsetMask)
        .map(|e| min_over(e, x).min(m.get(e)))
        .fold(0.0, f64::max))
}

/// PAN integral by the subset dynamic program
/// `f(S) = max_{T subset S, T nonempty} f(S \ T) + m(T) min_T x`.
pub fn pan(m: &Capacity, x: &[f64]) -> Result<f64> {
    Ok(pan_blocks(m, x)?.0)
}

/// PAN value together with an optimal partition of the ground set.
pub fn pan_blocks(m: &Capacity, x: &[f64]) -> Result<(f64, Vec<SubsetMask>)> {
    check(m, x)?;
    let n = m.n();
    let size = 1usize << n;
    let mut minx = vec![f64::INFINITY; size];
    for mask in 1..size {
        let low = mask.trailing_zeros() as usize;
        minx[mask] = minx[mask & (mask - 1)].min(x[low]);
    }
    let mut best = vec![0.0; size];
    let mut choice = vec![0usize; size];
    for s in 1..size {
        // the block holding the lowest element of s
        let low = s & s.wrapping_neg();
        let rest = s ^ low;
        let mut sub = rest;
        let mut top = f64::NEG_INFINITY;
        loop {
            let t = sub | low;
            let v = best[s ^ t] + m.get(SubsetMask(t as u32)) * minx[t];
            if v > top + EPS || (v >= top - EPS && t < choice[s]) {
                top = top.max(v);
                choice[s] = t;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        best[s] = top;
    }
    let mut blocks = Vec::new();
    let mut s = size - 1;
    while s != 0 {
        blocks.push(SubsetMask(choice[s] as u32));
        s ^= choice[s];
    }
    Ok((best[size - 1], blocks))
}

fn subset_program(m: &Capacity, x: &[f64], sense: Sense) -> Result<lp::LpSolution> {
    check(m, x)?;
    let n = m.n();
    if n > MAX_LP_GROUND_SET {
        return Err(Error::SearchSpaceTooLarge {
            size: 1 << n,
            limit: 1 << MAX_LP_GROUND_SET,
        });
    }
    let sets: Vec<SubsetMask> = (1..(1u32 << n)).map(SubsetMask).collect();
    let mut program = LinearProgram::new(sense, sets.iter().map(|&e| m.get(e)).collect());
    let relation = match sense {
        Sense::Maximize => Relation::Le,
        Sense::Minimize => Relation::Ge,
    };
    for (i, &xi) in x.iter().enumerate() {
        program.constrain(
            sets.iter()
                .map(|e| if e.contains(i) { 1.0 } else { 0.0 })
                .collect(),
            relation,
            xi,
        );
    }
    lp::simplex_solve(&program)
}

/// Concave integral: `max sum a_E m(E)` subject to `sum a_E 1_E <= x`.
pub fn concave(m: &Capacity, x: &[f64]) -> Result<f64> {
    let sol = subset_program(m, x, Sense::Maximize)?;
    debug_assert_eq!(sol.status, LpStatus::Optimal);
    Ok(sol.objective)
}

/// Convex integral: `min sum a_E m(E)` subject to `sum a_E 1_E >= x`.
pub fn convex(m: &Capacity, x: &[f64]) -> Result<f64> {
    let sol = subset_program(m, x, Sense::Minimize)?;
    debug_assert_eq!(sol.status, LpStatus::Optimal);
    Ok(sol.objective)
}

/// A capacity that changes with the level `t`, piecewise constant in `t`.
///
/// Slice `i` applies on `[breakpoints[i], breakpoints[i + 1])`; the last slice
/// runs up to `upper`, or forever when `upper` is `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelDependentCapacity {
    breakpoints: Vec<f64>,
    slices: Vec<Capacity>,
    upper: Option<f64>,
}

impl LevelDependentCapacity {
    pub fn new(breakpoints: Vec<f64>, slices: Vec<Capacity>, upper: Option<f64>) -> Result<Self> {
        if breakpoints.first() != Some(&0.0) {
            return Err(Error::InvalidParameter("first breakpoint must be 0".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1]))
            || breakpoints.iter().any(|b| !b.is_finite())
        {
            return Err(Error::InvalidParameter(
                "breakpoints must be finite and strictly increasing".into(),
            ));
        }
        check_len(breakpoints.len(), slices.len())?;
        let n = slices[0].n();
        for s in &slices {
            check_len(n, s.n())?;
            crate::domain::validate_capacity(s).map_err(Error::InvalidCapacity)?;
        }
        if let Some(u) = upper {
            if !(u > *breakpoints.last().unwrap()) {
                return Err(Error::InvalidParameter(
                    "upper end must exceed the last breakpoint".into(),
                ));
            }
        }
        Ok(Self {
            breakpoints,
            slices,
            upper,
        })
    }

    /// The same capacity at every level.
    pub fn constant(m: Capacity) -> Self {
        Self {
            breakpoints: vec![0.0],
            slices: vec![m],
            upper: None,
        }
    }

    pub fn n(&self) -> usize {
        self.slices[0].n()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn slices(&self) -> &[Capacity] {
        &self.slices
    }

    pub fn upper(&self) -> Option<f64> {
        self.upper
    }

    /// Capacity in force at level `t >= 0`.
    pub fn at(&self, t: f64) -> &Capacity {
        let idx = self
            .breakpoints
            .partition_point(|&b| b <= t)
            .saturating_sub(1);
        &self.slices[idx]
    }
}

/// `integral_0^inf nu_t({i : x_i >= t}) dt`, summed exactly over the intervals
/// on which the integrand is constant.
pub fn level_dependent_choquet(nu: &LevelDependentCapacity, x: &[f64]) -> Result<f64> {
    check_len(nu.n(), x.len())?;
    let top = x.iter().copied().fold(0.0, f64::max);
    if let Some(limit) = nu.upper {
        if top > limit + EPS {
            return Err(Error::LevelRange { value: top, limit });
        }
    }
    let mut cuts: Vec<f64> = x
        .iter()
        .copied()
        .chain(nu.breakpoints.iter().copied())
        .filter(|&t| t <= top)
        .collect();
    cuts.push(0.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let level = SubsetMask::from_indices((0..x.len()).filter(|&i| x[i] >= b));
        total += (b - a) * nu.at(a).get(level);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_capacity, random_point, workers_nu};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform(n: usize) -> Capacity {
        Capacity::from_fn(n, |e| if e.is_empty() { 0.0 } else { 1.0 }).unwrap()
    }

    #[test]
    fn additive_choquet_is_weighted_sum() {
        let m = Capacity::additive(&[0.5, 2.0, 1.0]).unwrap();
        let x = [3.0, 1.0, 2.0];
        assert!((choquet(&m, &x).unwrap() - (1.5 + 2.0 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn uniform_capacity_gives_max() {
        let m = uniform(3);
        let x = [0.3, 1.7, 0.9];
        assert!((choquet(&m, &x).unwrap() - 1.7).abs() < 1e-12);
        assert!((shilkret(&m, &x).unwrap() - 1.7).abs() < 1e-12);
    }

    #[test]
    fn shilkret_on_constant_vector() {
        let m = Capacity::additive(&[1.0, 2.0, 3.0]).unwrap();
        assert!((shilkret(&m, &[2.0; 3]).unwrap() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn sugeno_saturates() {
        let m = Capacity::additive(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(sugeno(&m, &[2.5; 3]).unwrap(), 2.5);
        let top_only =
            Capacity::from_fn(3, |e| if e == SubsetMask::full(3) { 4.0 } else { 0.0 }).unwrap();
        assert_eq!(sugeno(&top_only, &[3.0, 1.5, 2.0]).unwrap(), 1.5);
    }

    /// Independent partition enumeration by recursive block assignment.
    fn partitions_oracle(m: &Capacity, x: &[f64]) -> f64 {
        fn rec(i: usize, blocks: &mut Vec<u32>, m: &Capacity, x: &[f64], best: &mut f64) {
            if i == x.len() {
                let v: f64 = blocks
                    .iter()
                    .map(|&b| m.get(SubsetMask(b)) * min_over(SubsetMask(b), x))
                    .sum();
                *best = best.max(v);
                return;
            }
            for k in 0..blocks.len() {
                blocks[k] |= 1 << i;
                rec(i + 1, blocks, m, x, best);
                blocks[k] &= !(1 << i);
            }
            blocks.push(1 << i);
            rec(i + 1, blocks, m, x, best);
            blocks.pop();
        }
        let mut best = 0.0;
        rec(0, &mut Vec::new(), m, x, &mut best);
        best
    }

    #[test]
    fn pan_of_additive_is_lebesgue() {
        let m = Capacity::additive(&[0.5, 2.0, 1.0, 0.25]).unwrap();
        let x = [3.0, 1.0, 2.0, 4.0];
        assert!((pan(&m, &x).unwrap() - (1.5 + 2.0 + 2.0 + 1.0)).abs() < 1e-12);
        let single = Capacity::additive(&[0.7]).unwrap();
        assert!((pan(&single, &[3.0]).unwrap() - 2.1).abs() < 1e-12);
    }

    #[test]
    fn pan_matches_partition_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..60 {
            let n = rng.gen_range(1..=5);
            let m = random_capacity(&mut rng, n);
            let x = random_point(&mut rng, n, 3.0);
            let (v, blocks) = pan_blocks(&m, &x).unwrap();
            assert!((v - partitions_oracle(&m, &x)).abs() < 1e-9);
            let cover = blocks.iter().fold(SubsetMask::EMPTY, |acc, b| {
                assert!(acc.is_disjoint(*b));
                acc.union(*b)
            });
            assert_eq!(cover, SubsetMask::full(n));
        }
    }

    #[test]
    fn concave_of_workers_measure() {
        assert!((concave(&workers_nu(), &[1.0; 4]).unwrap() - 4.6).abs() < 1e-9);
        assert_eq!(concave(&workers_nu(), &[0.0; 4]).unwrap(), 0.0);
    }

    /// Brute force over coefficients on the lattice `step * N`.
    fn concave_lattice(m: &Capacity, x: &[f64], step: f64) -> f64 {
        let sets: Vec<SubsetMask> = (1..(1u32 << m.n())).map(SubsetMask).collect();
        fn rec(
            k: usize,
            sets: &[SubsetMask],
            room: &mut Vec<f64>,
            m: &Capacity,
            step: f64,
            acc: f64,
            best: &mut f64,
        ) {
            if k == sets.len() {
                *best = best.max(acc);
                return;
            }
            let e = sets[k];
            let mut c = 0.0;
            loop {
                rec(k + 1, sets, room, m, step, acc + c * m.get(e), best);
                if e.iter().any(|i| room[i] < step - 1e-12) {
                    break;
                }
                e.iter().for_each(|i| room[i] -= step);
                c += step;
            }
            e.iter().for_each(|i| room[i] += c);
        }
        let mut best = 0.0;
        rec(0, &sets, &mut x.to_vec(), m, step, 0.0, &mut best);
        best
    }

    #[test]
    fn concave_matches_coefficient_lattice() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..25 {
            let n = rng.gen_range(1..=3);
            let m = random_capacity(&mut rng, n);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0..=2) as f64 * 0.5).collect();
            // vertices have coefficients in multiples of min(x)/2, so the quarter lattice is exact
            let coarse = concave_lattice(&m, &x, 0.5);
            let fine = concave_lattice(&m, &x, 0.25);
            let lp_value = concave(&m, &x).unwrap();
            assert!(coarse <= fine + 1e-12);
            assert!((fine - lp_value).abs() < 1e-9, "{fine} vs {lp_value}");
        }
    }

    #[test]
    fn convex_examples() {
        let m = Capacity::additive(&[0.5, 2.0, 1.0]).unwrap();
        assert_eq!(convex(&m, &[0.0; 3]).unwrap(), 0.0);
        assert!((convex(&m, &[3.0, 1.0, 2.0]).unwrap() - 5.5).abs() < 1e-9);
    }

    #[test]
    fn nested_integrals_are_ordered() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..40 {
            let n = rng.gen_range(1..=4);
            let m = random_capacity(&mut rng, n);
            let x = random_point(&mut rng, n, 2.0);
            let (s, p, c, k) = (
                shilkret(&m, &x).unwrap(),
                pan(&m, &x).unwrap(),
                choquet(&m, &x).unwrap(),
                concave(&m, &x).unwrap(),
            );
            assert!(s <= p + 1e-9 && p <= k + 1e-9 && c <= k + 1e-9);
            assert!(convex(&m, &x).unwrap() <= c + 1e-9);
        }
    }

    #[test]
    fn choquet_is_comonotone_additive() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let n = rng.gen_range(1..=5);
            let m = random_capacity(&mut rng, n);
            let x = random_point(&mut rng, n, 2.0);
            // z shares the order of x
            let z: Vec<f64> = x.iter().map(|v| v * v + 0.5 * v).collect();
            let sum: Vec<f64> = x.iter().zip(&z).map(|(a, b)| a + b).collect();
            let lhs = choquet(&m, &sum).unwrap();
            let rhs = choquet(&m, &x).unwrap() + choquet(&m, &z).unwrap();
            assert!((lhs - rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_level_capacity_is_choquet() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let n = rng.gen_range(1..=4);
            let m = random_capacity(&mut rng, n);
            let x = random_point(&mut rng, n, 5.0);
            let nu = LevelDependentCapacity::constant(m.clone());
            assert_eq!(
                level_dependent_choquet(&nu, &x).unwrap(),
                choquet(&m, &x).unwrap()
            );
        }
    }

    fn two_slices() -> LevelDependentCapacity {
        let low = Capacity::from_fn(3, |e| e.len() as f64 / 3.0).unwrap();
        let high = Capacity::from_fn(3, |e| {
            if e.is_empty() {
                0.0
            } else if e.contains(2) {
                1.0
            } else {
                0.5
            }
        })
        .unwrap();
        LevelDependentCapacity::new(vec![0.0, 2.5], vec![low, high], Some(6.0)).unwrap()
    }

    #[test]
    fn level_dependent_three_intervals() {
        let nu = two_slices();
        let x = [3.0, 2.0, 5.0];
        let (n123, n13, n3) = (
            SubsetMask::full(3),
            SubsetMask::from_indices([0, 2]),
            SubsetMask::singleton(2),
        );
        let piece = |a: f64, b: f64, e: SubsetMask| -> f64 {
            // breakpoint at 2.5 splits the second interval
            let mid = b.min(2.5).max(a);
            (mid - a) * nu.slices()[0].get(e) + (b - mid) * nu.slices()[1].get(e)
        };
        let expected = piece(0.0, 2.0, n123) + piece(2.0, 3.0, n13) + piece(3.0, 5.0, n3);
        assert!((level_dependent_choquet(&nu, &x).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn level_dependent_matches_riemann_sum() {
        let nu = two_slices();
        let x = [3.0, 2.0, 5.0];
        let h = 1e-4;
        let mut riemann = 0.0;
        let mut t = h / 2.0;
        while t < 5.0 {
            let level = SubsetMask::from_indices((0..3).filter(|&i| x[i] >= t));
            riemann += h * nu.at(t).get(level);
            t += h;
        }
        // 2 + 0.5 * 2/3 + 0.5 * 1 + 2 * 1, by hand
        let exact = level_dependent_choquet(&nu, &x).unwrap();
        assert!((exact - riemann).abs() < 1e-6, "{exact} vs {riemann}");
        assert!((exact - 29.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn level_range_is_enforced() {
        let nu = two_slices();
        assert!(matches!(
            level_dependent_choquet(&nu, &[7.0, 0.0, 0.0]),
            Err(Error::LevelRange { .. })
        ));
    }
}
