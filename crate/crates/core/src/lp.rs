//! Dense two-phase primal simplex with Bland's rule, and a depth-first
//! branch-and-bound on top of it.
//!
//! Variables are implicitly nonnegative. Constraints may be `<=`, `>=` or `=`;
//! rows that need it get phase-one artificials.

use std::collections::HashSet;

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;

/// Distance from an integer below which a value counts as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub integer: Vec<bool>,
}

impl LinearProgram {
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            sense,
            objective,
            constraints: Vec::new(),
            integer: vec![false; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn constrain(&mut self, coefficients: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint {
            coefficients,
            relation,
            rhs,
        });
        self
    }

    /// Adds the single-variable bound `x_var (relation) value`.
    pub fn bound(&mut self, var: usize, relation: Relation, value: f64) -> &mut Self {
        let mut row = vec![0.0; self.num_vars()];
        row[var] = 1.0;
        self.constrain(row, relation, value)
    }

    pub fn set_integer(&mut self, var: usize) -> &mut Self {
        self.integer[var] = true;
        self
    }

    pub fn all_integer(mut self) -> Self {
        self.integer.iter_mut().for_each(|f| *f = true);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.integer.len() != n {
            return Err(Error::MalformedProgram(format!(
                "{} integrality flags for {n} variables",
                self.integer.len()
            )));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::MalformedProgram(
                "objective has a non-finite coefficient".into(),
            ));
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.coefficients.len() != n {
                return Err(Error::MalformedProgram(format!(
                    "row {i} has {} coefficients for {n} variables",
                    row.coefficients.len()
                )));
            }
            if !row.rhs.is_finite() || row.coefficients.iter().any(|c| !c.is_finite()) {
                return Err(Error::MalformedProgram(format!(
                    "row {i} has a non-finite entry"
                )));
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Whether `x` satisfies every row and nonnegativity within `tol`.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        x.iter().all(|&v| v >= -tol)
            && self.constraints.iter().all(|row| {
                let lhs: f64 = row.coefficients.iter().zip(x).map(|(a, v)| a * v).sum();
                match row.relation {
                    Relation::Le => lhs <= row.rhs + tol,
                    Relation::Ge => lhs >= row.rhs - tol,
                    Relation::Eq => (lhs - row.rhs).abs() <= tol,
                }
            })
    }

    fn better(&self, a: f64, b: f64) -> bool {
        match self.sense {
            Sense::Maximize => a > b,
            Sense::Minimize => a < b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
    /// Branch and bound ran out of nodes; any assignment is the best incumbent, unproven.
    BudgetExceeded,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub pivots: usize,
    /// Set if a basis was revisited within a phase (cycling).
    pub repeated_basis: bool,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub values: Vec<f64>,
    /// Improving direction when the program is unbounded.
    pub ray: Option<Vec<f64>>,
    pub stats: SolveStats,
}

impl LpSolution {
    fn without_point(status: LpStatus, n: usize, stats: SolveStats) -> Self {
        Self {
            status,
            objective: f64::NAN,
            values: vec![0.0; n],
            ray: None,
            stats,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_pivots: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { max_pivots: 50_000 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BnbOptions {
    pub node_budget: u64,
    pub simplex: SimplexOptions,
}

impl Default for BnbOptions {
    fn default() -> Self {
        Self {
            node_budget: 1_000_000,
            simplex: SimplexOptions::default(),
        }
    }
}

/// Solves the continuous relaxation (integrality flags are ignored).
pub fn simplex_solve(lp: &LinearProgram) -> Result<LpSolution> {
    simplex_with(lp, SimplexOptions::default())
}

pub fn simplex_with(lp: &LinearProgram, opts: SimplexOptions) -> Result<LpSolution> {
    lp.validate()?;
    Tableau::build(lp).solve(lp, opts)
}

/// Tableau in canonical form: `rows[i]` holds the row of basic variable
/// `basis[i]`, last entry is the right-hand side.
struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n_orig: usize,
    /// Columns `>= first_artificial` are artificial.
    first_artificial: usize,
    width: usize,
    stats: SolveStats,
}

enum PhaseEnd {
    Optimal,
    Unbounded(usize),
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        // normalize to nonnegative right-hand sides
        let rows: Vec<(Vec<f64>, Relation, f64)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs < 0.0 {
                    let flipped = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coefficients.iter().map(|a| -a).collect(), flipped, -c.rhs)
                } else {
                    (c.coefficients.clone(), c.relation, c.rhs)
                }
            })
            .collect();
        let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let first_artificial = n + n_slack;
        let width = first_artificial + n_art;
        let mut tableau = Vec::with_capacity(rows.len());
        let mut basis = Vec::with_capacity(rows.len());
        let (mut slack, mut art) = (n, first_artificial);
        for (coeffs, rel, rhs) in rows {
            let mut row = vec![0.0; width + 1];
            row[..n].copy_from_slice(&coeffs);
            row[width] = rhs;
            match rel {
                Relation::Le => {
                    row[slack] = 1.0;
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -1.0;
                    slack += 1;
                    row[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
            }
            tableau.push(row);
        }
        Self {
            rows: tableau,
            basis,
            n_orig: n,
            first_artificial,
            width,
            stats: SolveStats::default(),
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
        self.stats.pivots += 1;
    }

    /// Minimizes `cost . x` over the current tableau, entering only columns `< limit`.
    fn run_phase(&mut self, cost: &[f64], limit: usize, opts: SimplexOptions) -> Result<PhaseEnd> {
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        loop {
            let mut key = self.basis.clone();
            key.sort_unstable();
            if !seen.insert(key) {
                self.stats.repeated_basis = true;
            }
            // Bland: lowest-index column with negative reduced cost
            let entering = (0..limit).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let reduced = cost[j]
                    - self
                        .rows
                        .iter()
                        .zip(&self.basis)
                        .map(|(row, &b)| cost[b] * row[j])
                        .sum::<f64>();
                reduced < -PIVOT_TOL
            });
            let Some(j) = entering else {
                return Ok(PhaseEnd::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[j] > PIVOT_TOL {
                    let ratio = row[self.width] / row[j];
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            if ratio < best - PIVOT_TOL
                                || (ratio <= best + PIVOT_TOL && self.basis[i] < self.basis[k])
                            {
                                Some((i, ratio))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Ok(PhaseEnd::Unbounded(j));
            };
            if self.stats.pivots >= opts.max_pivots {
                return Err(Error::IterationLimit(opts.max_pivots));
            }
            self.pivot(r, j);
        }
    }

    fn primal(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n_orig];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < self.n_orig {
                let v = row[self.width];
                x[b] = if v.abs() < 1e-12 { 0.0 } else { v };
            }
        }
        x
    }

    fn solve(mut self, lp: &LinearProgram, opts: SimplexOptions) -> Result<LpSolution> {
        let n = self.n_orig;
        if self.first_artificial < self.width {
            let mut cost = vec![0.0; self.width];
            cost[self.first_artificial..]
                .iter_mut()
                .for_each(|c| *c = 1.0);
            if let PhaseEnd::Unbounded(_) = self.run_phase(&cost, self.width, opts)? {
                unreachable!("phase one objective is bounded below by zero");
            }
            let infeasibility: f64 = self
                .rows
                .iter()
                .zip(&self.basis)
                .filter(|(_, &b)| b >= self.first_artificial)
                .map(|(row, _)| row[self.width])
                .sum();
            if infeasibility > 1e-7 {
                return Ok(LpSolution::without_point(
                    LpStatus::Infeasible,
                    n,
                    self.stats,
                ));
            }
            // drive remaining (zero-level) artificials out, dropping redundant rows
            let mut i = 0;
            while i < self.rows.len() {
                if self.basis[i] >= self.first_artificial {
                    match (0..self.first_artificial).find(|&j| self.rows[i][j].abs() > PIVOT_TOL) {
                        Some(j) => {
                            self.pivot(i, j);
                            i += 1;
                        }
                        None => {
                            self.rows.remove(i);
                            self.basis.remove(i);
                        }
                    }
                } else {
                    i += 1;
                }
            }
        }
        let sign = match lp.sense {
            Sense::Maximize => -1.0,
            Sense::Minimize => 1.0,
        };
        let mut cost = vec![0.0; self.width];
        for (c, o) in cost.iter_mut().zip(&lp.objective) {
            *c = sign * o;
        }
        match self.run_phase(&cost, self.first_artificial, opts)? {
            PhaseEnd::Optimal => {
                let values = self.primal();
                Ok(LpSolution {
                    status: LpStatus::Optimal,
                    objective: lp.evaluate(&values),
                    values,
                    ray: None,
                    stats: self.stats,
                })
            }
            PhaseEnd::Unbounded(j) => {
                let mut ray = vec![0.0; n];
                if j < n {
                    ray[j] = 1.0;
                }
                for (row, &b) in self.rows.iter().zip(&self.basis) {
                    if b < n {
                        ray[b] = -row[j];
                    }
                }
                let values = self.primal();
                Ok(LpSolution {
                    status: LpStatus::Unbounded,
                    objective: lp.evaluate(&values),
                    values,
                    ray: Some(ray),
                    stats: self.stats,
                })
            }
        }
    }
}

/// Value of the continuous relaxation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Finite(f64),
    Unbounded,
    Infeasible,
}

/// Relaxation bound: at least the integral optimum when maximizing, at most when minimizing.
pub fn dual_bound(lp: &LinearProgram) -> Result<Bound> {
    let sol = simplex_solve(lp)?;
    Ok(match sol.status {
        LpStatus::Optimal => Bound::Finite(sol.objective),
        LpStatus::Unbounded => Bound::Unbounded,
        LpStatus::Infeasible => Bound::Infeasible,
        LpStatus::BudgetExceeded => unreachable!("simplex has no node budget"),
    })
}

pub fn bnb_solve(lp: &LinearProgram) -> Result<LpSolution> {
    bnb_with(lp, BnbOptions::default())
}

/// Depth-first branch and bound, branching on the most fractional variable.
pub fn bnb_with(lp: &LinearProgram, opts: BnbOptions) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars();
    let mut stats = SolveStats::default();
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut stack: Vec<Vec<(usize, Relation, f64)>> = vec![Vec::new()];
    while let Some(bounds) = stack.pop() {
        if stats.nodes >= opts.node_budget {
            let (objective, values) = incumbent.unwrap_or((f64::NAN, vec![0.0; n]));
            return Ok(LpSolution {
                status: LpStatus::BudgetExceeded,
                objective,
                values,
                ray: None,
                stats,
            });
        }
        stats.nodes += 1;
        let mut node = lp.clone();
        for &(var, rel, value) in &bounds {
            node.bound(var, rel, value);
        }
        let relaxed = Tableau::build(&node).solve(&node, opts.simplex)?;
        stats.pivots += relaxed.stats.pivots;
        stats.repeated_basis |= relaxed.stats.repeated_basis;
        match relaxed.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                return Ok(LpSolution { stats, ..relaxed });
            }
            LpStatus::Optimal | LpStatus::BudgetExceeded => {}
        }
        if let Some((best, _)) = &incumbent {
            let promising = match lp.sense {
                Sense::Maximize => relaxed.objective > best + 1e-9,
                Sense::Minimize => relaxed.objective < best - 1e-9,
            };
            if !promising {
                continue;
            }
        }
        let branch = (0..n)
            .filter(|&j| lp.integer[j])
            .map(|j| {
                let v = relaxed.values[j];
                (j, v, (v - v.floor() - 0.5).abs())
            })
            .filter(|&(_, v, _)| (v - v.round()).abs() > INTEGRALITY_TOL)
            .min_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)));
        match branch {
            None => {
                let mut values = relaxed.values;
                for (v, &int) in values.iter_mut().zip(&lp.integer) {
                    if int {
                        *v = v.round();
                    }
                }
                let objective = lp.evaluate(&values);
                if incumbent
                    .as_ref()
                    .is_none_or(|(best, _)| lp.better(objective, *best))
                {
                    incumbent = Some((objective, values));
                }
            }
            Some((j, v, _)) => {
                let mut up = bounds.clone();
                up.push((j, Relation::Ge, v.ceil()));
                let mut down = bounds;
                down.push((j, Relation::Le, v.floor()));
                // floor branch is explored first
                stack.push(up);
                stack.push(down);
            }
        }
    }
    Ok(match incumbent {
        Some((objective, values)) => LpSolution {
            status: LpStatus::Optimal,
            objective,
            values,
            ray: None,
            stats,
        },
        None => LpSolution::without_point(LpStatus::Infeasible, n, stats),
    })
}

/// Solves with branch and bound when any variable is integral, simplex otherwise.
pub fn solve(lp: &LinearProgram, opts: BnbOptions) -> Result<LpSolution> {
    if lp.integer.iter().any(|&f| f) {
        bnb_with(lp, opts)
    } else {
        simplex_with(lp, opts.simplex)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Prices and offers of the fast-food example, in the order a, b, c, abc, aa, ac, bc, aabc.
    fn fast_food(demand: [f64; 3]) -> LinearProgram {
        let offers = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, 1.0, 1.0],
            [2.0, 0.0, 0.0],
            [1.0, 0.0, 1.0],
            [0.0, 1.0, 1.0],
            [2.0, 1.0, 1.0],
        ];
        let prices = vec![2.8, 1.6, 1.8, 4.8, 3.0, 3.0, 3.0, 5.5];
        let mut lp = LinearProgram::new(Sense::Minimize, prices).all_integer();
        for i in 0..3 {
            lp.constrain(
                offers.iter().map(|o| o[i]).collect(),
                Relation::Ge,
                demand[i],
            );
        }
        lp
    }

    #[test]
    fn single_upper_bound() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0]);
        lp.constrain(vec![1.0], Relation::Le, 3.0);
        let sol = simplex_solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 3.0).abs() < 1e-12);
    }

    #[test]
    fn unconstrained_maximization_is_unbounded() {
        let lp = LinearProgram::new(Sense::Maximize, vec![1.0]);
        let sol = simplex_solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
        assert_eq!(sol.ray, Some(vec![1.0]));
    }

    #[test]
    fn infeasible_detected_in_phase_one() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0, 1.0]);
        lp.constrain(vec![1.0, 1.0], Relation::Le, 1.0);
        lp.constrain(vec![1.0, 1.0], Relation::Ge, 2.0);
        assert_eq!(simplex_solve(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 2.0]);
        lp.constrain(vec![1.0], Relation::Le, 1.0);
        assert!(matches!(
            simplex_solve(&lp),
            Err(Error::MalformedProgram(_))
        ));
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 1.0]);
        lp.constrain(vec![1.0, 1.0], Relation::Eq, 2.0);
        lp.constrain(vec![2.0, 2.0], Relation::Eq, 4.0);
        lp.bound(0, Relation::Le, 1.5);
        let sol = simplex_solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn concave_integral_of_workers_measure() {
        // max sum a_E nu(E) s.t. sum a_E 1_E <= (1,1,1,1)
        let e = |a: u32, b: u32| match (a, b) {
            (0, 0) => 0.0,
            (1, 0) => 1.0,
            (2, 0) => 2.2,
            (0, 1) => 1.1,
            (0, 2) => 2.0,
            (1, 1) => 2.2,
            (2, 1) => 3.5,
            (1, 2) => 3.0,
            _ => 4.3,
        };
        let sets: Vec<u32> = (1..16).collect();
        let weights: Vec<f64> = sets
            .iter()
            .map(|&s| e((s & 3).count_ones(), (s >> 2).count_ones()))
            .collect();
        let mut lp = LinearProgram::new(Sense::Maximize, weights);
        for i in 0..4 {
            lp.constrain(
                sets.iter().map(|&s| ((s >> i) & 1) as f64).collect(),
                Relation::Le,
                1.0,
            );
        }
        let sol = simplex_solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 4.6).abs() < 1e-9);
    }

    #[test]
    fn fast_food_at_large_demand() {
        let sol = bnb_solve(&fast_food([50.0, 30.0, 60.0])).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 205.0).abs() < 1e-9);
        assert!(fast_food([50.0, 30.0, 60.0]).is_feasible(&sol.values, 1e-9));
    }

    #[test]
    fn fast_food_zero_demand() {
        let sol = bnb_solve(&fast_food([0.0, 0.0, 0.0])).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.objective, 0.0);
    }

    /// Exhaustive search over multiplicities capped by single-offer covers.
    fn fast_food_enumeration(demand: [f64; 3]) -> f64 {
        let lp = fast_food(demand);
        let caps: Vec<usize> = (0..8)
            .map(|j| {
                (0..3)
                    .filter(|&i| lp.constraints[i].coefficients[j] > 0.0)
                    .map(|i| (demand[i] / lp.constraints[i].coefficients[j]).ceil() as usize)
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut best = f64::INFINITY;
        let mut counts = vec![0usize; 8];
        fn rec(
            j: usize,
            counts: &mut Vec<usize>,
            caps: &[usize],
            lp: &LinearProgram,
            cost: f64,
            best: &mut f64,
        ) {
            if cost >= *best {
                return;
            }
            if j == counts.len() {
                let x: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
                if lp.is_feasible(&x, 1e-9) {
                    *best = cost;
                }
                return;
            }
            for c in 0..=caps[j] {
                counts[j] = c;
                rec(
                    j + 1,
                    counts,
                    caps,
                    lp,
                    cost + c as f64 * lp.objective[j],
                    best,
                );
            }
            counts[j] = 0;
        }
        rec(0, &mut counts, &caps, &lp, 0.0, &mut best);
        best
    }

    #[test]
    fn fast_food_small_demand_matches_enumeration() {
        let expected = fast_food_enumeration([19.0, 10.0, 10.0]);
        // frozen from the enumeration above
        assert!(
            (expected - 54.1).abs() < 1e-9,
            "enumeration gave {expected}"
        );
        let sol = bnb_solve(&fast_food([19.0, 10.0, 10.0])).unwrap();
        assert!((sol.objective - expected).abs() < 1e-9);
    }

    #[test]
    fn relaxation_bounds_integral_optimum() {
        let lp = fast_food([50.0, 30.0, 60.0]);
        match dual_bound(&lp).unwrap() {
            Bound::Finite(b) => assert!(b <= 205.0 + 1e-9),
            other => panic!("unexpected {other:?}"),
        }
        let mut knap = LinearProgram::new(Sense::Maximize, vec![3.0, 4.0]).all_integer();
        knap.constrain(vec![3.0, 4.0], Relation::Le, 6.0);
        knap.bound(0, Relation::Le, 1.0).bound(1, Relation::Le, 1.0);
        let bound = match dual_bound(&knap).unwrap() {
            Bound::Finite(b) => b,
            other => panic!("unexpected {other:?}"),
        };
        let opt = bnb_solve(&knap).unwrap().objective;
        assert!((opt - 4.0).abs() < 1e-9);
        assert!(bound >= opt - 1e-9);
    }

    #[test]
    fn integral_relaxation_bound_equals_bnb() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 1.0]).all_integer();
        lp.constrain(vec![1.0, 0.0], Relation::Le, 2.0).constrain(
            vec![0.0, 1.0],
            Relation::Le,
            3.0,
        );
        assert_eq!(
            dual_bound(&lp).unwrap(),
            Bound::Finite(bnb_solve(&lp).unwrap().objective)
        );
    }

    #[test]
    fn budget_exhaustion_is_explicit() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![3.0, 4.0]).all_integer();
        lp.constrain(vec![3.0, 4.0], Relation::Le, 6.5);
        let sol = bnb_with(
            &lp,
            BnbOptions {
                node_budget: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(sol.status, LpStatus::BudgetExceeded);
    }

    fn random_ilp(rng: &mut ChaCha8Rng) -> (LinearProgram, Vec<usize>) {
        let n = rng.gen_range(1..=6);
        let m = rng.gen_range(1..=3);
        let sense = if rng.gen_bool(0.5) {
            Sense::Maximize
        } else {
            Sense::Minimize
        };
        let obj = (0..n).map(|_| rng.gen_range(0..10) as f64).collect();
        let mut lp = LinearProgram::new(sense, obj).all_integer();
        let caps: Vec<usize> = (0..n).map(|_| rng.gen_range(0..=10)).collect();
        for (j, &c) in caps.iter().enumerate() {
            lp.bound(j, Relation::Le, c as f64);
        }
        for _ in 0..m {
            let row = (0..n).map(|_| rng.gen_range(0..5) as f64).collect();
            let rel = if sense == Sense::Maximize {
                Relation::Le
            } else {
                Relation::Ge
            };
            lp.constrain(row, rel, rng.gen_range(0..25) as f64);
        }
        (lp, caps)
    }

    fn enumerate(lp: &LinearProgram, caps: &[usize]) -> Option<f64> {
        let mut best: Option<f64> = None;
        let mut x = vec![0usize; caps.len()];
        loop {
            let point: Vec<f64> = x.iter().map(|&v| v as f64).collect();
            if lp.is_feasible(&point, 1e-9) {
                let v = lp.evaluate(&point);
                if best.is_none_or(|b| lp.better(v, b)) {
                    best = Some(v);
                }
            }
            let mut j = 0;
            loop {
                if j == caps.len() {
                    return best;
                }
                if x[j] < caps[j] {
                    x[j] += 1;
                    break;
                }
                x[j] = 0;
                j += 1;
            }
        }
    }

    #[test]
    fn bnb_matches_enumeration_on_random_programs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..150 {
            let (lp, caps) = random_ilp(&mut rng);
            let sol = bnb_solve(&lp).unwrap();
            match enumerate(&lp, &caps) {
                None => assert_eq!(sol.status, LpStatus::Infeasible),
                Some(v) => {
                    assert_eq!(sol.status, LpStatus::Optimal);
                    assert!((sol.objective - v).abs() < 1e-7, "{} vs {v}", sol.objective);
                    assert!(lp.is_feasible(&sol.values, 1e-7));
                    assert!((lp.evaluate(&sol.values) - sol.objective).abs() < 1e-7);
                }
            }
            assert!(!sol.stats.repeated_basis);
        }
    }

    #[test]
    fn degenerate_programs_terminate_without_cycling() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(2..=6);
            let m = rng.gen_range(2..=6);
            let mut lp = LinearProgram::new(
                Sense::Maximize,
                (0..n).map(|_| rng.gen_range(-3..6) as f64).collect(),
            );
            for _ in 0..m {
                // many zero right-hand sides make degenerate vertices common
                let rhs = if rng.gen_bool(0.6) {
                    0.0
                } else {
                    rng.gen_range(1..5) as f64
                };
                lp.constrain(
                    (0..n).map(|_| rng.gen_range(-2..4) as f64).collect(),
                    Relation::Le,
                    rhs,
                );
            }
            lp.constrain(vec![1.0; n], Relation::Le, 10.0);
            let sol = simplex_with(&lp, SimplexOptions { max_pivots: 500 }).unwrap();
            assert!(!sol.stats.repeated_basis);
            if sol.status == LpStatus::Optimal {
                assert!(lp.is_feasible(&sol.values, 1e-7));
                assert!((lp.evaluate(&sol.values) - sol.objective).abs() < 1e-7);
            }
        }
    }
}
