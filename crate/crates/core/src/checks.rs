//! Seeded property suites: random instances, one report per property.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classical;
use crate::decomp::{
    self, comonotone_integral_batch, disjoint_support_integral, frank_check, knapsack_integral,
    max_pseudo_integral, Direction, SolveOptions,
};
use crate::domain::{
    Base, Capacity, ClosedForm, CoefficientDomain, CollectionConstraint, DecompSystem, Generators,
    NNVector, Weighting,
};
use crate::error::{Error, Result};
use crate::oracle;

pub const SUITES: &[&str] = &[
    "monotonicity",
    "dominance",
    "comonotone-additivity",
    "comonotone-superadditivity",
    "disjoint-superadditivity",
    "knapsack",
    "oracle-equivalence",
    "reductions",
    "frank",
];

#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub seed: u64,
    /// Number of random cases; each suite has its own default.
    pub instances: Option<usize>,
    /// Overrides the suite's tolerance.
    pub tolerance: Option<f64>,
    /// Grid spacing for suites that solve on a box grid.
    pub grid_step: Option<f64>,
    /// Run the monotonicity suite on this base instead of random ones.
    pub base: Option<Base>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            instances: None,
            tolerance: None,
            grid_step: None,
            base: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub name: String,
    pub cases: usize,
    pub passed: usize,
    pub max_residual: f64,
    pub first_counterexample: Option<String>,
}

impl PropertyReport {
    fn new(name: &str) -> Self {
        Self {
            name: name.into(),
            cases: 0,
            passed: 0,
            max_residual: 0.0,
            first_counterexample: None,
        }
    }

    /// Records a case whose violation amount is `residual` (positive = violated by that much).
    fn record(&mut self, residual: f64, tol: f64, describe: impl FnOnce() -> String) {
        self.cases += 1;
        self.max_residual = self.max_residual.max(residual.max(0.0));
        if residual <= tol {
            self.passed += 1;
        } else if self.first_counterexample.is_none() {
            self.first_counterexample = Some(describe());
        }
    }

    fn fail(&mut self, describe: String) {
        self.cases += 1;
        self.max_residual = f64::INFINITY;
        self.first_counterexample.get_or_insert(describe);
    }

    pub fn ok(&self) -> bool {
        self.passed == self.cases
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub properties: Vec<PropertyReport>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.properties.iter().all(PropertyReport::ok)
    }

    pub fn property(&self, name: &str) -> Option<&PropertyReport> {
        self.properties.iter().find(|p| p.name == name)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {} (seed {})", self.suite, self.seed)?;
        for p in &self.properties {
            write!(
                f,
                "  {:<28} {}/{} {}  max residual {:.3e}",
                p.name,
                p.passed,
                p.cases,
                if p.ok() { "pass" } else { "FAIL" },
                p.max_residual
            )?;
            if let Some(c) = &p.first_counterexample {
                write!(f, "\n    first counterexample: {c}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

pub fn run_suite(name: &str, cfg: &CheckConfig) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let count = |default: usize| cfg.instances.unwrap_or(default);
    let tol = |default: f64| cfg.tolerance.unwrap_or(default);
    let properties = match name {
        "monotonicity" => vec![monotonicity(
            &mut rng,
            count(200),
            tol(1e-9),
            cfg.base.as_ref(),
        )?],
        "dominance" => dominance(&mut rng, count(100), tol(1e-9))?,
        "comonotone-additivity" => vec![comonotone_additivity(&mut rng, count(100), tol(1e-9))?],
        "comonotone-superadditivity" => comonotone_superadditivity(
            &mut rng,
            count(100),
            tol(1e-3),
            cfg.grid_step.unwrap_or(1.0 / 32.0),
        )?,
        "disjoint-superadditivity" => {
            vec![disjoint_superadditivity(&mut rng, count(100), tol(1e-9))?]
        }
        "knapsack" => vec![knapsack(&mut rng, count(100), tol(1e-9))?],
        "oracle-equivalence" => oracle_equivalence(&mut rng, count(50), tol(1e-7))?,
        "reductions" => reductions(&mut rng, count(25), tol(1e-7))?,
        "frank" => vec![frank(
            &mut rng,
            count(50),
            tol(0.05),
            cfg.grid_step.unwrap_or(1.0 / 64.0),
        )?],
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown suite `{other}`; known: {}",
                SUITES.join(", ")
            )))
        }
    };
    Ok(SuiteReport {
        suite: name.into(),
        seed: cfg.seed,
        properties,
    })
}

/// A random capacity with values rounded to two decimals.
pub fn random_capacity(rng: &mut impl Rng, n: usize) -> Capacity {
    let size = 1usize << n;
    let mut values = vec![0.0; size];
    for set in 1..size {
        let floor = (0..n)
            .filter(|i| set >> i & 1 == 1)
            .map(|i| values[set ^ (1 << i)])
            .fold(0.0, f64::max);
        let bump: f64 = if rng.gen_bool(0.2) {
            0.0
        } else {
            rng.gen_range(0.0..1.0)
        };
        values[set] = ((floor + bump) * 100.0).round() / 100.0;
    }
    if values[size - 1] <= 0.0 {
        values[size - 1] = 1.0;
    }
    Capacity::new(n, values).expect("monotone by construction")
}

fn random_point(rng: &mut impl Rng, n: usize, scale: f64) -> NNVector {
    let v = (0..n)
        .map(|_| {
            if rng.gen_bool(0.15) {
                0.0
            } else {
                (rng.gen_range(0.0..scale) * 100.0).round() / 100.0
            }
        })
        .collect();
    NNVector::new(v).expect("nonnegative")
}

fn random_int_point(rng: &mut impl Rng, n: usize, cap: u32) -> NNVector {
    NNVector::new((0..n).map(|_| rng.gen_range(0..=cap) as f64).collect()).expect("nonnegative")
}

/// Random comonotone pair: both sorted along one random coordinate order.
fn comonotone_pair(
    rng: &mut ChaCha8Rng,
    n: usize,
    draw: impl Fn(&mut ChaCha8Rng) -> f64,
) -> (Vec<f64>, Vec<f64>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut sorted = || {
        let mut vals: Vec<f64> = (0..n).map(|_| draw(rng)).collect();
        vals.sort_by(f64::total_cmp);
        let mut out = vec![0.0; n];
        for (pos, &i) in order.iter().enumerate() {
            out[i] = vals[pos];
        }
        out
    };
    let x = sorted();
    (x, sorted())
}

/// Random finite base: `n <= 4`, at most six distinct nonzero integer
/// generators, integer or unit coefficients, any constraint, monotone table.
pub fn random_finite_base(rng: &mut impl Rng) -> Base {
    loop {
        let n = rng.gen_range(1..=4);
        let count = rng.gen_range(1..=6);
        let mut gens: Vec<NNVector> = Vec::new();
        for _ in 0..count * 3 {
            if gens.len() == count {
                break;
            }
            let g = random_int_point(rng, n, 3);
            if !g.is_zero() && !gens.contains(&g) {
                gens.push(g);
            }
        }
        if gens.is_empty() {
            continue;
        }
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
        let p = *[0.7, 1.0, 1.3].choose(rng).expect("nonempty");
        let table: Vec<(NNVector, f64)> = gens
            .iter()
            .map(|g| {
                let lin: f64 = g.iter().zip(&a).map(|(x, w)| x * w).sum();
                (g.clone(), (lin.powf(p) * 10.0).round() / 10.0)
            })
            .collect();
        let coeff = if rng.gen_bool(0.5) {
            CoefficientDomain::NonNegInt
        } else {
            CoefficientDomain::Unit
        };
        let constraint = match rng.gen_range(0..6) {
            0 => CollectionConstraint::Any,
            1 => CollectionConstraint::Chain,
            2 => CollectionConstraint::Comonotone,
            3 => CollectionConstraint::Partition,
            4 => CollectionConstraint::DisjointSupport(rng.gen_range(1..=n)),
            _ => CollectionConstraint::MaxParts(rng.gen_range(1..=3)),
        };
        let Ok(system) = DecompSystem::new(n, Generators::List(gens), coeff, constraint) else {
            continue;
        };
        if let Ok(base) = Base::new(system, Weighting::Table(table)) {
            return base;
        }
    }
}

fn monotonicity(
    rng: &mut ChaCha8Rng,
    cases: usize,
    tol: f64,
    given: Option<&Base>,
) -> Result<PropertyReport> {
    let mut report = PropertyReport::new("sub monotone in x");
    let opts = SolveOptions::default();
    for _ in 0..cases {
        let base = match given {
            Some(b) => b.clone(),
            None => random_finite_base(rng),
        };
        let n = base.n();
        let x = random_int_point(rng, n, 5);
        let bump = random_int_point(rng, n, 3);
        let y = x.add(&bump)?;
        let (rx, ry) = (
            decomp::sub_integral_with(&base, &x, &opts)?,
            decomp::sub_integral_with(&base, &y, &opts)?,
        );
        if !rx.is_exact() || !ry.is_exact() {
            report.fail(format!(
                "x = {x}, y = {y}: statuses {} / {}",
                rx.status.label(),
                ry.status.label()
            ));
            continue;
        }
        report.record(rx.value - ry.value, tol, || {
            format!("I{x} = {} > I{y} = {}", rx.value, ry.value)
        });
    }
    Ok(report)
}

fn dominance(rng: &mut ChaCha8Rng, cases: usize, tol: f64) -> Result<Vec<PropertyReport>> {
    let mut below = PropertyReport::new("sub <= A (superadditive A)");
    let mut equal = PropertyReport::new("sub = A at generators");
    for _ in 0..cases {
        let n = rng.gen_range(1..=3);
        let form = if n == 2 && rng.gen_bool(0.5) {
            ClosedForm::Product
        } else {
            ClosedForm::WeightedSum(
                (0..n)
                    .map(|_| (rng.gen_range(0.0..2.0) * 10.0f64).round() / 10.0 + 0.1)
                    .collect(),
            )
        };
        let gens: Vec<NNVector> = (0..rng.gen_range(1..=5))
            .map(|_| {
                NNVector::new((0..n).map(|_| rng.gen_range(0..=4) as f64 * 0.5).collect())
                    .expect("nonneg")
            })
            .filter(|g| !g.is_zero())
            .collect();
        if gens.is_empty() {
            continue;
        }
        let system = DecompSystem::complete(gens.clone(), CoefficientDomain::Unit)?;
        let Ok(base) = Base::new(system, Weighting::ClosedForm(form.clone())) else {
            continue;
        };
        let x = random_point(rng, n, 4.0);
        let a = form.eval(&x).expect("defined on the orthant");
        let r = decomp::sub_integral(&base, &x)?;
        below.record(r.value - a, tol, || {
            format!("{} at {x}: I = {} > A = {a}", form.name(), r.value)
        });
        let g = gens.choose(rng).expect("nonempty");
        let ag = form.eval(g).expect("defined");
        let rg = decomp::sub_integral(&base, g)?;
        equal.record((rg.value - ag).abs(), tol, || {
            format!(
                "{} at generator {g}: I = {} vs A = {ag}",
                form.name(),
                rg.value
            )
        });
    }
    Ok(vec![below, equal])
}

fn comonotone_additivity(rng: &mut ChaCha8Rng, cases: usize, tol: f64) -> Result<PropertyReport> {
    let mut report = PropertyReport::new("choquet comonotone additive");
    for _ in 0..cases {
        let n = rng.gen_range(2..=5);
        let m = random_capacity(rng, n);
        let (x, z) = comonotone_pair(rng, n, |r| {
            (r.gen_range(0.0..3.0) * 100.0f64).round() / 100.0
        });
        let sum: Vec<f64> = x.iter().zip(&z).map(|(a, b)| a + b).collect();
        let lhs = classical::choquet(&m, &sum)?;
        let rhs = classical::choquet(&m, &x)? + classical::choquet(&m, &z)?;
        report.record((lhs - rhs).abs(), tol, || {
            format!("x = {x:?}, z = {z:?}: {lhs} vs {rhs}")
        });
    }
    Ok(report)
}

fn comonotone_superadditivity(
    rng: &mut ChaCha8Rng,
    cases: usize,
    tol: f64,
    step: f64,
) -> Result<Vec<PropertyReport>> {
    let mut dom = PropertyReport::new("comonotone integral >= A");
    let mut sup = PropertyReport::new("comonotone superadditive");
    let forms = [
        ClosedForm::MaxLog,
        ClosedForm::WeightedSum(vec![1.0, 2.0]),
        ClosedForm::MaxCoord(1.5),
        ClosedForm::Product,
    ];
    let per_form = cases.div_ceil(forms.len());
    let mut done = 0;
    for form in &forms {
        let take = per_form.min(cases - done);
        done += take;
        let mut pairs = Vec::with_capacity(take);
        let mut points = Vec::with_capacity(3 * take);
        for _ in 0..take {
            let (x, z) = comonotone_pair(rng, 2, |r| r.gen_range(0..=48) as f64 * step);
            let s: Vec<f64> = x.iter().zip(&z).map(|(a, b)| a + b).collect();
            points.extend([NNVector::new(x)?, NNVector::new(z)?, NNVector::new(s)?]);
            pairs.push(points.len() - 3);
        }
        let values =
            comonotone_integral_batch(&Weighting::ClosedForm(form.clone()), &points, step)?;
        for &i in &pairs {
            let (x, z) = (&points[i], &points[i + 1]);
            let (vx, vz, vs) = (values[i].value, values[i + 1].value, values[i + 2].value);
            let ax = form.eval(x).expect("defined");
            dom.record(ax - vx, tol, || {
                format!("{} at {x}: I = {vx} < A = {ax}", form.name())
            });
            sup.record(vx + vz - vs, tol, || {
                format!("{} at {x} + {z}: {vs} < {vx} + {vz}", form.name())
            });
        }
    }
    Ok(vec![dom, sup])
}

fn disjoint_superadditivity(
    rng: &mut ChaCha8Rng,
    cases: usize,
    tol: f64,
) -> Result<PropertyReport> {
    let mut report = PropertyReport::new("disjoint-support superadditive");
    for _ in 0..cases {
        let n = rng.gen_range(2..=5);
        let (weighting, scale) = match rng.gen_range(0..4) {
            0 => (Weighting::ClosedForm(ClosedForm::MaxLog), 3.0),
            1 => (Weighting::ClosedForm(ClosedForm::Product), 2.0),
            2 => (Weighting::ClosedForm(ClosedForm::ProbabilisticSum), 1.0),
            _ => (Weighting::CapacityInduced(random_capacity(rng, n)), 3.0),
        };
        let left: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        let p = random_point(rng, n, scale);
        let q = random_point(rng, n, scale);
        let x = NNVector::new((0..n).map(|i| if left[i] { p[i] } else { 0.0 }).collect())?;
        let z = NNVector::new((0..n).map(|i| if left[i] { 0.0 } else { q[i] }).collect())?;
        let s = x.add(&z)?;
        let v = |y: &NNVector| disjoint_support_integral(&weighting, y, n).map(|r| r.value);
        let (vx, vz, vs) = (v(&x)?, v(&z)?, v(&s)?);
        report.record(vx + vz - vs, tol, || {
            format!("{} at {x} + {z}: {vs} < {vx} + {vz}", weighting.kind())
        });
    }
    Ok(report)
}

fn knapsack(rng: &mut ChaCha8Rng, cases: usize, tol: f64) -> Result<PropertyReport> {
    let mut report = PropertyReport::new("knapsack >= max pseudo");
    for _ in 0..cases {
        let weights: Vec<f64> = (0..rng.gen_range(1..=8))
            .map(|_| (rng.gen_range(0.5..10.0) * 10.0f64).round() / 10.0)
            .collect();
        let cap = (rng.gen_range(0.0..30.0) * 10.0f64).round() / 10.0;
        let full = knapsack_integral(&weights, cap)?.value;
        let single = max_pseudo_integral(
            &decomp::knapsack_base(&weights)?,
            &NNVector::new(vec![cap])?,
        )?
        .value;
        report.record(single - full, tol, || {
            format!("weights {weights:?}, cap {cap}: {full} < {single}")
        });
    }
    Ok(report)
}

fn oracle_equivalence(rng: &mut ChaCha8Rng, cases: usize, tol: f64) -> Result<Vec<PropertyReport>> {
    let mut sub = PropertyReport::new("sub = brute force");
    let mut sup = PropertyReport::new("super = brute force");
    for _ in 0..cases {
        let base = random_finite_base(rng);
        let x = random_int_point(rng, base.n(), 8);
        let describe = |what: &str, a: String, b: String| {
            format!(
                "{what} at {x} ({:?}, {:?}, {} generators): solver {a}, oracle {b}",
                base.system.coefficients,
                base.system.constraint,
                match &base.system.generators {
                    Generators::List(l) => l.len(),
                    _ => 0,
                }
            )
        };
        let got = decomp::sub_integral(&base, &x)?;
        let want = oracle::brute_sub(&base, &x)?;
        sub.record((got.value - want).abs(), tol, || {
            describe("sub", got.value.to_string(), want.to_string())
        });
        let got = decomp::super_integral(&base, &x)?;
        let want = oracle::brute_super(&base, &x)?;
        match (got.is_finite(), want) {
            (true, Some(w)) => sup.record((got.value - w).abs(), tol, || {
                describe("super", got.value.to_string(), w.to_string())
            }),
            (false, None) if got.status == decomp::Status::InfeasibleDomain => {
                sup.record(0.0, tol, String::new)
            }
            _ => sup.fail(describe(
                "super",
                got.status.label().into(),
                format!("{want:?}"),
            )),
        }
    }
    Ok(vec![sub, sup])
}

fn reductions(rng: &mut ChaCha8Rng, cases: usize, tol: f64) -> Result<Vec<PropertyReport>> {
    let names = [
        "chain sub = choquet",
        "chain super = choquet",
        "single member = shilkret",
        "max pseudo = shilkret",
        "partition sub = pan",
        "pan = partition enumeration",
        "all subsets sub = concave",
        "all subsets super = convex",
    ];
    let mut reports: Vec<PropertyReport> = names.iter().map(|n| PropertyReport::new(n)).collect();
    for _ in 0..cases {
        let n = rng.gen_range(2..=5);
        let m = random_capacity(rng, n);
        let x = random_point(rng, n, 3.0);
        let base = |c: CollectionConstraint| -> Result<Base> {
            Base::new(
                DecompSystem::indicators(n, c)?,
                Weighting::CapacityInduced(m.clone()),
            )
        };
        let value = |c: CollectionConstraint, d: Direction| -> Result<f64> {
            let b = base(c)?;
            Ok(
                decomp::integral_batch(&b, std::slice::from_ref(&x), d, &SolveOptions::default())?
                    .remove(0)
                    .value,
            )
        };
        let choquet = classical::choquet(&m, &x)?;
        let shilkret = classical::shilkret(&m, &x)?;
        let pan = classical::pan(&m, &x)?;
        let pairs = [
            (value(CollectionConstraint::Chain, Direction::Sub)?, choquet),
            (
                value(CollectionConstraint::Chain, Direction::Super)?,
                choquet,
            ),
            (
                value(CollectionConstraint::MaxParts(1), Direction::Sub)?,
                shilkret,
            ),
            (
                max_pseudo_integral(&base(CollectionConstraint::Any)?, &x)?.value,
                shilkret,
            ),
            (value(CollectionConstraint::Partition, Direction::Sub)?, pan),
            (oracle::brute_partitions(&m, &x)?, pan),
            (
                value(CollectionConstraint::Any, Direction::Sub)?,
                classical::concave(&m, &x)?,
            ),
            (
                value(CollectionConstraint::Any, Direction::Super)?,
                classical::convex(&m, &x)?,
            ),
        ];
        for (report, (got, want)) in reports.iter_mut().zip(pairs) {
            report.record((got - want).abs(), tol * want.abs().max(1.0), || {
                format!("n = {n}, x = {x}: {got} vs {want}")
            });
        }
    }
    Ok(reports)
}

fn frank(rng: &mut ChaCha8Rng, cases: usize, tol: f64, step: f64) -> Result<PropertyReport> {
    let mut report = PropertyReport::new("probsum super + product sub");
    let side = (1.0 / step).round() as u32;
    let samples: Vec<(f64, f64)> = (0..cases)
        .map(|_| {
            (
                rng.gen_range(0..=side) as f64 * step,
                rng.gen_range(0..=side) as f64 * step,
            )
        })
        .collect();
    let r = frank_check(
        &ClosedForm::ProbabilisticSum,
        &ClosedForm::Product,
        1.0,
        step,
        &samples,
    )?;
    for row in &r.rows {
        report.record(row.residual, tol, || {
            format!(
                "({}, {}): {} + {}",
                row.x, row.y, row.super_value, row.sub_value
            )
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_capacities_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=6 {
            assert!(crate::domain::validate_capacity(&random_capacity(&mut rng, n)).is_ok());
        }
    }

    #[test]
    fn suites_are_deterministic() {
        let cfg = CheckConfig {
            instances: Some(5),
            ..Default::default()
        };
        assert_eq!(
            run_suite("knapsack", &cfg).unwrap(),
            run_suite("knapsack", &cfg).unwrap()
        );
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(run_suite("nope", &CheckConfig::default()).is_err());
    }

    #[test]
    fn small_runs_pass() {
        let cfg = CheckConfig {
            instances: Some(8),
            ..Default::default()
        };
        for suite in SUITES {
            let report = run_suite(suite, &cfg).unwrap();
            assert!(report.ok(), "{report}");
        }
    }
}
