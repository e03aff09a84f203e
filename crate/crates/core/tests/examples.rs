use decint::classical::{self, LevelDependentCapacity};
use decint::decomp::{
    comonotone_integral, disjoint_support_integral, is_sub_integrable, iterated_sub_integral,
    knapsack_integral, max_pseudo_integral, probabilistic_sum_super_closed_form, sub_integral,
    super_integral, superadditive_transform, Integrability, Status,
};
use decint::domain::{
    Capacity, ClosedForm, CoefficientDomain, CollectionConstraint, DecompSystem, Generators,
    NNVector,
};
use decint::oracle::{brute_partitions, brute_sub, brute_super};
use decint::{Base, Direction, Weighting};

fn v(x: &[f64]) -> NNVector {
    NNVector::new(x.to_vec()).unwrap()
}

fn table_base(rows: &[(&[f64], f64)], coefficients: CoefficientDomain) -> Base {
    let table: Vec<(NNVector, f64)> = rows.iter().map(|(g, w)| (v(g), *w)).collect();
    let system =
        DecompSystem::complete(table.iter().map(|(g, _)| g.clone()).collect(), coefficients)
            .unwrap();
    Base::new(system, Weighting::Table(table)).unwrap()
}

const WORKERS: &[(&[f64], f64)] = &[
    (&[1.0, 0.0], 1.0),
    (&[2.0, 0.0], 2.2),
    (&[0.0, 1.0], 1.1),
    (&[0.0, 2.0], 2.0),
    (&[1.0, 1.0], 2.2),
    (&[2.0, 1.0], 3.5),
    (&[1.0, 2.0], 3.0),
    (&[2.0, 2.0], 4.3),
];

const OFFERS: &[(&[f64], f64)] = &[
    (&[1.0, 0.0, 0.0], 2.8),
    (&[0.0, 1.0, 0.0], 1.6),
    (&[0.0, 0.0, 1.0], 1.8),
    (&[1.0, 1.0, 1.0], 4.8),
    (&[2.0, 0.0, 0.0], 3.0),
    (&[1.0, 0.0, 1.0], 3.0),
    (&[0.0, 1.0, 1.0], 3.0),
    (&[2.0, 1.0, 1.0], 5.5),
];

/// Capacity on four workers valued by how many come from each of two teams.
fn team_capacity() -> Capacity {
    Capacity::from_fn(4, |s| {
        let a = s.contains(0) as usize + s.contains(1) as usize;
        let b = s.contains(2) as usize + s.contains(3) as usize;
        let row = WORKERS
            .iter()
            .find(|(g, _)| g[0] == a as f64 && g[1] == b as f64);
        row.map_or(0.0, |(_, w)| *w)
    })
    .unwrap()
}

#[test]
fn workers_every_team_size() {
    let base = table_base(WORKERS, CoefficientDomain::Unit);
    for a in 0..=3 {
        for b in 0..=3 {
            let x = v(&[a as f64, b as f64]);
            let r = sub_integral(&base, &x).unwrap();
            assert!(r.is_exact());
            assert!(r.witness_is_valid(&x, Direction::Sub, 1e-9));
            assert!(
                (r.value - brute_sub(&base, &x).unwrap()).abs() < 1e-9,
                "({a},{b})"
            );
        }
    }
    let r = sub_integral(&base, &v(&[2.0, 2.0])).unwrap();
    assert!((r.value - 4.6).abs() < 1e-9);
}

#[test]
fn fast_food_orders() {
    let base = table_base(OFFERS, CoefficientDomain::NonNegInt);
    for x in [
        [50.0, 30.0, 60.0],
        [19.0, 10.0, 10.0],
        [3.0, 1.0, 2.0],
        [0.0, 0.0, 5.0],
    ] {
        let x = v(&x);
        let r = super_integral(&base, &x).unwrap();
        assert!(r.witness_is_valid(&x, Direction::Super, 1e-9));
        assert!(
            (r.value - brute_super(&base, &x).unwrap().unwrap()).abs() < 1e-9,
            "{x}"
        );
    }
    assert!(
        (super_integral(&base, &v(&[50.0, 30.0, 60.0]))
            .unwrap()
            .value
            - 205.0)
            .abs()
            < 1e-9
    );
}

#[test]
fn explicit_collections_and_their_iterate() {
    let collections = vec![
        vec![v(&[0.0, 2.0, 1.0]), v(&[2.0, 0.0, 0.0])],
        vec![v(&[2.0, 2.0, 1.0]), v(&[0.0, 1.0, 2.0])],
        vec![v(&[0.0, 1.0, 2.0])],
    ];
    let table = vec![
        (v(&[0.0, 2.0, 1.0]), 2.0),
        (v(&[2.0, 0.0, 0.0]), 2.0),
        (v(&[0.0, 1.0, 2.0]), 2.0),
        (v(&[2.0, 2.0, 1.0]), 3.0),
    ];
    let system = DecompSystem::new(
        3,
        Generators::Collections(collections),
        CoefficientDomain::Unit,
        CollectionConstraint::Any,
    )
    .unwrap();
    let base = Base::new(system, Weighting::Table(table)).unwrap();
    let expect = [
        ([0.0, 2.0, 1.0], 0.0),
        ([2.0, 0.0, 0.0], 0.0),
        ([0.0, 1.0, 2.0], 2.0),
        ([2.0, 2.0, 1.0], 4.0),
        ([2.0, 3.0, 3.0], 5.0),
    ];
    for (x, want) in expect {
        assert_eq!(sub_integral(&base, &v(&x)).unwrap().value, want, "{x:?}");
    }
    assert_eq!(
        iterated_sub_integral(&base, &v(&[2.0, 2.0, 1.0]))
            .unwrap()
            .value,
        0.0
    );
    assert_eq!(
        iterated_sub_integral(&base, &v(&[2.0, 3.0, 3.0]))
            .unwrap()
            .value,
        6.0
    );
}

#[test]
fn team_capacity_integrals() {
    let m = team_capacity();
    let ones = [1.0; 4];
    assert!((classical::concave(&m, &ones).unwrap() - 4.6).abs() < 1e-9);
    let base = Base::new(
        DecompSystem::indicators(4, CollectionConstraint::Any).unwrap(),
        Weighting::CapacityInduced(m.clone()),
    )
    .unwrap();
    assert!((sub_integral(&base, &v(&ones)).unwrap().value - 4.6).abs() < 1e-9);
    // on a constant vector Choquet is just m(N)
    assert!((classical::choquet(&m, &ones).unwrap() - 4.3).abs() < 1e-12);
    assert!(
        (brute_partitions(&m, &v(&ones)).unwrap() - classical::pan(&m, &ones).unwrap()).abs()
            < 1e-12
    );
}

#[test]
fn probabilistic_sum_cover() {
    let system = DecompSystem::new(
        2,
        Generators::BoxGrid {
            upper: Some(1.0),
            step: 1.0 / 16.0,
        },
        CoefficientDomain::Unit,
        CollectionConstraint::Any,
    )
    .unwrap();
    let base = Base::new(system, Weighting::ClosedForm(ClosedForm::ProbabilisticSum)).unwrap();
    for (x, y) in [(1.5, 1.5), (0.25, 0.75), (2.0, 0.5), (2.5, 2.25)] {
        let r = super_integral(&base, &v(&[x, y])).unwrap();
        assert!(matches!(r.status, Status::Approximate { .. }));
        assert!(
            (r.value - probabilistic_sum_super_closed_form(x, y)).abs() < 1e-9,
            "({x},{y}) {}",
            r.value
        );
    }
}

#[test]
fn max_log_transforms() {
    let a = Weighting::ClosedForm(ClosedForm::MaxLog);
    let x = v(&[1.0, 3.0]);
    let star = superadditive_transform(&a, &x, None, 1.0 / 32.0).unwrap();
    let como = comonotone_integral(&a, &x, 1.0 / 32.0).unwrap();
    assert!((star.value - 4.0).abs() < 0.1);
    assert!((como.value - 3.0).abs() < 0.1);
    // two parts are far from enough
    let two = superadditive_transform(&a, &x, Some(2), 1.0 / 32.0).unwrap();
    assert!((two.value - (2f64.ln() + 4f64.ln())).abs() < 1e-9);
    // one part on each coordinate is as good as it gets without splitting
    let disjoint = disjoint_support_integral(&a, &x, 2).unwrap();
    assert!((disjoint.value - two.value).abs() < 1e-9);
}

#[test]
fn square_root_weighting_diverges() {
    let system = DecompSystem::new(
        2,
        Generators::BoxGrid {
            upper: None,
            step: 1.0 / 64.0,
        },
        CoefficientDomain::Unit,
        CollectionConstraint::Any,
    )
    .unwrap();
    let base = Base::new(system, Weighting::ClosedForm(ClosedForm::XPlusSqrtY)).unwrap();
    match is_sub_integrable(&base, &v(&[1.0, 1.0])) {
        Integrability::No { divergence } => {
            assert!(divergence.windows(2).all(|w| w[1].value > w[0].value));
            assert!(divergence.last().unwrap().value > 1e3);
        }
        other => panic!("{other:?}"),
    }
    assert!(is_sub_integrable(&base, &v(&[4.0, 0.0])).is_yes());
    assert_eq!(
        sub_integral(&base, &v(&[1.0, 1.0])).unwrap().status,
        Status::Unbounded
    );
}

#[test]
fn knapsack_and_best_item() {
    let r = knapsack_integral(&[4.0, 7.0, 11.0], 15.0).unwrap();
    assert_eq!(r.value, 15.0);
    let base = decint::decomp::knapsack_base(&[4.0, 7.0, 11.0]).unwrap();
    assert_eq!(max_pseudo_integral(&base, &v(&[15.0])).unwrap().value, 11.0);
}

#[test]
fn level_dependent_capacity_reduces_to_choquet() {
    let m = team_capacity();
    let nu = LevelDependentCapacity::constant(m.clone());
    let x = [0.3, 1.2, 0.0, 2.5];
    let a = classical::level_dependent_choquet(&nu, &x).unwrap();
    assert!((a - classical::choquet(&m, &x).unwrap()).abs() < 1e-12);
    let half = Capacity::from_fn(4, |s| 0.5 * m.get(s)).unwrap();
    let nu = LevelDependentCapacity::new(vec![0.0, 1.0], vec![m.clone(), half], None).unwrap();
    let b = classical::level_dependent_choquet(&nu, &x).unwrap();
    assert!(b < a);
}
