//! Fixtures shared by unit tests.

use rand::Rng;

use crate::domain::{Capacity, SubsetMask};

/// The four-worker measure: workers 1,2 from one agency, 3,4 from the other.
pub(crate) fn workers_nu() -> Capacity {
    let e = |a: usize, b: usize| -> f64 {
        match (a, b) {
            (0, 0) => 0.0,
            (1, 0) => 1.0,
            (2, 0) => 2.2,
            (0, 1) => 1.1,
            (0, 2) => 2.0,
            (1, 1) => 2.2,
            (2, 1) => 3.5,
            (1, 2) => 3.0,
            (2, 2) => 4.3,
            _ => unreachable!(),
        }
    };
    Capacity::from_fn(4, |s| {
        let a = (s.contains(0) as usize) + (s.contains(1) as usize);
        let b = (s.contains(2) as usize) + (s.contains(3) as usize);
        e(a, b)
    })
    .unwrap()
}

pub(crate) fn random_capacity(rng: &mut impl Rng, n: usize) -> Capacity {
    crate::checks::random_capacity(rng, n)
}

pub(crate) fn random_point(rng: &mut impl Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            if rng.gen_bool(0.15) {
                0.0
            } else {
                rng.gen_range(0.0..scale)
            }
        })
        .collect()
}

#[allow(dead_code)]
pub(crate) fn mask(indices: &[usize]) -> SubsetMask {
    SubsetMask::from_indices(indices.iter().copied())
}
