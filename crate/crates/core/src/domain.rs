//! Domain types shared by every solver: nonnegative vectors, subsets of the
//! ground set, capacities, weighting functions, decomposition systems and
//! bases, plus the elementary predicates built on them.

use std::fmt;
use std::ops::Deref;

use crate::error::{Error, Result};

/// Equality tolerance used throughout the crate.
pub const EPS: f64 = 1e-9;

/// Largest ground set a dense capacity may describe.
pub const MAX_GROUND_SET: usize = 20;

/// A point of the nonnegative orthant.
#[derive(Debug, Clone, PartialEq)]
pub struct NNVector(Vec<f64>);

impl NNVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::GroundSetSize(0));
        }
        for (index, &value) in entries.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidEntry { index, value });
            }
        }
        Ok(Self(entries))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn max_entry(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    /// Coordinates with a strictly positive entry.
    pub fn support(&self) -> SubsetMask {
        support_of(&self.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self(self.0.iter().map(|v| v * c).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_len(self.len(), other.len())?;
        Ok(Self(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }
}

impl Deref for NNVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for NNVector {
    type Error = Error;

    fn try_from(entries: Vec<f64>) -> Result<Self> {
        Self::new(entries)
    }
}

impl fmt::Display for NNVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", fmt_num(*v))?;
        }
        write!(f, ")")
    }
}

/// Formats a number with at most nine decimals and no trailing zeros.
pub fn fmt_num(v: f64) -> String {
    let rounded = (v * 1e9).round() / 1e9;
    if rounded == 0.0 {
        return "0".to_string();
    }
    format!("{rounded}")
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LengthMismatch { expected, found });
    }
    Ok(())
}

pub(crate) fn support_of(v: &[f64]) -> SubsetMask {
    SubsetMask(
        v.iter()
            .enumerate()
            .filter(|(_, &x)| x > 0.0)
            .fold(0, |acc, (i, _)| acc | (1 << i)),
    )
}

/// A subset of the ground set `{0, .., n-1}` stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SubsetMask(pub u32);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    pub fn full(n: usize) -> Self {
        Self(((1u64 << n) - 1) as u32)
    }

    pub fn singleton(i: usize) -> Self {
        Self(1 << i)
    }

    /// Builds a mask from zero-based indices.
    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        Self(indices.into_iter().fold(0, |acc, i| acc | (1 << i)))
    }

    /// Builds a mask from sorted one-based indices as written in problem files.
    pub fn from_one_based(indices: &[usize], n: usize) -> Result<Self> {
        let mut bits = 0u32;
        for &i in indices {
            if i == 0 || i > n {
                return Err(Error::SubsetOutOfRange {
                    subset: indices.to_vec(),
                    n,
                });
            }
            bits |= 1 << (i - 1);
        }
        Ok(Self(bits))
    }

    pub fn to_one_based(self) -> Vec<usize> {
        self.iter().map(|i| i + 1).collect()
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset_of(self, other: SubsetMask) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: SubsetMask) -> bool {
        self.0 & other.0 == 0
    }

    pub fn union(self, other: SubsetMask) -> Self {
        Self(self.0 | other.0)
    }

    pub fn minus(self, other: SubsetMask) -> Self {
        Self(self.0 & !other.0)
    }

    pub fn with(self, i: usize) -> Self {
        Self(self.0 | (1 << i))
    }

    pub fn fits(self, n: usize) -> bool {
        n >= 32 || self.0 >> n == 0
    }

    /// Zero-based members in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..32).filter(move |i| bits & (1 << i) != 0)
    }

    /// Every subset of `self`, including the empty set and `self`.
    pub fn subsets(self) -> impl Iterator<Item = SubsetMask> {
        let full = self.0;
        let mut next = Some(full);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == 0 {
                None
            } else {
                Some((cur - 1) & full)
            };
            Some(SubsetMask(cur))
        })
    }
}

/// Entry `i` equals `c` for `i` in `set` and zero elsewhere.
pub fn indicator(set: SubsetMask, c: f64, n: usize) -> NNVector {
    NNVector(
        (0..n)
            .map(|i| if set.contains(i) { c } else { 0.0 })
            .collect(),
    )
}

/// Componentwise `x <= y`.
pub fn leq(x: &[f64], y: &[f64]) -> Result<bool> {
    check_len(x.len(), y.len())?;
    Ok(x.iter().zip(y).all(|(a, b)| *a <= *b))
}

/// Componentwise `x <= y` up to the slack used by feasibility checks.
pub(crate) fn leq_tol(x: &[f64], y: &[f64], tol: f64) -> bool {
    x.iter().zip(y).all(|(a, b)| *a <= *b + tol)
}

/// `(x_i - x_j)(y_i - y_j) >= 0` for every pair of coordinates.
pub fn comonotone(x: &[f64], y: &[f64]) -> Result<bool> {
    check_len(x.len(), y.len())?;
    Ok(comonotone_unchecked(x, y))
}

pub(crate) fn comonotone_unchecked(x: &[f64], y: &[f64]) -> bool {
    let n = x.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if (x[i] - x[j]) * (y[i] - y[j]) < 0.0 {
                return false;
            }
        }
    }
    true
}

/// Returns `(E, c)` when `v` equals `c * 1_E` with `c > 0`.
pub(crate) fn as_indicator(v: &[f64]) -> Option<(SubsetMask, f64)> {
    let mut level = None;
    for &x in v {
        if x > 0.0 {
            match level {
                None => level = Some(x),
                Some(c) if (x - c).abs() <= EPS * c.max(1.0) => {}
                Some(_) => return None,
            }
        }
    }
    level.map(|c| (support_of(v), c))
}

/// A monotone set function on the subsets of `{0, .., n-1}`, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct Capacity {
    n: usize,
    values: Vec<f64>,
}

/// First condition a candidate capacity breaks.
#[derive(Debug, Clone, PartialEq)]
pub enum CapacityViolation {
    EmptySetNonZero {
        value: f64,
    },
    TotalNotPositive {
        value: f64,
    },
    NotMonotone {
        subset: SubsetMask,
        superset: SubsetMask,
        lower: f64,
        upper: f64,
    },
}

impl fmt::Display for CapacityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptySetNonZero { value } => {
                write!(f, "value of the empty set is {value}, expected 0")
            }
            Self::TotalNotPositive { value } => {
                write!(f, "value of the ground set is {value}, expected > 0")
            }
            Self::NotMonotone {
                subset,
                superset,
                lower,
                upper,
            } => write!(
                f,
                "m({:?}) = {lower} exceeds m({:?}) = {upper}",
                subset.to_one_based(),
                superset.to_one_based()
            ),
        }
    }
}

impl Capacity {
    /// Structural construction: `values[mask]` for every mask of an `n`-set.
    /// Does not check the capacity conditions; see [`validate_capacity`].
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || n > MAX_GROUND_SET {
            return Err(Error::GroundSetSize(n));
        }
        check_len(1 << n, values.len())?;
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidEntry { index, value });
            }
        }
        Ok(Self { n, values })
    }

    /// Builds from an explicit `(subset, value)` listing; every subset must appear.
    pub fn from_pairs(
        n: usize,
        pairs: impl IntoIterator<Item = (SubsetMask, f64)>,
    ) -> Result<Self> {
        if n == 0 || n > MAX_GROUND_SET {
            return Err(Error::GroundSetSize(n));
        }
        let mut values = vec![None; 1 << n];
        for (set, value) in pairs {
            if !set.fits(n) {
                return Err(Error::SubsetOutOfRange {
                    subset: set.to_one_based(),
                    n,
                });
            }
            values[set.0 as usize] = Some(value);
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(mask, v)| {
                v.ok_or_else(|| Error::MissingSubset(SubsetMask(mask as u32).to_one_based()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(n, values)
    }

    /// Structural construction followed by full validation.
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        let c = Self::from_values(n, values)?;
        validate_capacity(&c).map_err(Error::InvalidCapacity)?;
        Ok(c)
    }

    pub fn from_fn(n: usize, f: impl Fn(SubsetMask) -> f64) -> Result<Self> {
        if n == 0 || n > MAX_GROUND_SET {
            return Err(Error::GroundSetSize(n));
        }
        Self::new(n, (0..1u32 << n).map(|m| f(SubsetMask(m))).collect())
    }

    /// `m(E) = sum_{i in E} w_i`.
    pub fn additive(weights: &[f64]) -> Result<Self> {
        Self::from_fn(weights.len(), |e| e.iter().map(|i| weights[i]).sum())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, set: SubsetMask) -> f64 {
        self.values[set.0 as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn full_set(&self) -> SubsetMask {
        SubsetMask::full(self.n)
    }

    /// Applies a permutation of the ground set: the result assigns to `perm(E)` the value of `E`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut values = vec![0.0; self.values.len()];
        for (mask, &v) in self.values.iter().enumerate() {
            let image = SubsetMask::from_indices(SubsetMask(mask as u32).iter().map(|i| perm[i]));
            values[image.0 as usize] = v;
        }
        Self { n: self.n, values }
    }
}

/// Checks `m(empty) = 0`, `m(N) > 0` and monotonicity along every edge `(E, E + i)`.
pub fn validate_capacity(c: &Capacity) -> Result<(), CapacityViolation> {
    let empty = c.get(SubsetMask::EMPTY);
    if empty != 0.0 {
        return Err(CapacityViolation::EmptySetNonZero { value: empty });
    }
    let total = c.get(c.full_set());
    if total <= 0.0 {
        return Err(CapacityViolation::TotalNotPositive { value: total });
    }
    for mask in 0..(1u32 << c.n) {
        let e = SubsetMask(mask);
        for i in 0..c.n {
            if e.contains(i) {
                continue;
            }
            let f = e.with(i);
            if c.get(e) > c.get(f) {
                return Err(CapacityViolation::NotMonotone {
                    subset: e,
                    superset: f,
                    lower: c.get(e),
                    upper: c.get(f),
                });
            }
        }
    }
    Ok(())
}

/// Built-in weighting functions given by a formula.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedForm {
    /// `sum_i w_i x_i`
    WeightedSum(Vec<f64>),
    /// `c * max_i x_i`
    MaxCoord(f64),
    /// `1 - prod_i (1 - x_i)` on the unit cube; `x + y - xy` for two coordinates.
    ProbabilisticSum,
    /// `prod_i x_i`
    Product,
    /// `max_i ln(1 + x_i)`
    MaxLog,
    /// `x_1 + sum_{i >= 2} sqrt(x_i)`
    XPlusSqrtY,
}

impl ClosedForm {
    pub fn name(&self) -> &'static str {
        match self {
            Self::WeightedSum(_) => "weighted_sum",
            Self::MaxCoord(_) => "max_coord",
            Self::ProbabilisticSum => "probabilistic_sum",
            Self::Product => "product",
            Self::MaxLog => "max_log",
            Self::XPlusSqrtY => "x_plus_sqrt_y",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            Self::WeightedSum(w) => w.clone(),
            Self::MaxCoord(c) => vec![*c],
            _ => Vec::new(),
        }
    }

    pub fn from_name(name: &str, params: &[f64]) -> Result<Self> {
        let form = match name {
            "weighted_sum" => Self::WeightedSum(params.to_vec()),
            "max_coord" => match params {
                [c] => Self::MaxCoord(*c),
                _ => {
                    return Err(Error::InvalidParameter(
                        "max_coord takes exactly one parameter".into(),
                    ))
                }
            },
            "probabilistic_sum" => Self::ProbabilisticSum,
            "product" => Self::Product,
            "max_log" => Self::MaxLog,
            "x_plus_sqrt_y" => Self::XPlusSqrtY,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown closed form `{other}`"
                )))
            }
        };
        if !matches!(form, Self::WeightedSum(_) | Self::MaxCoord(_)) && !params.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "{name} takes no parameters"
            )));
        }
        if params.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{name} parameters must be nonnegative"
            )));
        }
        Ok(form)
    }

    /// Upper end of the cube the formula is a weighting function on, if bounded.
    pub fn domain_upper(&self) -> Option<f64> {
        match self {
            Self::ProbabilisticSum => Some(1.0),
            _ => None,
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        matches!(self, Self::WeightedSum(_) | Self::MaxCoord(_))
    }

    pub fn eval(&self, x: &[f64]) -> Option<f64> {
        let v = match self {
            Self::WeightedSum(w) => {
                if w.len() != x.len() {
                    return None;
                }
                w.iter().zip(x).map(|(a, b)| a * b).sum()
            }
            Self::MaxCoord(c) => c * x.iter().copied().fold(0.0, f64::max),
            Self::ProbabilisticSum => {
                if x.iter().any(|&v| v > 1.0 + EPS) {
                    return None;
                }
                1.0 - x.iter().map(|&v| 1.0 - v.min(1.0)).product::<f64>()
            }
            Self::Product => x.iter().product(),
            Self::MaxLog => x.iter().map(|&v| v.ln_1p()).fold(0.0, f64::max),
            Self::XPlusSqrtY => {
                x.first().copied().unwrap_or(0.0) + x.iter().skip(1).map(|v| v.sqrt()).sum::<f64>()
            }
        };
        Some(v)
    }
}

/// A monotone nonnegative valuation of decomposable vectors.
#[derive(Debug, Clone, PartialEq)]
pub enum Weighting {
    /// Explicit values on a finite set of vectors.
    Table(Vec<(NNVector, f64)>),
    /// `A(c * 1_E) = c * m(E)`.
    CapacityInduced(Capacity),
    /// `A(c * 1_E) = min(c, m(E))`, the Sugeno-type valuation.
    CapacityMin(Capacity),
    ClosedForm(ClosedForm),
}

impl Weighting {
    /// Evaluates at `y`; `None` where `y` lies outside the weighting's domain.
    pub fn eval(&self, y: &[f64]) -> Option<f64> {
        match self {
            Self::Table(rows) => {
                if y.iter().all(|&v| v == 0.0) {
                    let listed = rows.iter().find(|(g, _)| g.is_zero()).map(|(_, w)| *w);
                    return Some(listed.unwrap_or(0.0));
                }
                rows.iter()
                    .find(|(g, _)| {
                        g.len() == y.len() && g.iter().zip(y).all(|(a, b)| (a - b).abs() <= EPS)
                    })
                    .map(|(_, w)| *w)
            }
            Self::CapacityInduced(m) | Self::CapacityMin(m) => {
                if y.len() != m.n() {
                    return None;
                }
                if y.iter().all(|&v| v == 0.0) {
                    return Some(0.0);
                }
                let (set, c) = as_indicator(y)?;
                Some(match self {
                    Self::CapacityInduced(_) => c * m.get(set),
                    _ => c.min(m.get(set)),
                })
            }
            Self::ClosedForm(form) => form.eval(y),
        }
    }

    /// `A(a * g) = a * A(g)` for every `a >= 0` on the weighting's domain.
    pub fn is_homogeneous(&self) -> bool {
        match self {
            Self::Table(_) | Self::CapacityInduced(_) => true,
            Self::CapacityMin(_) => false,
            Self::ClosedForm(form) => form.is_homogeneous(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Table(_) => "table",
            Self::CapacityInduced(_) => "capacity",
            Self::CapacityMin(_) => "capacity_min",
            Self::ClosedForm(form) => form.name(),
        }
    }
}

/// Reasons a weighting fails the monotonicity or boundary conditions on a sample.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightingViolation {
    /// Structural: nothing to check.
    EmptySample,
    Undefined {
        point: NNVector,
    },
    NotMonotone {
        lower: NNVector,
        upper: NNVector,
        lower_value: f64,
        upper_value: f64,
    },
    NonZeroAtOrigin {
        value: f64,
    },
    NoPositiveValue,
}

impl fmt::Display for WeightingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptySample => write!(f, "empty sample"),
            Self::Undefined { point } => write!(f, "weighting undefined at {point}"),
            Self::NotMonotone {
                lower,
                upper,
                lower_value,
                upper_value,
            } => {
                write!(
                    f,
                    "A{lower} = {lower_value} exceeds A{upper} = {upper_value}"
                )
            }
            Self::NonZeroAtOrigin { value } => write!(f, "A(0) = {value}, expected 0"),
            Self::NoPositiveValue => write!(f, "no sampled point has a positive value"),
        }
    }
}

/// Checks monotonicity on every comparable pair of `sample`, `A(0) = 0` when the
/// origin is sampled, and that some sampled value is positive.
pub fn validate_weighting(w: &Weighting, sample: &[NNVector]) -> Result<(), WeightingViolation> {
    if sample.is_empty() {
        return Err(WeightingViolation::EmptySample);
    }
    let values = sample
        .iter()
        .map(|p| {
            w.eval(p)
                .ok_or_else(|| WeightingViolation::Undefined { point: p.clone() })
        })
        .collect::<Result<Vec<f64>, _>>()?;
    for (p, &v) in sample.iter().zip(&values) {
        if p.is_zero() && v.abs() > EPS {
            return Err(WeightingViolation::NonZeroAtOrigin { value: v });
        }
    }
    for (i, (p, &vp)) in sample.iter().zip(&values).enumerate() {
        for (q, &vq) in sample.iter().zip(&values).skip(i + 1) {
            if p.len() != q.len() {
                continue;
            }
            if leq_tol(p, q, 0.0) && vp > vq + EPS {
                return Err(WeightingViolation::NotMonotone {
                    lower: p.clone(),
                    upper: q.clone(),
                    lower_value: vp,
                    upper_value: vq,
                });
            }
            if leq_tol(q, p, 0.0) && vq > vp + EPS {
                return Err(WeightingViolation::NotMonotone {
                    lower: q.clone(),
                    upper: p.clone(),
                    lower_value: vq,
                    upper_value: vp,
                });
            }
        }
    }
    if values.iter().all(|&v| v <= 0.0) {
        return Err(WeightingViolation::NoPositiveValue);
    }
    Ok(())
}

/// Side condition every collection of a system must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollectionConstraint {
    Any,
    /// Supports of the members are nested.
    Chain,
    /// Supports of the members are pairwise disjoint (at most `n` members).
    Partition,
    /// Pairwise disjoint supports and at most `k` members.
    DisjointSupport(usize),
    /// Members are pairwise comonotone.
    Comonotone,
    /// At most `k` members.
    MaxParts(usize),
}

/// How generators may be scaled inside a collection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientDomain {
    /// Member `a * g` for any real `a >= 0`, valued `a * A(g)`.
    NonNegReal,
    /// Member `a * g` for integer `a >= 0`, valued `a * A(g)`.
    NonNegInt,
    /// Members are generators themselves; repetitions count as separate members.
    Unit,
}

/// Where the members of collections come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Generators {
    List(Vec<NNVector>),
    /// `1_E` for every nonempty `E` of the ground set.
    Indicators,
    /// Grid points of `[0, upper]^n` (or the whole orthant) with spacing `step`.
    BoxGrid {
        upper: Option<f64>,
        step: f64,
    },
    /// An explicit finite family of collections; used verbatim.
    Collections(Vec<Vec<NNVector>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompSystem {
    pub n: usize,
    pub generators: Generators,
    pub coefficients: CoefficientDomain,
    pub constraint: CollectionConstraint,
}

impl DecompSystem {
    pub fn new(
        n: usize,
        generators: Generators,
        coefficients: CoefficientDomain,
        constraint: CollectionConstraint,
    ) -> Result<Self> {
        if n == 0 || n > MAX_GROUND_SET {
            return Err(Error::GroundSetSize(n));
        }
        match &generators {
            Generators::List(list) => {
                for g in list {
                    check_len(n, g.len())?;
                }
                if list.iter().all(NNVector::is_zero) {
                    return Err(Error::InvalidBase(
                        "at least one generator must be nonzero".into(),
                    ));
                }
            }
            Generators::Indicators => {}
            Generators::BoxGrid { upper, step } => {
                if !(step.is_finite() && *step > 0.0) {
                    return Err(Error::InvalidBase(format!(
                        "grid step must be positive, got {step}"
                    )));
                }
                if let Some(u) = upper {
                    if !(u.is_finite() && *u >= *step) {
                        return Err(Error::InvalidBase(format!(
                            "box upper end {u} must be at least the step"
                        )));
                    }
                }
            }
            Generators::Collections(collections) => {
                for g in collections.iter().flatten() {
                    check_len(n, g.len())?;
                }
                if collections.iter().flatten().all(NNVector::is_zero) {
                    return Err(Error::InvalidBase(
                        "at least one collection member must be nonzero".into(),
                    ));
                }
            }
        }
        match constraint {
            CollectionConstraint::DisjointSupport(k) if k == 0 || k > n => {
                return Err(Error::InvalidParameter(format!(
                    "disjoint-support size must lie in 1..={n}"
                )));
            }
            CollectionConstraint::MaxParts(0) => {
                return Err(Error::InvalidParameter(
                    "max-parts size must be positive".into(),
                ));
            }
            _ => {}
        }
        Ok(Self {
            n,
            generators,
            coefficients,
            constraint,
        })
    }

    /// Complete system generated by `list` with the given coefficient domain.
    pub fn complete(list: Vec<NNVector>, coefficients: CoefficientDomain) -> Result<Self> {
        let n = list.first().map(|g| g.len()).unwrap_or(0);
        Self::new(
            n,
            Generators::List(list),
            coefficients,
            CollectionConstraint::Any,
        )
    }

    pub fn indicators(n: usize, constraint: CollectionConstraint) -> Result<Self> {
        Self::new(
            n,
            Generators::Indicators,
            CoefficientDomain::NonNegReal,
            constraint,
        )
    }

    /// Nonzero vectors that can appear in a collection, when that set is finite.
    pub fn finite_members(&self) -> Option<Vec<NNVector>> {
        match (&self.generators, self.coefficients) {
            (Generators::List(list), CoefficientDomain::Unit) => {
                Some(list.iter().filter(|g| !g.is_zero()).cloned().collect())
            }
            (Generators::Collections(c), _) => {
                let mut out: Vec<NNVector> = Vec::new();
                for g in c.iter().flatten() {
                    if !g.is_zero() && !out.contains(g) {
                        out.push(g.clone());
                    }
                }
                Some(out)
            }
            _ => None,
        }
    }
}

/// A weighting together with the decomposition system it weighs.
#[derive(Debug, Clone, PartialEq)]
pub struct Base {
    pub system: DecompSystem,
    pub weighting: Weighting,
}

impl Base {
    /// Checks that the weighting is defined on every generator and satisfies
    /// monotonicity and the boundary conditions there.
    pub fn new(system: DecompSystem, weighting: Weighting) -> Result<Self> {
        let n = system.n;
        match (&system.generators, &weighting) {
            (Generators::BoxGrid { .. }, Weighting::ClosedForm(_)) => {}
            (Generators::BoxGrid { .. }, other) => {
                return Err(Error::InvalidBase(format!(
                    "box-grid systems need a closed-form weighting, got {}",
                    other.kind()
                )));
            }
            (_, Weighting::CapacityInduced(m) | Weighting::CapacityMin(m)) if m.n() != n => {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: m.n(),
                });
            }
            (_, Weighting::ClosedForm(ClosedForm::WeightedSum(w))) if w.len() != n => {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: w.len(),
                });
            }
            _ => {}
        }
        if let (Generators::BoxGrid { upper, .. }, Weighting::ClosedForm(form)) =
            (&system.generators, &weighting)
        {
            if let Some(limit) = form.domain_upper() {
                if upper.is_none_or(|u| u > limit + EPS) {
                    return Err(Error::InvalidBase(format!(
                        "{} is only a weighting function on [0,{limit}]^n",
                        form.name()
                    )));
                }
            }
        }
        let sample: Vec<NNVector> = match &system.generators {
            Generators::List(list) => list.clone(),
            Generators::Collections(c) => c.iter().flatten().cloned().collect(),
            Generators::Indicators => (1..(1u32 << n))
                .map(|m| indicator(SubsetMask(m), 1.0, n))
                .collect(),
            Generators::BoxGrid { upper, step } => {
                let top = upper.unwrap_or(1.0);
                let mut pts = vec![NNVector::zeros(n)];
                for frac in [0.25, 0.5, 1.0] {
                    let level = (((top * frac) / step).floor() * step).max(*step);
                    pts.push(NNVector::constant(n, level)?);
                    for i in 0..n {
                        pts.push(indicator(SubsetMask::singleton(i), level, n));
                    }
                }
                pts
            }
        };
        for g in &sample {
            if weighting.eval(g).is_none() {
                return Err(Error::UndefinedWeight(g.as_slice().to_vec()));
            }
        }
        match validate_weighting(&weighting, &sample) {
            Ok(()) => {}
            Err(WeightingViolation::NoPositiveValue) => {
                return Err(Error::Boundary(
                    "weighting vanishes on every generator".into(),
                ));
            }
            Err(v) => return Err(Error::InvalidBase(v.to_string())),
        }
        Ok(Self { system, weighting })
    }

    pub fn n(&self) -> usize {
        self.system.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::workers_nu;

    fn v(x: &[f64]) -> NNVector {
        NNVector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn additive_capacity_is_valid() {
        let m = Capacity::additive(&[1.0, 1.0, 1.0]).unwrap();
        assert!(validate_capacity(&m).is_ok());
    }

    #[test]
    fn nonzero_empty_set_is_rejected() {
        let mut values = Capacity::additive(&[1.0, 2.0]).unwrap().values().to_vec();
        values[0] = 0.1;
        let m = Capacity::from_values(2, values).unwrap();
        assert_eq!(
            validate_capacity(&m),
            Err(CapacityViolation::EmptySetNonZero { value: 0.1 })
        );
    }

    #[test]
    fn workers_measure_is_valid() {
        let nu = workers_nu();
        assert!(validate_capacity(&nu).is_ok());
        assert_eq!(nu.get(SubsetMask::from_indices([0])), 1.0);
        assert_eq!(nu.get(SubsetMask::from_indices([0, 2])), 2.2);
        assert_eq!(nu.get(SubsetMask::from_indices([0, 1, 2])), 3.5);
        assert_eq!(nu.get(SubsetMask::full(4)), 4.3);
    }

    #[test]
    fn missing_subset_is_structural() {
        let pairs = vec![
            (SubsetMask(0), 0.0),
            (SubsetMask(1), 1.0),
            (SubsetMask(3), 2.0),
        ];
        assert_eq!(
            Capacity::from_pairs(2, pairs),
            Err(Error::MissingSubset(vec![2]))
        );
    }

    #[test]
    fn first_monotonicity_violation_is_reported() {
        let m = Capacity::from_values(2, vec![0.0, 2.0, 1.0, 1.5]).unwrap();
        assert_eq!(
            validate_capacity(&m),
            Err(CapacityViolation::NotMonotone {
                subset: SubsetMask(1),
                superset: SubsetMask(3),
                lower: 2.0,
                upper: 1.5
            })
        );
    }

    #[test]
    fn zero_total_is_rejected() {
        let m = Capacity::from_values(1, vec![0.0, 0.0]).unwrap();
        assert_eq!(
            validate_capacity(&m),
            Err(CapacityViolation::TotalNotPositive { value: 0.0 })
        );
    }

    fn workers_table() -> Weighting {
        Weighting::Table(vec![
            (v(&[1.0, 0.0]), 1.0),
            (v(&[2.0, 0.0]), 2.2),
            (v(&[0.0, 1.0]), 1.1),
            (v(&[0.0, 2.0]), 2.0),
            (v(&[1.0, 1.0]), 2.2),
            (v(&[2.0, 1.0]), 3.5),
            (v(&[1.0, 2.0]), 3.0),
            (v(&[2.0, 2.0]), 4.3),
        ])
    }

    #[test]
    fn workers_table_is_a_weighting() {
        let w = workers_table();
        let sample: Vec<NNVector> = match &w {
            Weighting::Table(rows) => rows.iter().map(|(g, _)| g.clone()).collect(),
            _ => unreachable!(),
        };
        assert_eq!(validate_weighting(&w, &sample), Ok(()));
        assert_eq!(w.eval(&[2.0, 1.0]), Some(3.5));
    }

    #[test]
    fn non_monotone_table_is_reported() {
        let w = Weighting::Table(vec![(v(&[1.0, 0.0]), 3.0), (v(&[2.0, 0.0]), 2.0)]);
        let sample = vec![v(&[1.0, 0.0]), v(&[2.0, 0.0])];
        assert!(matches!(
            validate_weighting(&w, &sample),
            Err(WeightingViolation::NotMonotone {
                lower_value: 3.0,
                upper_value: 2.0,
                ..
            })
        ));
    }

    #[test]
    fn all_zero_table_violates_boundary() {
        let w = Weighting::Table(vec![(v(&[1.0, 0.0]), 0.0), (v(&[0.0, 1.0]), 0.0)]);
        let sample = vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])];
        assert_eq!(
            validate_weighting(&w, &sample),
            Err(WeightingViolation::NoPositiveValue)
        );
        assert_eq!(
            validate_weighting(&w, &[]),
            Err(WeightingViolation::EmptySample)
        );
    }

    #[test]
    fn comonotone_examples() {
        assert!(comonotone(&[1.0, 2.0, 3.0], &[0.0, 5.0, 9.0]).unwrap());
        assert!(!comonotone(&[1.0, 2.0], &[2.0, 1.0]).unwrap());
        let e = SubsetMask::from_indices([0]);
        let f = SubsetMask::from_indices([0, 2]);
        assert!(comonotone(&indicator(e, 2.0, 3), &indicator(f, 0.5, 3)).unwrap());
        assert!(matches!(
            comonotone(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn crossing_indicators_are_not_comonotone() {
        let a = indicator(SubsetMask::from_indices([0, 1]), 1.0, 3);
        let b = indicator(SubsetMask::from_indices([1, 2]), 1.0, 3);
        assert!(!comonotone(&a, &b).unwrap());
    }

    #[test]
    fn indicator_examples() {
        assert_eq!(
            indicator(SubsetMask::from_indices([0, 2]), 2.0, 3).as_slice(),
            &[2.0, 0.0, 2.0]
        );
        assert_eq!(indicator(SubsetMask::full(4), 1.0, 4).as_slice(), &[1.0; 4]);
        assert_eq!(indicator(SubsetMask::EMPTY, 5.0, 2).as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn leq_examples() {
        assert!(leq(&[1.0, 2.0], &[1.0, 3.0]).unwrap());
        assert!(!leq(&[2.0, 0.0], &[1.0, 3.0]).unwrap());
        assert!(leq(&[0.5, 0.5], &[0.5, 0.5]).unwrap());
        assert!(leq(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn one_based_subsets_round_trip() {
        let s = SubsetMask::from_one_based(&[1, 3], 3).unwrap();
        assert_eq!(s, SubsetMask(0b101));
        assert_eq!(s.to_one_based(), vec![1, 3]);
        assert!(SubsetMask::from_one_based(&[4], 3).is_err());
        assert_eq!(SubsetMask(0b101).subsets().count(), 4);
    }

    #[test]
    fn capacity_weightings_evaluate_on_indicators() {
        let m = Capacity::additive(&[1.0, 2.0]).unwrap();
        let a = Weighting::CapacityInduced(m.clone());
        assert_eq!(a.eval(&[3.0, 3.0]), Some(9.0));
        assert_eq!(a.eval(&[1.0, 2.0]), None);
        let s = Weighting::CapacityMin(m);
        assert_eq!(s.eval(&[3.0, 3.0]), Some(3.0));
        assert_eq!(s.eval(&[0.5, 0.0]), Some(0.5));
    }

    #[test]
    fn closed_forms() {
        assert_eq!(ClosedForm::ProbabilisticSum.eval(&[0.5, 0.5]), Some(0.75));
        assert_eq!(ClosedForm::ProbabilisticSum.eval(&[1.5, 0.5]), None);
        assert_eq!(ClosedForm::XPlusSqrtY.eval(&[1.0, 4.0]), Some(3.0));
        assert_eq!(ClosedForm::MaxCoord(2.0).eval(&[1.0, 4.0]), Some(8.0));
        assert!((ClosedForm::MaxLog.eval(&[1.0, 0.0]).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn box_grid_base_requires_domain_fit() {
        let sys = DecompSystem::new(
            2,
            Generators::BoxGrid {
                upper: Some(2.0),
                step: 0.5,
            },
            CoefficientDomain::Unit,
            CollectionConstraint::Any,
        )
        .unwrap();
        assert!(Base::new(sys, Weighting::ClosedForm(ClosedForm::ProbabilisticSum)).is_err());
    }
}
